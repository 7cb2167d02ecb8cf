#pragma once

/** \file dbow.hpp
 *  \brief Distributed bag-of-words document embeddings trained with negative sampling.
 *
 * Each document owns a vector that is trained to predict every word of the
 * document against word output vectors, with `negatives` noise words drawn
 * from the unigram distribution raised to 0.75. Training runs single-threaded
 * in a fixed order with all randomness drawn from one seeded stream, so the
 * result is a pure function of (corpus, parameters, seed). There is no
 * frequency subsampling.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/random.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/vectors.hpp"

namespace mmrfuse {

struct DbowParams {
    std::size_t dimension = 64;
    std::size_t epochs = 40;
    std::size_t negatives = 5;
    double alpha = 0.025;
    double min_alpha = 0.0001;
    std::uint64_t seed = 1;
};

/** \brief Inferred vector plus a flag for documents with no known words. */
struct InferredVector {
    DenseVector vector;
    bool all_oov = false;
};

class DocEmbedModel {
public:
    const Vocabulary& vocabulary() const noexcept { return vocab_; }
    const DbowParams& params() const noexcept { return params_; }
    std::size_t dimension() const noexcept { return params_.dimension; }

    /// Trained vector of the i-th training document.
    const DenseVector& doc_vector(std::size_t i) const { return doc_vectors_.at(i); }
    std::size_t doc_count() const noexcept { return doc_vectors_.size(); }

    DenseVector word_output_vector(std::size_t word) const {
        const auto d = params_.dimension;
        return DenseVector(word_out_.begin() + static_cast<std::ptrdiff_t>(word * d),
                           word_out_.begin() + static_cast<std::ptrdiff_t>((word + 1) * d));
    }

    /** \brief Exposes the word output matrix as an embedding table (used when no
     *  external word vectors are supplied for WMD).
     */
    WordVectors word_vectors() const {
        WordVectors wv(params_.dimension);
        for (std::size_t w = 0; w < vocab_.size(); ++w) wv.set(vocab_.word(w), word_output_vector(w));
        return wv;
    }

    friend DocEmbedModel train_dbow(const std::vector<TokenList>& docs, const DbowParams& params);
    friend InferredVector infer_docvec(const DocEmbedModel& model, const TokenList& doc,
                                       std::size_t infer_epochs, std::uint64_t seed);

private:
    std::size_t sample_negative(Rng& rng) const {
        const double u = rng.uniform() * noise_cdf_.back();
        auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
        if (it == noise_cdf_.end()) --it;
        return static_cast<std::size_t>(it - noise_cdf_.begin());
    }

    std::vector<std::size_t> encode(const TokenList& doc) const {
        std::vector<std::size_t> ids;
        ids.reserve(doc.size());
        for (const auto& w : doc) {
            if (auto i = vocab_.index_of(w)) ids.push_back(*i);
        }
        return ids;
    }

    // Negative-sampling step for (doc vector, word). Accumulates the doc-vector
    // gradient in `grad`; word outputs are updated only when `outputs` is non-null.
    void step(const double* docvec, std::size_t word, double lr, Rng& rng, double* grad,
              double* outputs) const {
        const auto d = params_.dimension;
        for (std::size_t s = 0; s <= params_.negatives; ++s) {
            std::size_t target = word;
            double label = 1.0;
            if (s > 0) {
                target = sample_negative(rng);
                if (target == word) continue;
                label = 0.0;
            }
            const double* out = word_out_.data() + target * d;
            double f = 0.0;
            for (std::size_t k = 0; k < d; ++k) f += docvec[k] * out[k];
            const double g = (label - 1.0 / (1.0 + std::exp(-f))) * lr;
            for (std::size_t k = 0; k < d; ++k) grad[k] += g * out[k];
            if (outputs != nullptr) {
                double* o = outputs + target * d;
                for (std::size_t k = 0; k < d; ++k) o[k] += g * docvec[k];
            }
        }
    }

    Vocabulary vocab_;
    DbowParams params_;
    std::vector<double> word_out_;  // vocab x dimension, row-major
    std::vector<DenseVector> doc_vectors_;
    std::vector<double> noise_cdf_;
};

inline DocEmbedModel train_dbow(const std::vector<TokenList>& docs, const DbowParams& params) {
    if (docs.empty()) throw DomainError("train_dbow: empty corpus");
    if (params.dimension < 2) throw DomainError("train_dbow: dimension must be >= 2");
    if (params.epochs < 1) throw DomainError("train_dbow: epochs must be >= 1");

    DocEmbedModel m;
    m.params_ = params;
    m.vocab_ = build_vocab(docs, {}, 1);
    const auto d = params.dimension;
    const auto v = m.vocab_.size();

    std::vector<std::vector<std::size_t>> encoded;
    encoded.reserve(docs.size());
    std::vector<double> freq(v, 0.0);
    std::size_t total = 0;
    for (const auto& doc : docs) {
        encoded.push_back(m.encode(doc));
        for (auto w : encoded.back()) freq[w] += 1.0;
        total += encoded.back().size();
    }
    m.noise_cdf_.resize(v);
    double acc = 0.0;
    for (std::size_t w = 0; w < v; ++w) {
        acc += std::pow(freq[w], 0.75);
        m.noise_cdf_[w] = acc;
    }

    Rng rng(params.seed);
    m.word_out_.assign(v * d, 0.0);
    m.doc_vectors_.resize(docs.size());
    for (auto& dv : m.doc_vectors_) {
        dv.resize(d);
        for (auto& x : dv) x = (rng.uniform() - 0.5) / static_cast<double>(d);
    }

    const double planned = static_cast<double>(total) * static_cast<double>(params.epochs);
    double processed = 0.0;
    std::vector<double> grad(d);
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
        for (std::size_t i = 0; i < encoded.size(); ++i) {
            double* docvec = m.doc_vectors_[i].data();
            for (auto w : encoded[i]) {
                const double lr = std::max(params.min_alpha,
                                           params.alpha - (params.alpha - params.min_alpha) * processed / planned);
                std::fill(grad.begin(), grad.end(), 0.0);
                m.step(docvec, w, lr, rng, grad.data(), m.word_out_.data());
                for (std::size_t k = 0; k < d; ++k) docvec[k] += grad[k];
                processed += 1.0;
            }
        }
    }
    return m;
}

/** \brief Fits a fresh document vector against the frozen word output vectors. */
inline InferredVector infer_docvec(const DocEmbedModel& model, const TokenList& doc, std::size_t infer_epochs,
                                   std::uint64_t seed) {
    const auto d = model.params_.dimension;
    InferredVector out;
    const auto ids = model.encode(doc);
    if (ids.empty()) {
        out.vector.assign(d, 0.0);
        out.all_oov = true;
        return out;
    }
    if (infer_epochs < 1) throw DomainError("infer_docvec: epochs must be >= 1");
    Rng rng(seed);
    out.vector.resize(d);
    for (auto& x : out.vector) x = (rng.uniform() - 0.5) / static_cast<double>(d);

    const auto& p = model.params_;
    const double planned = static_cast<double>(ids.size()) * static_cast<double>(infer_epochs);
    double processed = 0.0;
    std::vector<double> grad(d);
    for (std::size_t epoch = 0; epoch < infer_epochs; ++epoch) {
        for (auto w : ids) {
            const double lr = std::max(p.min_alpha, p.alpha - (p.alpha - p.min_alpha) * processed / planned);
            std::fill(grad.begin(), grad.end(), 0.0);
            model.step(out.vector.data(), w, lr, rng, grad.data(), nullptr);
            for (std::size_t k = 0; k < d; ++k) out.vector[k] += grad[k];
            processed += 1.0;
        }
    }
    return out;
}

}  // namespace mmrfuse
