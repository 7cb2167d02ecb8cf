#pragma once

/** \file vectors.hpp
 *  \brief TF-IDF vectorization, cosine similarity and plain-text word vectors.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/textproc.hpp"

namespace mmrfuse {

using DenseVector = std::vector<double>;

/** \brief Index/weight pairs with strictly increasing indices and no stored zeros. */
class SparseVector {
public:
    using Entry = std::pair<std::uint32_t, double>;

    SparseVector() = default;

    /// Builds from arbitrary entries: sorts, merges duplicates, drops zeros.
    static SparseVector from_entries(std::vector<Entry> entries) {
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.first < b.first; });
        SparseVector v;
        for (const auto& [idx, w] : entries) {
            if (!v.entries_.empty() && v.entries_.back().first == idx) {
                v.entries_.back().second += w;
            } else {
                v.entries_.emplace_back(idx, w);
            }
        }
        std::erase_if(v.entries_, [](const Entry& e) { return e.second == 0.0; });
        return v;
    }

    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t nnz() const noexcept { return entries_.size(); }

    double norm() const {
        double s = 0.0;
        for (const auto& e : entries_) s += e.second * e.second;
        return std::sqrt(s);
    }

    void scale(double f) {
        for (auto& e : entries_) e.second *= f;
    }

private:
    std::vector<Entry> entries_;
};

inline double dot(const SparseVector& a, const SparseVector& b) {
    const auto& x = a.entries();
    const auto& y = b.entries();
    double s = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i].first < y[j].first) {
            ++i;
        } else if (y[j].first < x[i].first) {
            ++j;
        } else {
            s += x[i].second * y[j].second;
            ++i;
            ++j;
        }
    }
    return s;
}

inline double dot(const DenseVector& a, const DenseVector& b) {
    if (a.size() != b.size()) throw DomainError("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const DenseVector& a) { return std::sqrt(dot(a, a)); }

namespace detail {

inline double clamp_cosine(double c) { return std::clamp(c, -1.0, 1.0); }

}  // namespace detail

/// Cosine similarity; 0 when either vector has zero norm.
inline double cosine(const SparseVector& a, const SparseVector& b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return detail::clamp_cosine(dot(a, b) / (na * nb));
}

inline double cosine(const DenseVector& a, const DenseVector& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return detail::clamp_cosine(dot(a, b) / (na * nb));
}

/** \brief Fitted TF-IDF vectorizer with smoothed idf. */
struct TfIdfModel {
    Vocabulary vocabulary;
    std::vector<double> idf;
    std::size_t corpus_size = 0;
};

/** \brief Fits idf(w) = ln((1 + N) / (1 + df(w))) + 1 over \p docs. */
inline TfIdfModel fit_tfidf(const std::vector<TokenList>& docs) {
    if (docs.empty()) throw DomainError("fit_tfidf: empty corpus");
    TfIdfModel m;
    m.vocabulary = build_vocab(docs, {}, 1);
    m.corpus_size = docs.size();
    const double n = static_cast<double>(docs.size());
    m.idf.resize(m.vocabulary.size());
    for (std::size_t i = 0; i < m.vocabulary.size(); ++i) {
        m.idf[i] = std::log((1.0 + n) / (1.0 + static_cast<double>(m.vocabulary.df(i)))) + 1.0;
    }
    return m;
}

/** \brief Raw-count tf times idf, before normalization. Out-of-vocabulary words are dropped. */
inline SparseVector tfidf_weights(const TfIdfModel& model, const TokenList& doc) {
    std::map<std::uint32_t, double> counts;
    for (const auto& w : doc) {
        if (auto idx = model.vocabulary.index_of(w)) counts[static_cast<std::uint32_t>(*idx)] += 1.0;
    }
    std::vector<SparseVector::Entry> entries;
    entries.reserve(counts.size());
    for (const auto& [idx, tf] : counts) entries.emplace_back(idx, tf * model.idf[idx]);
    return SparseVector::from_entries(std::move(entries));
}

/** \brief L2-normalized TF-IDF vector; all-OOV input gives the zero vector. */
inline SparseVector tfidf_vector(const TfIdfModel& model, const TokenList& doc) {
    SparseVector v = tfidf_weights(model, doc);
    const double n = v.norm();
    if (n > 0.0) v.scale(1.0 / n);
    return v;
}

/** \brief Word embedding table of uniform dimension. */
class WordVectors {
public:
    WordVectors() = default;
    explicit WordVectors(std::size_t dimension) : dimension_(dimension) {}

    std::size_t dimension() const noexcept { return dimension_; }
    std::size_t size() const noexcept { return index_.size(); }
    bool empty() const noexcept { return index_.empty(); }

    /// Inserts or replaces. Returns false when the word already existed.
    bool set(const std::string& word, DenseVector v) {
        if (v.size() != dimension_) throw DomainError("WordVectors: dimension mismatch for '" + word + "'");
        for (double x : v) {
            if (!std::isfinite(x)) throw DomainError("WordVectors: non-finite entry for '" + word + "'");
        }
        auto [it, inserted] = index_.try_emplace(word, vectors_.size());
        if (inserted) {
            vectors_.push_back(std::move(v));
        } else {
            vectors_[it->second] = std::move(v);
        }
        return inserted;
    }

    const DenseVector* find(const std::string& word) const {
        auto it = index_.find(word);
        return it == index_.end() ? nullptr : &vectors_[it->second];
    }

    bool contains(const std::string& word) const { return index_.count(word) != 0; }

private:
    std::size_t dimension_ = 0;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<DenseVector> vectors_;
};

/** \brief Loads "<count> <dimension>" followed by "<word> <v1> ... <vd>" lines.
 *
 * Duplicate words: the last occurrence wins and a warning is emitted.
 */
inline WordVectors load_word_vectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read word-vector file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) break;
    }
    if (detail::trim(line).empty()) throw ParseError(path, line_no, "empty word-vector file");

    std::istringstream header(line);
    long long count = -1;
    long long dim = -1;
    std::string extra;
    if (!(header >> count >> dim) || (header >> extra) || count < 0 || dim < 1) {
        throw ParseError(path, line_no, "expected header '<count> <dimension>'");
    }
    WordVectors wv(static_cast<std::size_t>(dim));
    long long rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        ++rows;
        std::istringstream row(line);
        std::string word;
        row >> word;
        DenseVector v;
        std::string tok;
        while (row >> tok) {
            try {
                std::size_t used = 0;
                v.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw ParseError(path, line_no, "bad number '" + tok + "'");
            }
        }
        if (v.size() != wv.dimension()) {
            throw ParseError(path, line_no,
                             "vector for '" + word + "' has dimension " + std::to_string(v.size()) +
                                 ", expected " + std::to_string(wv.dimension()));
        }
        try {
            if (!wv.set(word, std::move(v))) {
                diag::warn(path + ":" + std::to_string(line_no) + ": duplicate word '" + word +
                           "', last occurrence wins");
            }
        } catch (const DomainError& e) {
            throw ParseError(path, line_no, e.what());
        }
    }
    if (wv.empty()) throw ParseError(path, line_no, "word-vector file contains no vectors");
    if (rows != count) {
        diag::warn(path + ": header declares " + std::to_string(count) + " vectors, found " +
                   std::to_string(rows));
    }
    return wv;
}

}  // namespace mmrfuse
