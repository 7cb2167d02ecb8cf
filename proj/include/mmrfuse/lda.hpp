#pragma once

/** \file lda.hpp
 *  \brief Latent Dirichlet Allocation by collapsed Gibbs sampling, and the MMR query document.
 */

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/random.hpp"
#include "mmrfuse/textproc.hpp"

namespace mmrfuse {

struct LdaParams {
    std::size_t topics = 1;
    std::optional<double> alpha;  ///< defaults to 50 / topics
    double beta = 0.01;
    std::size_t iterations = 500;
    std::uint64_t seed = 1;
    std::size_t min_df = 2;
    const StopwordSet* stopwords = &default_stopwords();
};

/** \brief Final state of a Gibbs chain. */
struct LdaModel {
    std::size_t topics = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    Vocabulary vocabulary;
    std::vector<std::size_t> topic_word;  ///< topics x |V|, row-major
    std::vector<std::size_t> topic_total;
    std::vector<std::size_t> doc_topic;   ///< docs x topics, row-major
    std::size_t token_count = 0;

    std::size_t count(std::size_t topic, std::size_t word) const {
        return topic_word[topic * vocabulary.size() + word];
    }
    std::size_t doc_count() const { return topics == 0 ? 0 : doc_topic.size() / topics; }
};

/** \brief Runs `iterations` full collapsed-Gibbs sweeps and returns the final counts.
 *
 * The vocabulary drops stopwords and words below min_df; min_df is capped
 * at the number of documents so that a one-document corpus still has words.
 */
inline LdaModel fit_lda(const std::vector<TokenList>& docs, const LdaParams& params) {
    if (params.topics < 1) throw DomainError("fit_lda: topic count must be >= 1");
    if (params.iterations < 1) throw DomainError("fit_lda: iterations must be >= 1");
    if (docs.empty()) throw DomainError("fit_lda: empty corpus");

    static const StopwordSet kNone;
    const StopwordSet& stop = params.stopwords ? *params.stopwords : kNone;
    const std::size_t min_df = std::max<std::size_t>(1, std::min(params.min_df, docs.size()));

    LdaModel m;
    m.topics = params.topics;
    m.alpha = params.alpha.value_or(50.0 / static_cast<double>(params.topics));
    m.beta = params.beta;
    m.iterations = params.iterations;
    m.seed = params.seed;
    m.vocabulary = build_vocab(docs, stop, min_df);

    const std::size_t k_topics = m.topics;
    const std::size_t v = m.vocabulary.size();
    std::vector<std::vector<std::size_t>> words(docs.size());
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& t : docs[d]) {
            if (auto i = m.vocabulary.index_of(t)) words[d].push_back(*i);
        }
        m.token_count += words[d].size();
    }

    m.topic_word.assign(k_topics * v, 0);
    m.topic_total.assign(k_topics, 0);
    m.doc_topic.assign(docs.size() * k_topics, 0);
    std::vector<std::vector<std::size_t>> z(docs.size());

    Rng rng(params.seed);
    for (std::size_t d = 0; d < docs.size(); ++d) {
        z[d].resize(words[d].size());
        for (std::size_t i = 0; i < words[d].size(); ++i) {
            const auto k = static_cast<std::size_t>(rng.below(k_topics));
            z[d][i] = k;
            ++m.topic_word[k * v + words[d][i]];
            ++m.topic_total[k];
            ++m.doc_topic[d * k_topics + k];
        }
    }

    const double vbeta = static_cast<double>(v) * m.beta;
    std::vector<double> cdf(k_topics);
    for (std::size_t it = 0; it < params.iterations; ++it) {
        for (std::size_t d = 0; d < docs.size(); ++d) {
            std::size_t* dt = &m.doc_topic[d * k_topics];
            for (std::size_t i = 0; i < words[d].size(); ++i) {
                const std::size_t w = words[d][i];
                const std::size_t old = z[d][i];
                --m.topic_word[old * v + w];
                --m.topic_total[old];
                --dt[old];

                double acc = 0.0;
                for (std::size_t k = 0; k < k_topics; ++k) {
                    acc += (static_cast<double>(dt[k]) + m.alpha) *
                           (static_cast<double>(m.topic_word[k * v + w]) + m.beta) /
                           (static_cast<double>(m.topic_total[k]) + vbeta);
                    cdf[k] = acc;
                }
                const double u = rng.uniform() * acc;
                auto pos = std::upper_bound(cdf.begin(), cdf.end(), u);
                if (pos == cdf.end()) --pos;
                const auto fresh = static_cast<std::size_t>(pos - cdf.begin());

                z[d][i] = fresh;
                ++m.topic_word[fresh * v + w];
                ++m.topic_total[fresh];
                ++dt[fresh];
            }
        }
    }
    return m;
}

inline LdaModel fit_lda(const std::vector<TokenList>& docs, std::size_t topics, std::optional<double> alpha,
                        double beta, std::size_t iterations, std::uint64_t seed) {
    LdaParams p;
    p.topics = topics;
    p.alpha = alpha;
    p.beta = beta;
    p.iterations = iterations;
    p.seed = seed;
    return fit_lda(docs, p);
}

/** \brief The W most probable words of a topic under (count + beta) smoothing;
 *  ties go to the lexicographically smaller word.
 */
inline std::vector<std::string> top_words(const LdaModel& model, std::size_t topic, std::size_t w) {
    if (topic >= model.topics) throw DomainError("top_words: topic index out of range");
    if (w < 1) throw DomainError("top_words: W must be >= 1");
    const std::size_t v = model.vocabulary.size();
    if (w > v) {
        diag::warn("top_words: requested " + std::to_string(w) + " words but the vocabulary has " +
                   std::to_string(v) + "; returning the full ordering");
        w = v;
    }
    // Within one topic the smoothed probability is monotone in the raw count.
    std::vector<std::size_t> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model.count(topic, a) > model.count(topic, b);
    });
    std::vector<std::string> out;
    out.reserve(w);
    for (std::size_t i = 0; i < w; ++i) out.push_back(model.vocabulary.word(order[i]));
    return out;
}

/** \brief The query document Q: topic-major concatenation of top words. */
struct QueryDocument {
    TokenList tokens;
    std::size_t topics = 0;
    std::size_t words_per_topic = 0;
    std::uint64_t seed = 0;
    std::string scope;            ///< "cluster" or "dataset"
    std::size_t duplicates = 0;   ///< tokens already present earlier in the query
};

inline QueryDocument build_query(const LdaModel& model, std::size_t topics, std::size_t words_per_topic) {
    if (topics > model.topics) throw DomainError("build_query: model has fewer topics than requested");
    QueryDocument q;
    q.topics = topics;
    q.words_per_topic = words_per_topic;
    q.seed = model.seed;
    for (std::size_t t = 0; t < topics; ++t) {
        for (auto& word : top_words(model, t, words_per_topic)) {
            if (std::find(q.tokens.begin(), q.tokens.end(), word) != q.tokens.end()) ++q.duplicates;
            q.tokens.push_back(std::move(word));
        }
    }
    return q;
}

}  // namespace mmrfuse
