#pragma once

// Synthetic corpora shared by the unit tests and the acceptance program.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mmrfuse/lda.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/types.hpp"

namespace fixtures {

/// Planted vocabulary word `i` of topic `t` ("sun3", "ice7", ...).
inline std::string planted_word(std::size_t t, std::size_t i) {
    static const char* const kStems[] = {"sun", "ice", "oak", "gem"};
    return kStems[t] + std::to_string(i);
}

/// `docs` documents of `tokens` tokens; document d draws uniformly from the
/// `words`-word vocabulary of topic d % topics.
inline std::vector<mmrfuse::TokenList> planted_corpus(std::uint64_t seed, std::size_t topics = 2,
                                                      std::size_t docs = 200, std::size_t tokens = 20,
                                                      std::size_t words = 10) {
    std::mt19937_64 rng(seed);
    std::vector<mmrfuse::TokenList> out(docs);
    for (std::size_t d = 0; d < docs; ++d) {
        for (std::size_t k = 0; k < tokens; ++k) out[d].push_back(planted_word(d % topics, rng() % words));
    }
    return out;
}

/// Index of the planted topic a word came from, or -1.
inline int planted_topic_of(const std::string& word) {
    static const char* const kStems[] = {"sun", "ice", "oak", "gem"};
    for (int t = 0; t < 4; ++t) {
        if (word.rfind(kStems[t], 0) == 0) return t;
    }
    return -1;
}

/// Planted-topic recovery: every inferred topic's top-5 words come at least
/// 80% from one planted vocabulary, and the topics' top words come from
/// distinct planted vocabularies.
inline bool planted_recovered(const mmrfuse::LdaModel& model) {
    std::vector<int> owners;
    for (std::size_t t = 0; t < model.topics; ++t) {
        const auto top = mmrfuse::top_words(model, t, 5);
        int counts[4] = {0, 0, 0, 0};
        for (const auto& w : top) {
            const int p = planted_topic_of(w);
            if (p >= 0) ++counts[p];
        }
        int best = 0;
        for (int p = 1; p < 4; ++p) {
            if (counts[p] > counts[best]) best = p;
        }
        if (counts[best] * 5 < 4 * static_cast<int>(top.size())) return false;
        if (planted_topic_of(top.front()) != best) return false;
        owners.push_back(best);
    }
    for (std::size_t i = 0; i < owners.size(); ++i) {
        for (std::size_t j = i + 1; j < owners.size(); ++j) {
            if (owners[i] == owners[j]) return false;
        }
    }
    return true;
}

/// Word pool for synthetic news-like sentences. Sentences are built from
/// lowercase content words, capitalized, and closed with a period.
inline std::string synthetic_sentence(std::mt19937_64& rng, const std::vector<std::string>& pool,
                                      std::size_t len) {
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) s.push_back(' ');
        s += pool[rng() % pool.size()];
    }
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    s.push_back('.');
    return s;
}

inline std::vector<std::string> topic_pool(std::size_t topic, std::size_t size = 12) {
    std::vector<std::string> pool;
    for (std::size_t i = 0; i < size; ++i) pool.push_back("t" + std::to_string(topic) + "w" + std::to_string(i));
    return pool;
}

/// A synthetic cluster with its candidates.
struct SyntheticCluster {
    mmrfuse::Cluster cluster;
    std::vector<mmrfuse::CandidateSummary> candidates;
};

/// Multi-News-shaped cluster: `docs` documents of several sentences, an MDS
/// candidate from "best" (pretrained), an MDS candidate from "other", and one
/// SDS candidate per document from "sds". Every sentence is distinct.
inline SyntheticCluster multinews_cluster(std::uint64_t seed, std::size_t index, std::size_t docs = 3) {
    std::mt19937_64 rng(seed * 1000003ULL + index);
    const auto pool = topic_pool(index % 7);
    const std::string id = "mn" + std::to_string(index);
    SyntheticCluster out;
    out.cluster.cluster_id = id;
    std::size_t serial = 0;
    auto unique_sentence = [&] {
        auto s = synthetic_sentence(rng, pool, 5 + rng() % 5);
        s.insert(s.size() - 1, " s" + std::to_string(serial++));
        return s;
    };
    for (std::size_t d = 0; d < docs; ++d) {
        std::string text;
        const auto count = 3 + rng() % 4;
        for (std::size_t k = 0; k < count; ++k) text += (k ? " " : "") + unique_sentence();
        out.cluster.documents.push_back({id + "-d" + std::to_string(d), text});
    }
    std::string ref;
    for (int k = 0; k < 3; ++k) ref += (k ? " " : "") + unique_sentence();
    out.cluster.reference_summary = ref;

    auto text_of = [&](std::size_t n) {
        std::string t;
        for (std::size_t k = 0; k < n; ++k) t += (k ? " " : "") + unique_sentence();
        return t;
    };
    out.candidates.push_back({id, "best", mmrfuse::Scope::Mds, std::nullopt, text_of(1 + rng() % 8), true});
    out.candidates.push_back({id, "other", mmrfuse::Scope::Mds, std::nullopt, text_of(3 + rng() % 5), false});
    for (const auto& d : out.cluster.documents) {
        out.candidates.push_back({id, "sds", mmrfuse::Scope::Sds, d.doc_id, text_of(1 + rng() % 3), false});
    }
    return out;
}

/// WCEP-shaped cluster: `docs` one-sentence documents; "best" and "alt"
/// provide one- to three-sentence SDS summaries for every document.
inline SyntheticCluster wcep_cluster(std::uint64_t seed, std::size_t index, std::size_t docs = 40) {
    std::mt19937_64 rng(seed * 7919ULL + index);
    const auto pool = topic_pool(index % 5, 16);
    const auto noise = topic_pool(100 + index % 3, 16);
    const std::string id = "wcep" + std::to_string(index);
    SyntheticCluster out;
    out.cluster.cluster_id = id;
    std::size_t serial = 0;
    auto unique_sentence = [&](const std::vector<std::string>& p) {
        auto s = synthetic_sentence(rng, p, 6 + rng() % 6);
        s.insert(s.size() - 1, " s" + std::to_string(serial++));
        return s;
    };
    for (std::size_t d = 0; d < docs; ++d) {
        out.cluster.documents.push_back({id + "-d" + std::to_string(d), unique_sentence(d % 4 == 3 ? noise : pool)});
    }
    out.cluster.reference_summary = unique_sentence(pool) + " " + unique_sentence(pool);
    for (const char* model : {"best", "alt"}) {
        for (const auto& d : out.cluster.documents) {
            std::string t;
            const auto n = 1 + rng() % 3;
            for (std::size_t k = 0; k < n; ++k) t += (k ? " " : "") + unique_sentence(pool);
            out.candidates.push_back({id, model, mmrfuse::Scope::Sds, d.doc_id, t, false});
        }
    }
    return out;
}

}  // namespace fixtures
