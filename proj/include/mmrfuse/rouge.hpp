#pragma once

/** \file rouge.hpp
 *  \brief ROUGE-1/2/L precision, recall and F-measure.
 *
 * Tokens are lowercased with punctuation stripped; no stemming and no
 * stopword removal, independent of how similarity text is preprocessed.
 * N-gram overlap is clipped multiset overlap. ROUGE-L is the summary-level
 * union-LCS variant over sentences.
 */

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/fused.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/types.hpp"

namespace mmrfuse {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const RougeScore&) const = default;
};

inline RougeScore make_rouge_score(double precision, double recall) {
    RougeScore s{precision, recall, 0.0};
    if (precision + recall > 0.0) s.f1 = 2.0 * precision * recall / (precision + recall);
    return s;
}

inline TokenList rouge_tokens(std::string_view text) { return tokenize(text, true, true); }

namespace detail {

inline std::map<std::vector<std::string_view>, std::size_t> ngram_counts(const TokenList& tokens, std::size_t n) {
    std::map<std::vector<std::string_view>, std::size_t> out;
    if (tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        std::vector<std::string_view> g;
        g.reserve(n);
        for (std::size_t k = 0; k < n; ++k) g.emplace_back(tokens[i + k]);
        ++out[std::move(g)];
    }
    return out;
}

/// LCS table for two token sequences; (|a|+1) x (|b|+1), row-major.
inline std::vector<std::size_t> lcs_table(std::span<const std::string> a, std::span<const std::string> b) {
    const std::size_t cols = b.size() + 1;
    std::vector<std::size_t> t((a.size() + 1) * cols, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            t[i * cols + j] = a[i - 1] == b[j - 1] ? t[(i - 1) * cols + j - 1] + 1
                                                   : std::max(t[(i - 1) * cols + j], t[i * cols + j - 1]);
        }
    }
    return t;
}

/// Positions in \p a belonging to one LCS with \p b.
inline std::vector<std::size_t> lcs_positions(std::span<const std::string> a, std::span<const std::string> b) {
    const auto t = lcs_table(a, b);
    const std::size_t cols = b.size() + 1;
    std::vector<std::size_t> out;
    std::size_t i = a.size();
    std::size_t j = b.size();
    while (i > 0 && j > 0) {
        if (a[i - 1] == b[j - 1]) {
            out.push_back(i - 1);
            --i;
            --j;
        } else if (t[(i - 1) * cols + j] >= t[i * cols + j - 1]) {
            --i;
        } else {
            --j;
        }
    }
    std::reverse(out.begin(), out.end());
    return out;
}

inline std::vector<TokenList> sentence_tokens(std::string_view text) {
    std::vector<TokenList> out;
    for (const auto& s : split_sentences(text)) {
        auto toks = rouge_tokens(s.text);
        if (!toks.empty()) out.push_back(std::move(toks));
    }
    return out;
}

inline void require_reference(std::string_view reference) {
    if (rouge_tokens(reference).empty()) throw DomainError("ROUGE: reference summary is empty");
}

}  // namespace detail

/// Length of the longest common subsequence of two token sequences.
inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
    return detail::lcs_table(a, b).back();
}

inline RougeScore rouge_n(std::string_view candidate, std::string_view reference, std::size_t n) {
    if (n < 1) throw DomainError("rouge_n: n must be >= 1");
    detail::require_reference(reference);
    const auto cand = rouge_tokens(candidate);
    const auto ref = rouge_tokens(reference);
    if (cand.size() < n || ref.size() < n) return {};
    const auto cc = detail::ngram_counts(cand, n);
    const auto rc = detail::ngram_counts(ref, n);
    std::size_t overlap = 0;
    for (const auto& [g, c] : cc) {
        auto it = rc.find(g);
        if (it != rc.end()) overlap += std::min(c, it->second);
    }
    const double p = static_cast<double>(overlap) / static_cast<double>(cand.size() - n + 1);
    const double r = static_cast<double>(overlap) / static_cast<double>(ref.size() - n + 1);
    return make_rouge_score(p, r);
}

/** \brief Summary-level ROUGE-L.
 *
 * For every reference sentence the LCS positions against each candidate
 * sentence are unioned; union hits are clipped by the remaining token
 * counts on both sides.
 */
inline RougeScore rouge_l(std::string_view candidate, std::string_view reference) {
    detail::require_reference(reference);
    const auto cand_sents = detail::sentence_tokens(candidate);
    const auto ref_sents = detail::sentence_tokens(reference);
    std::unordered_map<std::string, std::size_t> cand_left;
    std::unordered_map<std::string, std::size_t> ref_left;
    std::size_t cand_total = 0;
    std::size_t ref_total = 0;
    for (const auto& s : cand_sents) {
        for (const auto& t : s) ++cand_left[t];
        cand_total += s.size();
    }
    for (const auto& s : ref_sents) {
        for (const auto& t : s) ++ref_left[t];
        ref_total += s.size();
    }
    if (cand_total == 0) return {};

    std::size_t hits = 0;
    for (const auto& r : ref_sents) {
        std::vector<char> in_union(r.size(), 0);
        for (const auto& c : cand_sents) {
            for (auto pos : detail::lcs_positions(r, c)) in_union[pos] = 1;
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (!in_union[i]) continue;
            auto& rl = ref_left[r[i]];
            auto it = cand_left.find(r[i]);
            if (rl > 0 && it != cand_left.end() && it->second > 0) {
                ++hits;
                --rl;
                --it->second;
            }
        }
    }
    return make_rouge_score(static_cast<double>(hits) / static_cast<double>(cand_total),
                            static_cast<double>(hits) / static_cast<double>(ref_total));
}

struct ClusterRouge {
    std::string cluster_id;
    RougeScore rouge1;
    RougeScore rouge2;
    RougeScore rougeL;

    bool operator==(const ClusterRouge&) const = default;
};

inline ClusterRouge score_summary(std::string cluster_id, std::string_view candidate, std::string_view reference) {
    return {std::move(cluster_id), rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2),
            rouge_l(candidate, reference)};
}

/** \brief Per-cluster scores and their arithmetic means (precision, recall and F separately). */
struct RougeReport {
    std::vector<ClusterRouge> per_cluster;
    RougeScore mean_rouge1;
    RougeScore mean_rouge2;
    RougeScore mean_rougeL;

    bool operator==(const RougeReport&) const = default;
};

inline RougeReport aggregate_rouge(std::vector<ClusterRouge> per_cluster) {
    RougeReport r;
    r.per_cluster = std::move(per_cluster);
    if (r.per_cluster.empty()) return r;
    auto acc = [](RougeScore& into, const RougeScore& s) {
        into.precision += s.precision;
        into.recall += s.recall;
        into.f1 += s.f1;
    };
    for (const auto& c : r.per_cluster) {
        acc(r.mean_rouge1, c.rouge1);
        acc(r.mean_rouge2, c.rouge2);
        acc(r.mean_rougeL, c.rougeL);
    }
    const double n = static_cast<double>(r.per_cluster.size());
    for (auto* s : {&r.mean_rouge1, &r.mean_rouge2, &r.mean_rougeL}) {
        s->precision /= n;
        s->recall /= n;
        s->f1 /= n;
    }
    return r;
}

/** \brief Scores fused summaries against cluster references.
 *
 * Clusters without a reference (or without a fused summary) are skipped
 * with a warning. Throws DomainError when nothing can be evaluated.
 */
inline RougeReport evaluate_corpus(std::span<const FusedSummary> fused, std::span<const Cluster> clusters) {
    std::unordered_map<std::string_view, const Cluster*> by_id;
    for (const auto& c : clusters) by_id.emplace(c.cluster_id, &c);
    std::vector<ClusterRouge> scores;
    for (const auto& f : fused) {
        auto it = by_id.find(f.cluster_id);
        if (it == by_id.end()) {
            diag::warn("evaluate: fused summary for unknown cluster '" + f.cluster_id + "' skipped");
            continue;
        }
        const auto& ref = it->second->reference_summary;
        if (!ref || rouge_tokens(*ref).empty()) {
            diag::warn("evaluate: cluster '" + f.cluster_id + "' has no reference summary; skipped");
            continue;
        }
        scores.push_back(score_summary(f.cluster_id, f.text, *ref));
    }
    if (scores.empty()) throw DomainError("evaluate: no cluster has both a fused summary and a reference");
    return aggregate_rouge(std::move(scores));
}

/// Mean of the three corpus F1 means (the default tuning objective).
inline double mean_f1(const RougeReport& r) {
    return (r.mean_rouge1.f1 + r.mean_rouge2.f1 + r.mean_rougeL.f1) / 3.0;
}

}  // namespace mmrfuse
