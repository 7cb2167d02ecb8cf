#pragma once

/** \file mmr.hpp
 *  \brief Maximal Marginal Relevance selection and MMR-based reduction.
 *
 * Each greedy step picks the unselected candidate D_i maximizing
 *
 *     lambda * Sim1(D_i, Q) - (1 - lambda) * max_{D_j in S} Sim2(D_i, D_j)
 *
 * where S holds everything selected so far (plus any preselected items).
 * While S is empty only the relevance term is scored. Ties go to the
 * lowest candidate index.
 *
 * The functions here are generic over the similarity callables so the same
 * loop serves sentences, summaries and whole documents.
 */

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmrfuse/diagnostics.hpp"

namespace mmrfuse {

struct Selection {
    std::size_t index;
    double score;
};

/** \brief Greedy picks in order, plus the untouched candidates in index order. */
struct SelectionResult {
    std::vector<Selection> selected;
    std::vector<std::size_t> remaining;

    std::vector<std::size_t> indices() const {
        std::vector<std::size_t> out;
        out.reserve(selected.size());
        for (const auto& s : selected) out.push_back(s.index);
        return out;
    }
};

template <class F>
concept RelevanceFn = std::invocable<F&, std::size_t> &&
                      std::convertible_to<std::invoke_result_t<F&, std::size_t>, double>;

template <class F>
concept PairSimilarityFn = std::invocable<F&, std::size_t, std::size_t> &&
                           std::convertible_to<std::invoke_result_t<F&, std::size_t, std::size_t>, double>;

/** \brief Greedy MMR over candidate indices [0, count).
 *
 * \p relevance(i) is Sim1(D_i, Q); \p diversity(i, j) is Sim2(D_i, D_j).
 * Preselected indices seed S but are never emitted. Sim1 is evaluated once
 * per candidate and each Sim2 pair at most once.
 */
template <RelevanceFn Rel, PairSimilarityFn Div>
SelectionResult mmr_select(std::size_t count, std::size_t m, double lambda, Rel&& relevance, Div&& diversity,
                           std::span<const std::size_t> preselected = {}) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("mmr_select: lambda must lie in [0, 1]");
    if (m < 1) throw DomainError("mmr_select: m must be >= 1");

    std::vector<char> in_s(count, 0);
    for (auto p : preselected) {
        if (p >= count) throw DomainError("mmr_select: preselected index out of range");
        if (in_s[p]) throw DomainError("mmr_select: duplicate preselected index");
        in_s[p] = 1;
    }
    const std::size_t available = count - preselected.size();
    if (m > available) {
        throw DomainError("mmr_select: requested " + std::to_string(m) + " selections but only " +
                          std::to_string(available) + " candidates are available");
    }

    constexpr double kNoNeighbour = -std::numeric_limits<double>::infinity();
    std::vector<double> rel(count, 0.0);
    std::vector<double> max_sim(count, kNoNeighbour);
    for (std::size_t i = 0; i < count; ++i) {
        if (!in_s[i]) rel[i] = static_cast<double>(relevance(i));
    }
    auto absorb = [&](std::size_t j) {
        for (std::size_t i = 0; i < count; ++i) {
            if (!in_s[i]) max_sim[i] = std::max(max_sim[i], static_cast<double>(diversity(i, j)));
        }
    };
    for (auto p : preselected) absorb(p);
    bool s_empty = preselected.empty();

    SelectionResult out;
    out.selected.reserve(m);
    for (std::size_t step = 0; step < m; ++step) {
        std::size_t best = count;
        double best_score = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            if (in_s[i]) continue;
            const double score = s_empty ? lambda * rel[i] : lambda * rel[i] - (1.0 - lambda) * max_sim[i];
            if (best == count || score > best_score) {
                best = i;
                best_score = score;
            }
        }
        in_s[best] = 1;
        out.selected.push_back({best, best_score});
        s_empty = false;
        if (step + 1 < m) absorb(best);
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (!in_s[i]) out.remaining.push_back(i);
    }
    return out;
}

/** \brief Number of items removed from a d-item summary: max(1, ceil(d * R)). */
inline std::size_t reduction_count(std::size_t d, double reduction) {
    if (!(reduction > 0.0 && reduction <= 1.0)) throw DomainError("reduction percentage must lie in (0, 1]");
    // Guard against d * R landing a hair above an integer through rounding.
    const double raw = static_cast<double>(d) * reduction;
    const auto r = static_cast<std::size_t>(std::ceil(raw - 1e-9));
    return std::max<std::size_t>(1, r);
}

/** \brief Items kept after reduction: max(1, d - r). */
inline std::size_t reduction_keep_count(std::size_t d, double reduction) {
    const std::size_t r = reduction_count(d, reduction);
    return d > r ? d - r : 1;
}

/** \brief MMR reduction of a d-item summary.
 *
 * Selects max(1, d - r) items with mmr_select and returns their indices in
 * original order.
 */
template <RelevanceFn Rel, PairSimilarityFn Div>
std::vector<std::size_t> mmr_reduce(std::size_t d, double reduction, double lambda, Rel&& relevance,
                                    Div&& diversity) {
    if (d < 1) throw DomainError("mmr_reduce: empty summary");
    const std::size_t keep = reduction_keep_count(d, reduction);
    auto picked = mmr_select(d, keep, lambda, relevance, diversity).indices();
    std::sort(picked.begin(), picked.end());
    return picked;
}

}  // namespace mmrfuse
