#pragma once

/** \file wmd.hpp
 *  \brief Word Mover's Distance over word embeddings.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/transport.hpp"
#include "mmrfuse/vectors.hpp"

namespace mmrfuse {

enum class WmdMode { Exact, Relaxed };

/// Largest support (per side) solved exactly; larger problems use the relaxed bound.
inline constexpr std::size_t kWmdExactSupportLimit = 64;

/** \brief Normalized bag of words restricted to words that have vectors. */
struct NbowDistribution {
    std::vector<std::string> words;  ///< distinct, lexicographic
    std::vector<double> mass;        ///< positive, sums to 1
};

inline NbowDistribution make_nbow(const TokenList& tokens, const WordVectors& wv) {
    std::map<std::string, double> counts;
    double total = 0.0;
    for (const auto& t : tokens) {
        if (wv.contains(t)) {
            counts[t] += 1.0;
            total += 1.0;
        }
    }
    NbowDistribution out;
    for (const auto& [w, c] : counts) {
        out.words.push_back(w);
        out.mass.push_back(c / total);
    }
    return out;
}

inline double euclidean(const DenseVector& a, const DenseVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline CostMatrix ground_distances(const NbowDistribution& a, const NbowDistribution& b, const WordVectors& wv) {
    CostMatrix c(a.words.size(), b.words.size());
    for (std::size_t i = 0; i < a.words.size(); ++i) {
        const auto& va = *wv.find(a.words[i]);
        for (std::size_t j = 0; j < b.words.size(); ++j) {
            c(i, j) = a.words[i] == b.words[j] ? 0.0 : euclidean(va, *wv.find(b.words[j]));
        }
    }
    return c;
}

/** \brief Relaxed lower bound: the larger of the two one-sided nearest-neighbour costs. */
inline double relaxed_transport_cost(const NbowDistribution& a, const NbowDistribution& b, const CostMatrix& c) {
    double ab = 0.0;
    for (std::size_t i = 0; i < a.mass.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.mass.size(); ++j) best = std::min(best, c(i, j));
        ab += a.mass[i] * best;
    }
    double ba = 0.0;
    for (std::size_t j = 0; j < b.mass.size(); ++j) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a.mass.size(); ++i) best = std::min(best, c(i, j));
        ba += b.mass[j] * best;
    }
    return std::max(ab, ba);
}

/** \brief WMD between two token lists.
 *
 * Exact mode solves the transportation problem under Euclidean ground
 * distance; supports above kWmdExactSupportLimit fall back to the relaxed
 * bound. Throws MeasureUndefined when either side has no word with a vector.
 */
inline double wmd_distance(const TokenList& a, const TokenList& b, const WordVectors& wv,
                           WmdMode mode = WmdMode::Exact) {
    const auto na = make_nbow(a, wv);
    const auto nb = make_nbow(b, wv);
    if (na.words.empty() || nb.words.empty()) {
        throw MeasureUndefined("wmd_distance: a document has no in-vocabulary words");
    }
    if (na.words == nb.words && na.mass == nb.mass) return 0.0;
    const auto cost = ground_distances(na, nb, wv);
    const bool exact = mode == WmdMode::Exact && na.words.size() <= kWmdExactSupportLimit &&
                       nb.words.size() <= kWmdExactSupportLimit;
    if (!exact) return relaxed_transport_cost(na, nb, cost);
    return std::max(0.0, solve_transport(na.mass, nb.mass, cost).cost);
}

/// 1 / (1 + distance), or 0 when the distance is undefined.
inline double wmd_similarity(const TokenList& a, const TokenList& b, const WordVectors& wv,
                             WmdMode mode = WmdMode::Exact, bool* undefined = nullptr) {
    try {
        const double d = wmd_distance(a, b, wv, mode);
        if (undefined) *undefined = false;
        return 1.0 / (1.0 + d);
    } catch (const MeasureUndefined&) {
        if (undefined) *undefined = true;
        return 0.0;
    }
}

}  // namespace mmrfuse
