#pragma once

/** \file similarity.hpp
 *  \brief Named similarity measures and a per-run context that fits and caches them.
 */

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mmrfuse/dbow.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/mmr.hpp"
#include "mmrfuse/random.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/vectors.hpp"
#include "mmrfuse/wmd.hpp"

namespace mmrfuse {

enum class Measure { TfIdfCosine, DocEmbedCosine, Wmd };

inline constexpr std::array<Measure, 3> kAllMeasures{Measure::TfIdfCosine, Measure::DocEmbedCosine, Measure::Wmd};

inline std::string_view to_string(Measure m) {
    switch (m) {
        case Measure::TfIdfCosine: return "tfidf-cosine";
        case Measure::DocEmbedCosine: return "docembed-cosine";
        case Measure::Wmd: return "wmd";
    }
    return "?";
}

inline std::optional<Measure> parse_measure(std::string_view s) {
    for (auto m : kAllMeasures) {
        if (to_string(m) == s) return m;
    }
    return std::nullopt;
}

inline Measure measure_or_throw(std::string_view s) {
    if (auto m = parse_measure(s)) return *m;
    throw ConfigError("unknown similarity measure '" + std::string(s) +
                      "' (expected tfidf-cosine, docembed-cosine or wmd)");
}

/** \brief Lambda plus the relevance (Sim1) and diversity (Sim2) measures. */
struct MmrParams {
    double lambda = 0.5;
    Measure sim1 = Measure::DocEmbedCosine;
    Measure sim2 = Measure::DocEmbedCosine;
};

struct SimilarityOptions {
    const StopwordSet* stopwords = &default_stopwords();
    DbowParams dbow;                          ///< seed is overwritten by the context seed
    std::size_t infer_epochs = 0;             ///< 0: same as training epochs
    WmdMode wmd_mode = WmdMode::Exact;
    const WordVectors* word_vectors = nullptr;  ///< external vectors for WMD; else DBOW word outputs
};

/** \brief A text in similarity form: normalized tokens and a cache key. */
struct TextUnit {
    TokenList tokens;
    std::string key;
};

/** \brief Fits the similarity models over one run's corpus and caches per-unit
 *  representations. Not thread-safe; use one context per cluster.
 */
class SimilarityContext {
public:
    SimilarityContext(std::vector<TokenList> corpus, SimilarityOptions options, std::uint64_t seed)
        : corpus_(std::move(corpus)), options_(std::move(options)), seed_(seed) {
        if (corpus_.empty()) throw DomainError("SimilarityContext: empty corpus");
    }

    TextUnit unit(std::string_view text) const { return unit(tokenize(text, true, true)); }

    TextUnit unit(TokenList tokens) const {
        static const StopwordSet kNone;
        TextUnit u;
        u.tokens = remove_stopwords(std::move(tokens), options_.stopwords ? *options_.stopwords : kNone);
        u.key = join(u.tokens);
        return u;
    }

    double similarity(Measure m, const TextUnit& a, const TextUnit& b) {
        switch (m) {
            case Measure::TfIdfCosine: return dot(tfidf_of(a), tfidf_of(b));
            case Measure::DocEmbedCosine: return cosine(docvec_of(a), docvec_of(b));
            case Measure::Wmd: return wmd_of(a, b);
        }
        return 0.0;
    }

    const TfIdfModel& tfidf_model() {
        if (!tfidf_) tfidf_ = fit_tfidf(corpus_);
        return *tfidf_;
    }

    const DocEmbedModel& dbow_model() {
        if (!dbow_) {
            DbowParams p = options_.dbow;
            p.seed = derive_seed(seed_, "dbow-train");
            dbow_ = train_dbow(corpus_, p);
        }
        return *dbow_;
    }

    const WordVectors& word_vectors() {
        if (options_.word_vectors) return *options_.word_vectors;
        if (!derived_wv_) derived_wv_ = dbow_model().word_vectors();
        return *derived_wv_;
    }

    std::size_t undefined_wmd_pairs() const noexcept { return undefined_wmd_; }
    std::size_t all_oov_inferences() const noexcept { return all_oov_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    const SparseVector& tfidf_of(const TextUnit& u) {
        auto it = tfidf_cache_.find(u.key);
        if (it == tfidf_cache_.end()) it = tfidf_cache_.emplace(u.key, tfidf_vector(tfidf_model(), u.tokens)).first;
        return it->second;
    }

    const DenseVector& docvec_of(const TextUnit& u) {
        auto it = docvec_cache_.find(u.key);
        if (it == docvec_cache_.end()) {
            const auto& model = dbow_model();
            const std::size_t epochs = options_.infer_epochs ? options_.infer_epochs : model.params().epochs;
            auto inferred = infer_docvec(model, u.tokens, epochs, derive_seed(seed_, "dbow-infer", u.key));
            if (inferred.all_oov) ++all_oov_;
            it = docvec_cache_.emplace(u.key, std::move(inferred.vector)).first;
        }
        return it->second;
    }

    double wmd_of(const TextUnit& a, const TextUnit& b) {
        // Keyed on the ordered pair; exact WMD is symmetric only up to solver rounding.
        std::string key = a.key;
        key.push_back('\x1f');
        key += b.key;
        auto it = wmd_cache_.find(key);
        if (it != wmd_cache_.end()) return it->second;
        bool undefined = false;
        const double s = wmd_similarity(a.tokens, b.tokens, word_vectors(), options_.wmd_mode, &undefined);
        if (undefined) ++undefined_wmd_;
        wmd_cache_.emplace(std::move(key), s);
        return s;
    }

    std::vector<TokenList> corpus_;
    SimilarityOptions options_;
    std::uint64_t seed_;
    std::optional<TfIdfModel> tfidf_;
    std::optional<DocEmbedModel> dbow_;
    std::optional<WordVectors> derived_wv_;
    std::unordered_map<std::string, SparseVector> tfidf_cache_;
    std::unordered_map<std::string, DenseVector> docvec_cache_;
    std::unordered_map<std::string, double> wmd_cache_;
    std::size_t undefined_wmd_ = 0;
    std::size_t all_oov_ = 0;
};

/** \brief mmr_select over text units against a query, measures resolved by the context. */
inline SelectionResult mmr_select(SimilarityContext& ctx, std::span<const TextUnit> units, const TextUnit& query,
                                  std::size_t m, const MmrParams& params,
                                  std::span<const std::size_t> preselected = {}) {
    return mmr_select(
        units.size(), m, params.lambda,
        [&](std::size_t i) { return ctx.similarity(params.sim1, units[i], query); },
        [&](std::size_t i, std::size_t j) { return ctx.similarity(params.sim2, units[i], units[j]); },
        preselected);
}

/** \brief mmr_reduce over text units; returns kept indices in original order. */
inline std::vector<std::size_t> mmr_reduce(SimilarityContext& ctx, std::span<const TextUnit> units,
                                           const TextUnit& query, double reduction, const MmrParams& params) {
    return mmr_reduce(
        units.size(), reduction, params.lambda,
        [&](std::size_t i) { return ctx.similarity(params.sim1, units[i], query); },
        [&](std::size_t i, std::size_t j) { return ctx.similarity(params.sim2, units[i], units[j]); });
}

}  // namespace mmrfuse
