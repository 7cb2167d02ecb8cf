#pragma once

/** \file pipeline.hpp
 *  \brief Per-cluster fusion of candidate summaries and the corpus driver.
 *
 * A cluster run goes: LDA query -> k-document pre-selection -> per-model
 * output (concatenated or kept as separate summaries, then MMR-reduced for
 * models not pretrained on the dataset) -> best-model anchor -> anchor plus
 * l = max(1, floor(n * p)) MMR-selected sentences from the pooled outputs.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mmrfuse/config.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/fused.hpp"
#include "mmrfuse/lda.hpp"
#include "mmrfuse/mmr.hpp"
#include "mmrfuse/random.hpp"
#include "mmrfuse/rouge.hpp"
#include "mmrfuse/similarity.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/types.hpp"

namespace mmrfuse {

/** \brief Shared read-only inputs that are not part of the config. */
struct FusionResources {
    const WordVectors* word_vectors = nullptr;        ///< WMD embeddings; DBOW word outputs when null
    const StopwordSet* stopwords = &default_stopwords();
};

/// One summary-sized unit of a model's output (a concatenation or a single per-document summary).
struct ModelUnit {
    std::optional<std::string> doc_id;
    std::vector<Sentence> sentences;
};

struct ModelOutput {
    std::string model_id;
    bool pretrained_on_dataset = false;
    std::vector<ModelUnit> units;

    std::size_t sentence_count() const {
        std::size_t n = 0;
        for (const auto& u : units) n += u.sentences.size();
        return n;
    }
};

/** \brief Intermediate results of one fuse_cluster call. */
struct FusionTrace {
    QueryDocument query;
    std::vector<std::string> selected_doc_ids;
    std::vector<ModelOutput> model_outputs;  ///< model_id order
    std::size_t anchor_unit = 0;
    std::vector<Sentence> anchor;
    std::vector<Sentence> pool;
};

/// Number of MMR-appended sentences for an n-sentence anchor: max(1, floor(n * p)).
inline std::size_t appended_count(std::size_t n, double p) {
    const auto raw = static_cast<std::size_t>(std::floor(static_cast<double>(n) * p + 1e-9));
    return std::max<std::size_t>(1, raw);
}

/** \brief LDA over the cluster's documents, T topics, W words each. */
inline QueryDocument cluster_query(const Cluster& cluster, const FusionConfig& config,
                                   const StopwordSet* stopwords = &default_stopwords()) {
    std::vector<TokenList> docs;
    docs.reserve(cluster.documents.size());
    for (const auto& d : cluster.documents) docs.push_back(tokenize(d.text, true, true));
    LdaParams lp;
    lp.topics = config.T;
    lp.alpha = config.lda_alpha;
    lp.beta = config.lda_beta;
    lp.iterations = config.lda_iterations;
    lp.seed = derive_seed(config.seed, "lda", cluster.cluster_id);
    lp.stopwords = stopwords;
    auto q = build_query(fit_lda(docs, lp), config.T, config.W);
    q.scope = "cluster";
    return q;
}

/** \brief LDA over every document of every cluster. */
inline QueryDocument dataset_query(std::span<const Cluster> clusters, const FusionConfig& config,
                                   const StopwordSet* stopwords = &default_stopwords()) {
    std::vector<TokenList> docs;
    for (const auto& c : clusters) {
        for (const auto& d : c.documents) docs.push_back(tokenize(d.text, true, true));
    }
    LdaParams lp;
    lp.topics = config.T;
    lp.alpha = config.lda_alpha;
    lp.beta = config.lda_beta;
    lp.iterations = config.lda_iterations;
    lp.seed = derive_seed(config.seed, "lda", "<dataset>");
    lp.stopwords = stopwords;
    auto q = build_query(fit_lda(docs, lp), config.T, config.W);
    q.scope = "dataset";
    return q;
}

inline SimilarityOptions similarity_options(const FusionConfig& config, const FusionResources& res) {
    SimilarityOptions o;
    o.stopwords = res.stopwords;
    o.dbow.dimension = config.dbow_dimension;
    o.dbow.epochs = config.dbow_epochs;
    o.dbow.negatives = config.dbow_negatives;
    o.word_vectors = res.word_vectors;
    return o;
}

/** \brief Similarity context over every sentence of the cluster's documents and
 *  candidates, plus the query.
 */
inline SimilarityContext make_cluster_context(const Cluster& cluster, std::span<const CandidateSummary> candidates,
                                              const QueryDocument& query, const FusionConfig& config,
                                              const FusionResources& res) {
    static const StopwordSet kNone;
    const StopwordSet& stop = res.stopwords ? *res.stopwords : kNone;
    std::vector<TokenList> corpus;
    auto add = [&](std::string_view text) {
        for (const auto& s : split_sentences(text)) corpus.push_back(remove_stopwords(tokenize(s.text), stop));
    };
    for (const auto& d : cluster.documents) add(d.text);
    for (const auto& c : candidates) add(c.text);
    corpus.push_back(remove_stopwords(query.tokens, stop));
    return SimilarityContext(std::move(corpus), similarity_options(config, res),
                             derive_seed(config.seed, "similarity", cluster.cluster_id));
}

/** \brief Indices (in cluster order) of the k documents to summarize.
 *
 * Clusters with at most k documents pass through unchanged; otherwise the
 * k documents are picked by MMR over full document texts.
 */
inline std::vector<std::size_t> select_k_documents(SimilarityContext& ctx, const Cluster& cluster, std::size_t k,
                                                   const TextUnit& query, const MmrParams& params) {
    if (k < 1) throw DomainError("select_k_documents: k must be >= 1");
    std::vector<std::size_t> out(cluster.documents.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    if (cluster.documents.size() <= k) return out;
    std::vector<TextUnit> units;
    units.reserve(cluster.documents.size());
    for (const auto& d : cluster.documents) units.push_back(ctx.unit(d.text));
    out = mmr_select(ctx, units, query, k, params).indices();
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

inline std::vector<TextUnit> sentence_units(SimilarityContext& ctx, const std::vector<Sentence>& sentences) {
    std::vector<TextUnit> u;
    u.reserve(sentences.size());
    for (const auto& s : sentences) u.push_back(ctx.unit(s.text));
    return u;
}

inline std::string unit_text(const ModelUnit& u) {
    std::string out;
    for (const auto& s : u.sentences) {
        if (!out.empty()) out.push_back(' ');
        out += s.text;
    }
    return out;
}

}  // namespace detail

/** \brief Builds one model's output units for a cluster.
 *
 * \p candidates are this model's candidates for the cluster; SDS candidates
 * for documents outside \p selected_docs are ignored. Returns an output with
 * no units when nothing is left.
 */
inline ModelOutput build_model_output(SimilarityContext& ctx, const std::string& model_id,
                                      std::span<const CandidateSummary> candidates, const Cluster& cluster,
                                      std::span<const std::size_t> selected_docs, const FusionConfig& config,
                                      const TextUnit& query) {
    ModelOutput out;
    out.model_id = model_id;

    const CandidateSummary* mds = nullptr;
    std::vector<const CandidateSummary*> sds;  // cluster document order
    for (auto di : selected_docs) {
        const auto& doc_id = cluster.documents[di].doc_id;
        for (const auto& c : candidates) {
            if (c.scope == Scope::Sds && c.doc_id == doc_id) sds.push_back(&c);
        }
    }
    for (const auto& c : candidates) {
        if (c.scope == Scope::Mds) mds = &c;
        if (c.pretrained_on_dataset) out.pretrained_on_dataset = true;
    }

    auto split = [&](const CandidateSummary& c) {
        SentenceSource src;
        src.model_id = model_id;
        src.doc_id = c.doc_id;
        return split_sentences(c.text, src);
    };

    const MmrParams params = config.mmr_params();
    MmrParams reduce_params = params;
    if (auto it = config.reduction_sim_overrides.find(model_id); it != config.reduction_sim_overrides.end()) {
        reduce_params.sim1 = it->second;
        reduce_params.sim2 = it->second;
    }
    auto reduce = [&](ModelUnit& unit, bool pretrained) {
        if (pretrained || unit.sentences.size() < config.reduction_min_sentences) return;
        const auto units = detail::sentence_units(ctx, unit.sentences);
        const auto keep = mmr_reduce(ctx, units, query, config.R, reduce_params);
        std::vector<Sentence> kept;
        kept.reserve(keep.size());
        for (auto i : keep) kept.push_back(std::move(unit.sentences[i]));
        unit.sentences = std::move(kept);
    };

    if (config.mode == FusionMode::Concatenate) {
        const auto cap = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(avg_sentences_per_doc(cluster))));
        if (sds.size() > cap) {
            std::vector<TextUnit> units;
            units.reserve(sds.size());
            for (const auto* c : sds) units.push_back(ctx.unit(c->text));
            auto keep = mmr_select(ctx, units, query, cap, params).indices();
            std::sort(keep.begin(), keep.end());
            std::vector<const CandidateSummary*> chosen;
            for (auto i : keep) chosen.push_back(sds[i]);
            sds = std::move(chosen);
        }
        ModelUnit unit;
        if (mds) {
            for (auto& s : split(*mds)) unit.sentences.push_back(std::move(s));
        }
        for (const auto* c : sds) {
            for (auto& s : split(*c)) unit.sentences.push_back(std::move(s));
        }
        if (unit.sentences.empty()) return out;
        reduce(unit, out.pretrained_on_dataset);
        out.units.push_back(std::move(unit));
    } else {
        std::vector<const CandidateSummary*> all;
        if (mds) all.push_back(mds);
        all.insert(all.end(), sds.begin(), sds.end());
        for (const auto* c : all) {
            ModelUnit unit;
            unit.doc_id = c->doc_id;
            unit.sentences = split(*c);
            if (unit.sentences.empty()) continue;
            reduce(unit, c->pretrained_on_dataset);
            out.units.push_back(std::move(unit));
        }
    }
    return out;
}

/** \brief Index of the anchor unit within the best model's output.
 *
 * Concatenate mode has a single unit. Select mode takes the unit most
 * similar to the query under sim0, i.e. MMR with one pick and lambda = 1.
 */
inline std::size_t pick_best_anchor(SimilarityContext& ctx, const ModelOutput& best, FusionMode mode,
                                    const TextUnit& query, Measure sim0) {
    if (best.units.empty()) throw DomainError("pick_best_anchor: best model produced no output");
    if (mode == FusionMode::Concatenate || best.units.size() == 1) return 0;
    std::vector<TextUnit> units;
    units.reserve(best.units.size());
    for (const auto& u : best.units) units.push_back(ctx.unit(detail::unit_text(u)));
    return mmr_select(ctx, units, query, 1, MmrParams{1.0, sim0, sim0}).selected.front().index;
}

/** \brief Anchor followed by l MMR picks from the pool.
 *
 * The anchor seeds S. Pool sentences whose normalized text equals an anchor
 * sentence (or an earlier pool sentence) are dropped first. When fewer than
 * l distinct sentences remain, all are appended and a warning is recorded.
 */
inline FusedSummary assemble_final(SimilarityContext& ctx, const std::string& cluster_id,
                                   const std::vector<Sentence>& anchor, const std::vector<Sentence>& pool,
                                   const TextUnit& query, const FusionConfig& config,
                                   std::vector<Sentence>* filtered_pool = nullptr) {
    FusedSummary out;
    out.cluster_id = cluster_id;
    out.n = anchor.size();

    std::unordered_set<std::string> seen;
    for (const auto& s : anchor) seen.insert(normalize_text(s.text));
    std::vector<Sentence> distinct;
    for (const auto& s : pool) {
        if (seen.insert(normalize_text(s.text)).second) distinct.push_back(s);
    }

    std::size_t l = appended_count(out.n, config.p);
    if (distinct.size() < l) {
        out.warnings.push_back("cluster '" + cluster_id + "': pool has " + std::to_string(distinct.size()) +
                               " distinct sentences, fewer than l = " + std::to_string(l) + "; l truncated");
        l = distinct.size();
    }
    out.l = l;

    for (std::size_t i = 0; i < anchor.size(); ++i) {
        const auto& s = anchor[i];
        out.sentences.push_back({s.text, s.source.model_id, s.source.doc_id, s.source.ordinal, i, std::nullopt});
    }
    if (l > 0) {
        std::vector<TextUnit> units = detail::sentence_units(ctx, anchor);
        for (const auto& s : distinct) units.push_back(ctx.unit(s.text));
        std::vector<std::size_t> pre(anchor.size());
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] = i;
        const auto picks = mmr_select(ctx, units, query, l, config.mmr_params(), pre);
        for (const auto& pick : picks.selected) {
            const auto& s = distinct[pick.index - anchor.size()];
            out.sentences.push_back(
                {s.text, s.source.model_id, s.source.doc_id, s.source.ordinal, out.sentences.size(), pick.score});
        }
    }
    for (const auto& s : out.sentences) {
        if (!out.text.empty()) out.text.push_back(' ');
        out.text += s.text;
    }
    if (filtered_pool) *filtered_pool = std::move(distinct);
    return out;
}

/** \brief Fuses one cluster's candidates into a single summary.
 *
 * \p candidates may contain other clusters' records; only this cluster's
 * are used. \p shared_query replaces the per-cluster LDA query (dataset scope).
 */
inline FusedSummary fuse_cluster(const Cluster& cluster, std::span<const CandidateSummary> candidates,
                                 const FusionConfig& config, const FusionResources& res = {},
                                 FusionTrace* trace = nullptr, const QueryDocument* shared_query = nullptr) {
    config.validate();
    std::vector<CandidateSummary> mine;
    for (const auto& c : candidates) {
        if (c.cluster_id == cluster.cluster_id) mine.push_back(c);
    }
    const bool has_best = std::any_of(mine.begin(), mine.end(),
                                      [&](const CandidateSummary& c) { return c.model_id == config.best_model_id; });
    if (!has_best) {
        throw ConfigError("cluster '" + cluster.cluster_id + "': no candidates from best model '" +
                          config.best_model_id + "'");
    }

    const QueryDocument query = shared_query ? *shared_query : cluster_query(cluster, config, res.stopwords);
    SimilarityContext ctx = make_cluster_context(cluster, mine, query, config, res);
    const TextUnit q = ctx.unit(query.tokens);

    const auto selected = select_k_documents(ctx, cluster, config.k, q, config.mmr_params());

    std::map<std::string, std::vector<CandidateSummary>> by_model;
    for (auto& c : mine) by_model[c.model_id].push_back(std::move(c));

    std::vector<ModelOutput> outputs;
    const ModelOutput* best = nullptr;
    for (const auto& [model_id, cands] : by_model) {
        auto o = build_model_output(ctx, model_id, cands, cluster, selected, config, q);
        if (o.units.empty()) continue;
        outputs.push_back(std::move(o));
    }
    for (const auto& o : outputs) {
        if (o.model_id == config.best_model_id) best = &o;
    }
    if (!best) {
        throw ConfigError("cluster '" + cluster.cluster_id + "': best model '" + config.best_model_id +
                          "' has no output for the selected documents");
    }

    const std::size_t anchor_unit = pick_best_anchor(ctx, *best, config.mode, q, config.sim0);
    const auto& anchor = best->units[anchor_unit].sentences;
    std::vector<Sentence> pool;
    for (const auto& o : outputs) {
        for (const auto& u : o.units) pool.insert(pool.end(), u.sentences.begin(), u.sentences.end());
    }

    std::vector<Sentence> filtered;
    FusedSummary out = assemble_final(ctx, cluster.cluster_id, anchor, pool, q, config, &filtered);
    if (ctx.undefined_wmd_pairs() > 0) {
        out.warnings.push_back("cluster '" + cluster.cluster_id + "': " + std::to_string(ctx.undefined_wmd_pairs()) +
                               " WMD pairs had no in-vocabulary words (similarity 0)");
    }

    if (trace) {
        trace->query = query;
        trace->selected_doc_ids.clear();
        for (auto i : selected) trace->selected_doc_ids.push_back(cluster.documents[i].doc_id);
        trace->anchor_unit = anchor_unit;
        trace->anchor = anchor;
        trace->pool = std::move(filtered);
        trace->model_outputs = std::move(outputs);
    }
    return out;
}

struct ClusterError {
    std::string cluster_id;
    std::string message;

    bool operator==(const ClusterError&) const = default;
};

/** \brief Everything one corpus run produced. */
struct RunRecord {
    FusionConfig config;
    std::uint64_t seed = 1;
    std::size_t cluster_count = 0;
    std::vector<FusedSummary> fused;      ///< input cluster order
    std::vector<ClusterError> errors;     ///< input cluster order
    std::optional<RougeReport> rouge;     ///< clusters with references only
    std::string started_at;
    std::string finished_at;

    bool all_failed() const { return cluster_count > 0 && fused.empty(); }
};

/** \brief Fuses every cluster; per-cluster failures are recorded, not thrown.
 *
 * With jobs > 1 clusters run on worker threads; the record is identical to
 * the single-threaded one.
 */
inline RunRecord fuse_corpus(std::span<const Cluster> clusters, std::span<const CandidateSummary> candidates,
                             const FusionConfig& config, const FusionResources& res = {}, std::size_t jobs = 1) {
    config.validate();
    RunRecord rec;
    rec.config = config;
    rec.seed = config.seed;
    rec.cluster_count = clusters.size();

    std::map<std::string, std::vector<CandidateSummary>> by_cluster;
    for (const auto& c : candidates) by_cluster[c.cluster_id].push_back(c);

    std::optional<QueryDocument> shared;
    if (config.lda_scope == LdaScope::Dataset && !clusters.empty()) shared = dataset_query(clusters, config, res.stopwords);

    struct Slot {
        std::optional<FusedSummary> fused;
        std::optional<std::string> error;
    };
    std::vector<Slot> slots(clusters.size());
    auto run_one = [&](std::size_t i) {
        const auto& cl = clusters[i];
        try {
            auto it = by_cluster.find(cl.cluster_id);
            if (it == by_cluster.end()) throw ConfigError("cluster '" + cl.cluster_id + "': no candidates");
            slots[i].fused = fuse_cluster(cl, it->second, config, res, nullptr, shared ? &*shared : nullptr);
        } catch (const std::exception& e) {
            slots[i].error = e.what();
        }
    };

    jobs = std::max<std::size_t>(1, std::min(jobs, clusters.size()));
    if (jobs == 1) {
        for (std::size_t i = 0; i < clusters.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < clusters.size(); i = next++) run_one(i);
            });
        }
        for (auto& t : workers) t.join();
    }

    for (std::size_t i = 0; i < clusters.size(); ++i) {
        if (slots[i].fused) {
            rec.fused.push_back(std::move(*slots[i].fused));
        } else {
            rec.errors.push_back({clusters[i].cluster_id, *slots[i].error});
        }
    }
    const bool any_reference = std::any_of(clusters.begin(), clusters.end(),
                                           [](const Cluster& c) { return c.reference_summary.has_value(); });
    if (any_reference && !rec.fused.empty()) {
        try {
            rec.rouge = evaluate_corpus(rec.fused, clusters);
        } catch (const DomainError&) {
            rec.rouge.reset();
        }
    }
    return rec;
}

}  // namespace mmrfuse
