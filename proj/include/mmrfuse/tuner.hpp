#pragma once

/** \file tuner.hpp
 *  \brief Seeded black-box search over fusion parameters.
 *
 * The whole trial list is generated up front from the seed, so evaluating
 * trials concurrently cannot change which configurations are tried or the
 * winner. Ties go to the earliest trial.
 */

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mmrfuse/config.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/random.hpp"
#include "mmrfuse/run_io.hpp"

namespace mmrfuse {

struct RealRange {
    double lo = 0.0;
    double hi = 1.0;
};

struct IntRange {
    std::size_t lo = 1;
    std::size_t hi = 10;
};

/** \brief Ranges for random search, or explicit grids when `grid` is set. */
struct SearchSpace {
    RealRange lambda{0.0, 1.0};
    RealRange p{0.0, 1.0};  ///< sampled from (lo, hi]
    IntRange T{1, 10};
    IntRange W{1, 10};
    std::vector<Measure> sim0{Measure::DocEmbedCosine};
    std::vector<Measure> sim1{Measure::DocEmbedCosine};
    std::vector<Measure> sim2{Measure::DocEmbedCosine};

    struct Grid {
        std::vector<double> lambda;
        std::vector<double> p;
        std::vector<std::size_t> T;
        std::vector<std::size_t> W;
        std::vector<Measure> sim0;
        std::vector<Measure> sim1;
        std::vector<Measure> sim2;
    };
    std::optional<Grid> grid;

    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError("search space: " + m); };
        if (!(lambda.lo >= 0.0 && lambda.lo <= lambda.hi && lambda.hi <= 1.0)) fail("lambda range must lie in [0, 1]");
        if (!(p.lo >= 0.0 && p.lo < p.hi && p.hi <= 1.0)) fail("p range must be a non-empty part of (0, 1]");
        if (T.lo < 1 || T.lo > T.hi) fail("T range must be non-empty and >= 1");
        if (W.lo < 1 || W.lo > W.hi) fail("W range must be non-empty and >= 1");
        if (sim0.empty() || sim1.empty() || sim2.empty()) fail("similarity sets must be non-empty");
    }
};

enum class TrialStatus { Ok, Failed };

struct Trial {
    std::size_t index = 0;
    FusionConfig config;
    double objective = -std::numeric_limits<double>::infinity();
    std::optional<RougeScore> rouge1;
    std::optional<RougeScore> rouge2;
    std::optional<RougeScore> rougeL;
    std::uint64_t seed = 0;
    TrialStatus status = TrialStatus::Ok;
    std::string error;
};

/** \brief What an evaluation returns: the objective plus optional per-metric scores. */
struct Evaluation {
    double objective = 0.0;
    std::optional<RougeReport> report;
};

using Evaluator = std::function<Evaluation(const FusionConfig&)>;

struct SearchResult {
    Trial best;
    std::vector<Trial> log;  ///< trial-index order
    std::vector<std::string> notes;
};

/** \brief i.i.d. samples from \p space, layered over \p base. */
inline std::vector<FusionConfig> sample_configs(const SearchSpace& space, const FusionConfig& base, std::size_t budget,
                                                std::uint64_t seed) {
    space.validate();
    Rng rng(derive_seed(seed, "random-search"));
    std::vector<FusionConfig> out;
    out.reserve(budget);
    for (std::size_t i = 0; i < budget; ++i) {
        FusionConfig c = base;
        c.lambda = rng.uniform(space.lambda.lo, space.lambda.hi);
        // hi - u * (hi - lo) with u in [0, 1) lands in (lo, hi].
        c.p = space.p.hi - rng.uniform() * (space.p.hi - space.p.lo);
        c.T = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(space.T.lo), static_cast<std::int64_t>(space.T.hi)));
        c.W = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(space.W.lo), static_cast<std::int64_t>(space.W.hi)));
        c.sim0 = space.sim0[rng.below(space.sim0.size())];
        c.sim1 = space.sim1[rng.below(space.sim1.size())];
        c.sim2 = space.sim2[rng.below(space.sim2.size())];
        out.push_back(std::move(c));
    }
    return out;
}

/** \brief Every grid point in lexicographic order (lambda slowest, sim2 fastest). */
inline std::vector<FusionConfig> grid_configs(const SearchSpace::Grid& g, const FusionConfig& base) {
    auto or_base = [](auto v, auto fallback) {
        if (v.empty()) v.push_back(fallback);
        return v;
    };
    const auto lambdas = or_base(g.lambda, base.lambda);
    const auto ps = or_base(g.p, base.p);
    const auto ts = or_base(g.T, base.T);
    const auto ws = or_base(g.W, base.W);
    const auto s0 = or_base(g.sim0, base.sim0);
    const auto s1 = or_base(g.sim1, base.sim1);
    const auto s2 = or_base(g.sim2, base.sim2);
    std::vector<FusionConfig> out;
    for (double l : lambdas)
        for (double p : ps)
            for (auto t : ts)
                for (auto w : ws)
                    for (auto a : s0)
                        for (auto b : s1)
                            for (auto c : s2) {
                                FusionConfig cfg = base;
                                cfg.lambda = l;
                                cfg.p = p;
                                cfg.T = t;
                                cfg.W = w;
                                cfg.sim0 = a;
                                cfg.sim1 = b;
                                cfg.sim2 = c;
                                out.push_back(std::move(cfg));
                            }
    return out;
}

/** \brief Evaluates a fixed trial list; failures score -inf and the search continues. */
inline SearchResult run_trials(std::vector<FusionConfig> configs, const Evaluator& evaluate, std::uint64_t seed,
                               std::size_t jobs = 1) {
    if (configs.empty()) throw ConfigError("search: budget must be >= 1");
    SearchResult result;
    result.log.resize(configs.size());
    auto run_one = [&](std::size_t i) {
        Trial& t = result.log[i];
        t.index = i;
        t.config = std::move(configs[i]);
        t.seed = seed;
        try {
            auto ev = evaluate(t.config);
            if (!std::isfinite(ev.objective)) throw DomainError("objective is not finite");
            t.objective = ev.objective;
            if (ev.report) {
                t.rouge1 = ev.report->mean_rouge1;
                t.rouge2 = ev.report->mean_rouge2;
                t.rougeL = ev.report->mean_rougeL;
            }
        } catch (const std::exception& e) {
            t.status = TrialStatus::Failed;
            t.objective = -std::numeric_limits<double>::infinity();
            t.error = e.what();
        }
    };
    jobs = std::max<std::size_t>(1, std::min(jobs, configs.size()));
    if (jobs == 1) {
        for (std::size_t i = 0; i < configs.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (std::size_t i = next++; i < configs.size(); i = next++) run_one(i);
            });
        }
        for (auto& t : workers) t.join();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < result.log.size(); ++i) {
        if (result.log[i].objective > result.log[best].objective) best = i;
    }
    result.best = result.log[best];
    return result;
}

inline SearchResult random_search(const SearchSpace& space, const FusionConfig& base, const Evaluator& evaluate,
                                  std::size_t budget, std::uint64_t seed, std::size_t jobs = 1) {
    if (budget < 1) throw ConfigError("random_search: budget must be >= 1");
    return run_trials(sample_configs(space, base, budget, seed), evaluate, seed, jobs);
}

inline SearchResult grid_search(const SearchSpace::Grid& grid, const FusionConfig& base, const Evaluator& evaluate,
                                std::uint64_t seed, std::size_t jobs = 1) {
    return run_trials(grid_configs(grid, base), evaluate, seed, jobs);
}

/** \brief Objective choices: mean F1 of R1/R2/RL (default) or a single metric's F1. */
enum class Objective { MeanF1, Rouge1, Rouge2, RougeL };

inline double objective_value(const RougeReport& r, Objective o) {
    switch (o) {
        case Objective::MeanF1: return mean_f1(r);
        case Objective::Rouge1: return r.mean_rouge1.f1;
        case Objective::Rouge2: return r.mean_rouge2.f1;
        case Objective::RougeL: return r.mean_rougeL.f1;
    }
    return 0.0;
}

inline std::optional<Objective> parse_objective(std::string_view s) {
    if (s == "mean-f1") return Objective::MeanF1;
    if (s == "rouge1") return Objective::Rouge1;
    if (s == "rouge2") return Objective::Rouge2;
    if (s == "rougeL") return Objective::RougeL;
    return std::nullopt;
}

// ---- files -------------------------------------------------------------

inline std::vector<Measure> measures_from_json(const Json& j, const char* key) {
    std::vector<Measure> out;
    if (!j.is_array()) throw ConfigError(std::string("search space: '") + key + "' must be an array");
    for (const auto& m : j) out.push_back(measure_or_throw(m.get<std::string>()));
    return out;
}

/** \brief Parses a space file.
 *
 * Ranges: {"lambda": [lo, hi], "p": [lo, hi], "T": [lo, hi], "W": [lo, hi],
 *          "sim0": [...], "sim1": [...], "sim2": [...]}
 * Grids:  {"grid": {"lambda": [...], "T": [...], ...}}
 * Omitted keys keep their defaults.
 */
inline SearchSpace space_from_json(const Json& j) {
    SearchSpace s;
    try {
        auto real = [&](const char* key, RealRange& r) {
            if (!j.contains(key)) return;
            const auto& a = j.at(key);
            if (!a.is_array() || a.size() != 2) throw ConfigError(std::string("search space: '") + key + "' must be [lo, hi]");
            r = {a[0].get<double>(), a[1].get<double>()};
        };
        auto integer = [&](const char* key, IntRange& r) {
            if (!j.contains(key)) return;
            const auto& a = j.at(key);
            if (!a.is_array() || a.size() != 2) throw ConfigError(std::string("search space: '") + key + "' must be [lo, hi]");
            r = {a[0].get<std::size_t>(), a[1].get<std::size_t>()};
        };
        real("lambda", s.lambda);
        real("p", s.p);
        integer("T", s.T);
        integer("W", s.W);
        if (j.contains("sim0")) s.sim0 = measures_from_json(j.at("sim0"), "sim0");
        if (j.contains("sim1")) s.sim1 = measures_from_json(j.at("sim1"), "sim1");
        if (j.contains("sim2")) s.sim2 = measures_from_json(j.at("sim2"), "sim2");
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            SearchSpace::Grid grid;
            if (g.contains("lambda")) grid.lambda = g.at("lambda").get<std::vector<double>>();
            if (g.contains("p")) grid.p = g.at("p").get<std::vector<double>>();
            if (g.contains("T")) grid.T = g.at("T").get<std::vector<std::size_t>>();
            if (g.contains("W")) grid.W = g.at("W").get<std::vector<std::size_t>>();
            if (g.contains("sim0")) grid.sim0 = measures_from_json(g.at("sim0"), "sim0");
            if (g.contains("sim1")) grid.sim1 = measures_from_json(g.at("sim1"), "sim1");
            if (g.contains("sim2")) grid.sim2 = measures_from_json(g.at("sim2"), "sim2");
            s.grid = std::move(grid);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("search space: ") + e.what());
    }
    s.validate();
    return s;
}

inline Json to_json(const Trial& t) {
    Json j;
    j["index"] = t.index;
    j["status"] = t.status == TrialStatus::Ok ? "ok" : "failed";
    j["objective"] = t.status == TrialStatus::Ok ? Json(t.objective) : Json(nullptr);
    Json scores = Json::object();
    if (t.rouge1) scores["rouge1"] = to_json(*t.rouge1);
    if (t.rouge2) scores["rouge2"] = to_json(*t.rouge2);
    if (t.rougeL) scores["rougeL"] = to_json(*t.rougeL);
    j["scores"] = std::move(scores);
    j["seed"] = t.seed;
    j["config"] = to_json(t.config);
    if (!t.error.empty()) j["error"] = t.error;
    return j;
}

/** \brief Trial log (one JSON line per trial; leading note lines carry "note") and best config. */
inline void write_search(const SearchResult& r, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::string log;
    for (const auto& n : r.notes) log += Json{{"note", n}}.dump() + "\n";
    for (const auto& t : r.log) log += to_json(t).dump() + "\n";
    detail::write_file(out_dir / "trials.jsonl", log);
    detail::write_file(out_dir / "best_config.json", to_json(r.best.config).dump(2) + "\n");
}

}  // namespace mmrfuse
