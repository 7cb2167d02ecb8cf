// Command-line driver: validate, query, fuse, evaluate, tune, fetch.
//
// Machine-readable results go to stdout, diagnostics to stderr.
// Exit codes: 0 success, 1 fatal error, 2 partial success.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmrfuse/mmrfuse.hpp"

namespace {

using namespace mmrfuse;

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

struct GlobalOptions {
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::size_t jobs = 1;
    std::string stopwords_path;
    std::string word_vectors_path;
};

/// Stopwords and word vectors named by the global flags, loaded once.
struct LoadedResources {
    StopwordSet stopwords;
    std::optional<WordVectors> word_vectors;
    FusionResources res;

    explicit LoadedResources(const GlobalOptions& g) {
        stopwords = g.stopwords_path.empty() ? default_stopwords() : load_stopwords(g.stopwords_path);
        if (!g.word_vectors_path.empty()) word_vectors = load_word_vectors(g.word_vectors_path);
        res.stopwords = &stopwords;
        res.word_vectors = word_vectors ? &*word_vectors : nullptr;
    }
};

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void print_issues(const std::vector<std::string>& issues) {
    for (const auto& i : issues) std::cerr << "error: " << i << "\n";
}

FusionConfig effective_config(const std::string& path, const GlobalOptions& g) {
    FusionConfig c = load_config(path);
    if (g.seed_given) c.seed = g.seed;
    return c;
}

// ---- validate --------------------------------------------------------------

int cmd_validate(const GlobalOptions&, const std::string& clusters_path, const std::string& candidates_path) {
    std::vector<std::string> issues;
    const auto clusters = load_clusters(clusters_path, &issues);
    std::size_t candidate_count = 0;
    if (!candidates_path.empty()) candidate_count = load_candidates(candidates_path, clusters, &issues).size();
    print_issues(issues);
    if (clusters.empty() && issues.empty()) std::cerr << "notice: 0 clusters\n";
    Json out;
    out["clusters"] = clusters.size();
    out["candidates"] = candidate_count;
    out["errors"] = issues.size();
    std::cout << out.dump() << "\n";
    return issues.empty() ? kOk : kFatal;
}

// ---- query -----------------------------------------------------------------

int cmd_query(const GlobalOptions& g, const std::string& clusters_path, const std::string& cluster_id,
              std::size_t topics, std::size_t words, const std::string& config_path) {
    LoadedResources lr(g);
    const auto clusters = load_clusters(clusters_path);
    const Cluster* cluster = nullptr;
    for (const auto& c : clusters) {
        if (c.cluster_id == cluster_id) cluster = &c;
    }
    if (!cluster) throw ValidationError("unknown cluster_id '" + cluster_id + "'");
    FusionConfig config;
    if (!config_path.empty()) config = config_from_json(Json::parse(detail::read_file(config_path)), false);
    config.T = topics;
    config.W = words;
    config.seed = g.seed;
    const auto q = cluster_query(*cluster, config, lr.res.stopwords);
    if (q.tokens.size() < topics * words) {
        std::cerr << "warning: vocabulary allows only " << q.tokens.size() << " of " << topics * words
                  << " query tokens\n";
    }
    std::cout << join(q.tokens) << "\n";
    return kOk;
}

// ---- fuse ------------------------------------------------------------------

int cmd_fuse(const GlobalOptions& g, const std::string& clusters_path, const std::string& candidates_path,
             const std::string& config_path, const std::string& out_dir) {
    const FusionConfig config = effective_config(config_path, g);
    LoadedResources lr(g);
    const auto clusters = load_clusters(clusters_path);
    const auto candidates = load_candidates(candidates_path, clusters);

    const auto started = utc_now();
    std::vector<std::string> warnings;
    RunRecord rec;
    {
        diag::ScopedWarningCapture capture([&](std::string_view m) { warnings.emplace_back(m); });
        rec = fuse_corpus(clusters, candidates, config, lr.res, g.jobs);
    }
    rec.started_at = started;
    rec.finished_at = utc_now();
    write_run(rec, out_dir);

    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : rec.fused) {
        for (const auto& w : f.warnings) std::cerr << "warning: " << w << "\n";
    }
    for (const auto& e : rec.errors) std::cerr << "error: cluster '" << e.cluster_id << "': " << e.message << "\n";

    Json out;
    out["out_dir"] = out_dir;
    out["clusters"] = rec.cluster_count;
    out["fused"] = rec.fused.size();
    out["failed"] = rec.errors.size();
    out["means"] = rec.rouge ? rouge_means_json(*rec.rouge) : Json(nullptr);
    std::cout << out.dump() << "\n";
    if (rec.all_failed()) return kFatal;
    return rec.errors.empty() ? kOk : kPartial;
}

// ---- evaluate --------------------------------------------------------------

int cmd_evaluate(const GlobalOptions&, const std::string& fused_path, const std::string& clusters_path,
                 const std::string& out_path) {
    const auto fused = load_fused(fused_path);
    const auto clusters = load_clusters(clusters_path);
    RougeReport report;
    std::vector<std::string> warnings;
    {
        diag::ScopedWarningCapture capture([&](std::string_view m) { warnings.emplace_back(m); });
        report = evaluate_corpus(fused, clusters);
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    if (!out_path.empty()) detail::write_file(out_path, to_json(report).dump(2) + "\n");
    Json out;
    out["evaluated"] = report.per_cluster.size();
    out["rouge1"] = report.mean_rouge1.f1;
    out["rouge2"] = report.mean_rouge2.f1;
    out["rougeL"] = report.mean_rougeL.f1;
    std::cout << out.dump() << "\n";
    return kOk;
}

// ---- tune ------------------------------------------------------------------

struct TuneOptions {
    std::string clusters_path;
    std::string candidates_path;
    std::string config_path;
    std::string space_path;
    std::string out_dir;
    std::string objective = "mean-f1";
    std::string report_clusters_path;
    std::size_t budget = 50;
    bool grid = false;
};

int cmd_tune(const GlobalOptions& g, const TuneOptions& o) {
    if (o.budget < 1 && !o.grid) throw ConfigError("tune: budget must be >= 1");
    const FusionConfig base = effective_config(o.config_path, g);
    const SearchSpace space = o.space_path.empty()
                                  ? SearchSpace{}
                                  : space_from_json(Json::parse(detail::read_file(o.space_path)));
    if (o.grid && !space.grid) throw ConfigError("tune: --grid needs a 'grid' object in the space file");

    std::vector<std::string> notes;
    const auto clusters = load_clusters(o.clusters_path);
    if (!o.report_clusters_path.empty()) {
        std::set<std::string> tuning_ids;
        for (const auto& c : clusters) tuning_ids.insert(c.cluster_id);
        for (const auto& c : load_clusters(o.report_clusters_path)) {
            if (tuning_ids.count(c.cluster_id)) {
                throw ConfigError("tune: cluster '" + c.cluster_id + "' is in both the tuning and reporting splits");
            }
        }
    } else {
        notes.push_back("self-tuning: no held-out reporting split was supplied; tuned scores are optimistic");
        std::cerr << "warning: " << notes.back() << "\n";
    }

    Evaluator evaluate;
    if (o.objective.rfind("toy-lambda=", 0) == 0) {
        const double target = std::stod(o.objective.substr(11));
        evaluate = [target](const FusionConfig& c) {
            return Evaluation{-(c.lambda - target) * (c.lambda - target), std::nullopt};
        };
    } else {
        const auto objective = parse_objective(o.objective);
        if (!objective) throw ConfigError("tune: unknown objective '" + o.objective + "'");
        if (o.candidates_path.empty()) throw ConfigError("tune: --candidates is required for ROUGE objectives");
        const auto candidates = load_candidates(o.candidates_path, clusters);
        auto shared = std::make_shared<LoadedResources>(g);
        evaluate = [&clusters, candidates, shared, objective](const FusionConfig& c) {
            const auto rec = fuse_corpus(clusters, candidates, c, shared->res, 1);
            if (!rec.rouge) throw DomainError("no cluster could be evaluated");
            return Evaluation{objective_value(*rec.rouge, *objective), rec.rouge};
        };
    }

    std::size_t suppressed = 0;
    SearchResult result;
    {
        diag::ScopedWarningCapture quiet([&](std::string_view) { ++suppressed; });
        result = o.grid ? grid_search(*space.grid, base, evaluate, g.seed, g.jobs)
                       : random_search(space, base, evaluate, o.budget, g.seed, g.jobs);
    }
    if (suppressed > 0) std::cerr << "notice: " << suppressed << " warnings raised during trials were suppressed\n";
    result.notes = notes;
    write_search(result, o.out_dir);
    std::size_t failed = 0;
    for (const auto& t : result.log) {
        if (t.status == TrialStatus::Failed) {
            ++failed;
            std::cerr << "warning: trial " << t.index << " failed: " << t.error << "\n";
        }
    }
    Json out;
    out["trials"] = result.log.size();
    out["failed"] = failed;
    out["best_index"] = result.best.index;
    out["best_objective"] =
        result.best.status == TrialStatus::Ok ? Json(result.best.objective) : Json(nullptr);
    out["best_config"] = (std::filesystem::path(o.out_dir) / "best_config.json").string();
    std::cout << out.dump() << "\n";
    return failed == result.log.size() ? kFatal : kOk;
}

// ---- fetch -----------------------------------------------------------------

int cmd_fetch(const GlobalOptions& g, const std::string& endpoint, const std::string& clusters_path,
              std::vector<std::string> models, const std::string& scope_name, const std::string& out_path,
              double timeout_s, std::size_t retries) {
    const auto scope = parse_scope(scope_name);
    if (!scope) throw ConfigError("fetch: scope must be 'mds' or 'sds'");
    const auto clusters = load_clusters(clusters_path);
    std::sort(models.begin(), models.end());
    models.erase(std::unique(models.begin(), models.end()), models.end());
    FetchOptions fo;
    fo.timeout = std::chrono::milliseconds(static_cast<long>(timeout_s * 1000.0));
    fo.retries = retries;

    struct Slot {
        std::vector<CandidateSummary> got;
        std::vector<std::string> errors;
    };
    std::vector<Slot> slots(clusters.size());
    auto run_one = [&](std::size_t i) {
        for (const auto& m : models) {
            try {
                auto c = fetch_candidates(endpoint, clusters[i], m, *scope, fo);
                slots[i].got.insert(slots[i].got.end(), c.begin(), c.end());
            } catch (const Error& e) {
                slots[i].errors.push_back("cluster '" + clusters[i].cluster_id + "', model '" + m + "': " + e.what());
            }
        }
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(g.jobs, clusters.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < clusters.size(); i = next++) run_one(i);
        });
    }
    for (auto& t : workers) t.join();

    std::string body;
    std::size_t fetched = 0;
    std::size_t failures = 0;
    for (const auto& s : slots) {
        for (const auto& c : s.got) body += to_json(c).dump() + "\n";
        fetched += s.got.size();
        failures += s.errors.size();
        print_issues(s.errors);
    }
    detail::write_file(out_path, body);
    Json out;
    out["candidates"] = fetched;
    out["failed_requests"] = failures;
    std::cout << out.dump() << "\n";
    if (failures == 0) return kOk;
    return fetched == 0 ? kFatal : kPartial;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-document summary fusion with MMR, LDA queries and ROUGE evaluation"};
    app.fallthrough();
    app.require_subcommand(1);

    GlobalOptions g;
    auto* seed_opt = app.add_option("--seed", g.seed, "Master random seed")->capture_default_str();
    app.add_option("--jobs", g.jobs, "Worker threads (cluster- or trial-level)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--stopwords", g.stopwords_path, "Stopword list, one word per line")->check(CLI::ExistingFile);
    app.add_option("--word-vectors", g.word_vectors_path, "Word vectors for WMD")->check(CLI::ExistingFile);

    std::string clusters_path, candidates_path, config_path, out_path, cluster_id, fused_path;
    std::size_t topics = 5, words = 6;

    auto* validate = app.add_subcommand("validate", "Check cluster and candidate files");
    validate->add_option("--clusters", clusters_path, "Clusters file (JSONL)")->required();
    validate->add_option("--candidates", candidates_path, "Candidates file (JSONL)");

    auto* query = app.add_subcommand("query", "Print the LDA query document of one cluster");
    query->add_option("--clusters", clusters_path, "Clusters file (JSONL)")->required();
    query->add_option("--cluster-id", cluster_id, "Cluster to inspect")->required();
    query->add_option("-T,--topics", topics, "LDA topics")->capture_default_str()->check(CLI::PositiveNumber);
    query->add_option("-W,--words", words, "Words per topic")->capture_default_str()->check(CLI::PositiveNumber);
    query->add_option("--config", config_path, "Config supplying LDA hyperparameters");

    auto* fuse = app.add_subcommand("fuse", "Fuse candidate summaries for every cluster");
    fuse->add_option("--clusters", clusters_path, "Clusters file (JSONL)")->required();
    fuse->add_option("--candidates", candidates_path, "Candidates file (JSONL)")->required();
    fuse->add_option("--config", config_path, "Fusion config (JSON)")->required();
    fuse->add_option("--out", out_path, "Run output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "Score fused summaries with ROUGE-1/2/L");
    evaluate->add_option("--fused", fused_path, "fused.jsonl from a run")->required();
    evaluate->add_option("--clusters", clusters_path, "Clusters file with reference summaries")->required();
    evaluate->add_option("--out", out_path, "Report file (JSON)");

    TuneOptions tune_opts;
    auto* tune = app.add_subcommand("tune", "Search fusion parameters for the best ROUGE");
    tune->add_option("--clusters", tune_opts.clusters_path, "Tuning clusters (JSONL)")->required();
    tune->add_option("--candidates", tune_opts.candidates_path, "Candidates file (JSONL)");
    tune->add_option("--config", tune_opts.config_path, "Base config (JSON)")->required();
    tune->add_option("--space", tune_opts.space_path, "Search space (JSON)");
    tune->add_option("--budget", tune_opts.budget, "Random-search trials")->capture_default_str();
    tune->add_flag("--grid", tune_opts.grid, "Exhaustive search over the space file's grid");
    tune->add_option("--objective", tune_opts.objective, "mean-f1, rouge1, rouge2, rougeL or toy-lambda=<x>")
        ->capture_default_str();
    tune->add_option("--report-clusters", tune_opts.report_clusters_path, "Held-out reporting split (JSONL)");
    tune->add_option("--out", tune_opts.out_dir, "Output directory")->required();

    std::string endpoint, scope_name = "sds";
    std::vector<std::string> models;
    double timeout_s = 10.0;
    std::size_t retries = 2;
    auto* fetch = app.add_subcommand("fetch", "Request candidate summaries from a summarizer service");
    fetch->add_option("--endpoint", endpoint, "http://host:port/path")->required();
    fetch->add_option("--clusters", clusters_path, "Clusters file (JSONL)")->required();
    fetch->add_option("--model", models, "Model id (repeatable)")->required();
    fetch->add_option("--scope", scope_name, "mds or sds")->capture_default_str();
    fetch->add_option("--timeout", timeout_s, "Per-request timeout in seconds")->capture_default_str();
    fetch->add_option("--retries", retries, "Retries after transport failures")->capture_default_str();
    fetch->add_option("--out", out_path, "Candidates output file (JSONL)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kFatal;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (*validate) return cmd_validate(g, clusters_path, candidates_path);
        if (*query) return cmd_query(g, clusters_path, cluster_id, topics, words, config_path);
        if (*fuse) return cmd_fuse(g, clusters_path, candidates_path, config_path, out_path);
        if (*evaluate) return cmd_evaluate(g, fused_path, clusters_path, out_path);
        if (*tune) return cmd_tune(g, tune_opts);
        if (*fetch) return cmd_fetch(g, endpoint, clusters_path, models, scope_name, out_path, timeout_s, retries);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFatal;
    }
    return kFatal;
}
