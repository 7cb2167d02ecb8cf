#pragma once

/** \file run_io.hpp
 *  \brief Persisting and re-loading run outputs.
 *
 * A run directory holds:
 *   fused.jsonl    one fused summary per line, input cluster order
 *   scores.jsonl   per-cluster ROUGE for clusters with references
 *   report.json    config echo, seed, counts, corpus means, error list
 *   manifest.json  wall-clock timestamps (kept out of report.json so that
 *                  report.json depends only on inputs, config and seed)
 */

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmrfuse/config.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/fused.hpp"
#include "mmrfuse/pipeline.hpp"
#include "mmrfuse/rouge.hpp"

namespace mmrfuse {

inline Json to_json(const RougeScore& s) {
    return Json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}

inline RougeScore rouge_score_from_json(const Json& j) {
    return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

inline Json to_json(const ClusterRouge& c) {
    Json j;
    j["cluster_id"] = c.cluster_id;
    j["rouge1"] = to_json(c.rouge1);
    j["rouge2"] = to_json(c.rouge2);
    j["rougeL"] = to_json(c.rougeL);
    return j;
}

inline ClusterRouge cluster_rouge_from_json(const Json& j) {
    return {j.at("cluster_id").get<std::string>(), rouge_score_from_json(j.at("rouge1")),
            rouge_score_from_json(j.at("rouge2")), rouge_score_from_json(j.at("rougeL"))};
}

inline Json rouge_means_json(const RougeReport& r) {
    Json j;
    j["rouge1"] = to_json(r.mean_rouge1);
    j["rouge2"] = to_json(r.mean_rouge2);
    j["rougeL"] = to_json(r.mean_rougeL);
    return j;
}

/** \brief Standalone evaluation report (per-cluster scores plus means). */
inline Json to_json(const RougeReport& r) {
    Json j;
    j["evaluated"] = r.per_cluster.size();
    j["means"] = rouge_means_json(r);
    j["per_cluster"] = Json::array();
    for (const auto& c : r.per_cluster) j["per_cluster"].push_back(to_json(c));
    return j;
}

inline Json to_json(const FusedSummary& f) {
    Json j;
    j["cluster_id"] = f.cluster_id;
    j["summary"] = f.text;
    j["n"] = f.n;
    j["l"] = f.l;
    j["sentences"] = Json::array();
    for (const auto& s : f.sentences) {
        Json e;
        e["text"] = s.text;
        e["model_id"] = s.model_id;
        e["doc_id"] = s.doc_id ? Json(*s.doc_id) : Json(nullptr);
        e["source_ordinal"] = s.source_ordinal;
        e["rank"] = s.rank;
        e["score"] = s.score ? Json(*s.score) : Json("anchor");
        j["sentences"].push_back(std::move(e));
    }
    j["warnings"] = f.warnings;
    return j;
}

inline FusedSummary fused_from_json(const Json& j) {
    FusedSummary f;
    f.cluster_id = j.at("cluster_id").get<std::string>();
    f.text = j.at("summary").get<std::string>();
    f.n = j.at("n").get<std::size_t>();
    f.l = j.at("l").get<std::size_t>();
    for (const auto& e : j.at("sentences")) {
        FusedSentence s;
        s.text = e.at("text").get<std::string>();
        s.model_id = e.at("model_id").get<std::string>();
        if (!e.at("doc_id").is_null()) s.doc_id = e.at("doc_id").get<std::string>();
        s.source_ordinal = e.at("source_ordinal").get<std::size_t>();
        s.rank = e.at("rank").get<std::size_t>();
        if (e.at("score").is_number()) s.score = e.at("score").get<double>();
        f.sentences.push_back(std::move(s));
    }
    if (j.contains("warnings")) f.warnings = j.at("warnings").get<std::vector<std::string>>();
    return f;
}

inline Json report_json(const RunRecord& rec) {
    Json j;
    j["seed"] = rec.seed;
    j["clusters"] = rec.cluster_count;
    j["fused"] = rec.fused.size();
    j["failed"] = rec.errors.size();
    j["evaluated"] = rec.rouge ? rec.rouge->per_cluster.size() : 0;
    j["means"] = rec.rouge ? rouge_means_json(*rec.rouge) : Json(nullptr);
    j["config"] = to_json(rec.config);
    j["errors"] = Json::array();
    for (const auto& e : rec.errors) j["errors"].push_back({{"cluster_id", e.cluster_id}, {"message", e.message}});
    return j;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::vector<Json> read_jsonl(const std::filesystem::path& path) {
    std::vector<Json> out;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(Json::parse(line));
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    return out;
}

}  // namespace detail

inline std::string fused_jsonl(const std::vector<FusedSummary>& fused) {
    std::string out;
    for (const auto& f : fused) {
        out += to_json(f).dump();
        out.push_back('\n');
    }
    return out;
}

inline std::string scores_jsonl(const std::optional<RougeReport>& rouge) {
    std::string out;
    if (!rouge) return out;
    for (const auto& c : rouge->per_cluster) {
        out += to_json(c).dump();
        out.push_back('\n');
    }
    return out;
}

/** \brief Writes fused.jsonl, scores.jsonl, report.json and manifest.json into \p out_dir. */
inline void write_run(const RunRecord& rec, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    detail::write_file(out_dir / "fused.jsonl", fused_jsonl(rec.fused));
    detail::write_file(out_dir / "scores.jsonl", scores_jsonl(rec.rouge));
    detail::write_file(out_dir / "report.json", report_json(rec).dump(2) + "\n");
    Json manifest;
    manifest["started_at"] = rec.started_at;
    manifest["finished_at"] = rec.finished_at;
    manifest["files"] = {"fused.jsonl", "scores.jsonl", "report.json"};
    detail::write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

inline std::vector<FusedSummary> load_fused(const std::filesystem::path& path) {
    std::vector<FusedSummary> out;
    for (const auto& j : detail::read_jsonl(path)) {
        try {
            out.push_back(fused_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ": malformed fused record: " + e.what());
        }
    }
    return out;
}

/** \brief Inverse of write_run. */
inline RunRecord read_run(const std::filesystem::path& dir) {
    RunRecord rec;
    try {
        const auto report = Json::parse(detail::read_file(dir / "report.json"));
        rec.config = config_from_json(report.at("config"));
        rec.seed = report.at("seed").get<std::uint64_t>();
        rec.cluster_count = report.at("clusters").get<std::size_t>();
        for (const auto& e : report.at("errors")) {
            rec.errors.push_back({e.at("cluster_id").get<std::string>(), e.at("message").get<std::string>()});
        }
        rec.fused = load_fused(dir / "fused.jsonl");
        if (!report.at("means").is_null()) {
            std::vector<ClusterRouge> per;
            for (const auto& j : detail::read_jsonl(dir / "scores.jsonl")) per.push_back(cluster_rouge_from_json(j));
            RougeReport r;
            r.per_cluster = std::move(per);
            const auto& m = report.at("means");
            r.mean_rouge1 = rouge_score_from_json(m.at("rouge1"));
            r.mean_rouge2 = rouge_score_from_json(m.at("rouge2"));
            r.mean_rougeL = rouge_score_from_json(m.at("rougeL"));
            rec.rouge = std::move(r);
        }
        if (std::filesystem::exists(dir / "manifest.json")) {
            const auto manifest = Json::parse(detail::read_file(dir / "manifest.json"));
            rec.started_at = manifest.value("started_at", "");
            rec.finished_at = manifest.value("finished_at", "");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(dir.string() + ": malformed run output: " + e.what());
    }
    return rec;
}

}  // namespace mmrfuse
