#pragma once

/** \file config.hpp
 *  \brief FusionConfig and its JSON form.
 *
 * JSON keys mirror the field names. Every key is optional except
 * best_model_id and mode.
 */

#include <algorithm>
#include <cmath>
#include <iterator>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/similarity.hpp"

namespace mmrfuse {

using Json = nlohmann::ordered_json;

enum class FusionMode { Concatenate, Select };
enum class LdaScope { Cluster, Dataset };

inline std::string_view to_string(FusionMode m) { return m == FusionMode::Concatenate ? "concatenate" : "select"; }
inline std::string_view to_string(LdaScope s) { return s == LdaScope::Cluster ? "cluster" : "dataset"; }

struct FusionConfig {
    double lambda = 0.808;
    double p = 0.106;
    double R = 0.01;
    std::size_t k = 10;
    std::size_t T = 5;
    std::size_t W = 6;
    Measure sim0 = Measure::DocEmbedCosine;
    Measure sim1 = Measure::DocEmbedCosine;
    Measure sim2 = Measure::DocEmbedCosine;
    std::map<std::string, Measure> reduction_sim_overrides;
    std::string best_model_id;
    FusionMode mode = FusionMode::Concatenate;
    std::size_t reduction_min_sentences = 3;
    std::uint64_t seed = 1;

    // LDA and embedding knobs.
    std::optional<double> lda_alpha;
    double lda_beta = 0.01;
    std::size_t lda_iterations = 500;
    LdaScope lda_scope = LdaScope::Cluster;
    std::size_t dbow_dimension = 64;
    std::size_t dbow_epochs = 40;
    std::size_t dbow_negatives = 5;

    MmrParams mmr_params() const { return {lambda, sim1, sim2}; }

    /// Throws ConfigError on the first violated invariant.
    void validate() const {
        auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
        if (!(lambda >= 0.0 && lambda <= 1.0)) fail("lambda must lie in [0, 1]");
        if (!(p > 0.0 && p <= 1.0)) fail("p must lie in (0, 1]");
        if (!(R > 0.0 && R <= 1.0)) fail("R must lie in (0, 1]");
        if (k < 1) fail("k must be >= 1");
        if (T < 1 || W < 1) fail("T and W must be >= 1");
        if (best_model_id.empty()) fail("best_model_id is required");
        if (lda_iterations < 1) fail("lda_iterations must be >= 1");
        if (lda_alpha && !(*lda_alpha > 0.0)) fail("lda_alpha must be positive");
        if (!(lda_beta > 0.0)) fail("lda_beta must be positive");
        if (dbow_dimension < 2 || dbow_epochs < 1) fail("dbow_dimension must be >= 2 and dbow_epochs >= 1");
    }
};

inline Json to_json(const FusionConfig& c) {
    Json j;
    j["lambda"] = c.lambda;
    j["p"] = c.p;
    j["R"] = c.R;
    j["k"] = c.k;
    j["T"] = c.T;
    j["W"] = c.W;
    j["sim0"] = to_string(c.sim0);
    j["sim1"] = to_string(c.sim1);
    j["sim2"] = to_string(c.sim2);
    Json overrides = Json::object();
    for (const auto& [model, m] : c.reduction_sim_overrides) overrides[model] = to_string(m);
    j["reduction_sim_overrides"] = std::move(overrides);
    j["best_model_id"] = c.best_model_id;
    j["mode"] = to_string(c.mode);
    j["reduction_min_sentences"] = c.reduction_min_sentences;
    j["seed"] = c.seed;
    j["lda_alpha"] = c.lda_alpha ? Json(*c.lda_alpha) : Json(nullptr);
    j["lda_beta"] = c.lda_beta;
    j["lda_iterations"] = c.lda_iterations;
    j["lda_scope"] = to_string(c.lda_scope);
    j["dbow_dimension"] = c.dbow_dimension;
    j["dbow_epochs"] = c.dbow_epochs;
    j["dbow_negatives"] = c.dbow_negatives;
    return j;
}

namespace detail {

template <class T>
T get_field(const Json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: field '") + key + "': " + e.what());
    }
}

inline std::size_t get_count(const Json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ConfigError(std::string("config: field '") + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
}

}  // namespace detail

/** \brief Parses a config object. \p require_identity demands best_model_id and mode. */
inline FusionConfig config_from_json(const Json& j, bool require_identity = true) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const char* const kKnown[] = {
        "lambda", "p", "R", "k", "T", "W", "sim0", "sim1", "sim2", "reduction_sim_overrides", "best_model_id",
        "mode", "reduction_min_sentences", "seed", "lda_alpha", "lda_beta", "lda_iterations", "lda_scope",
        "dbow_dimension", "dbow_epochs", "dbow_negatives"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
            throw ConfigError("config: unknown field '" + key + "'");
        }
    }

    FusionConfig c;
    if (j.contains("lambda")) c.lambda = detail::get_field<double>(j, "lambda");
    if (j.contains("p")) c.p = detail::get_field<double>(j, "p");
    if (j.contains("R")) c.R = detail::get_field<double>(j, "R");
    if (j.contains("k")) c.k = detail::get_count(j, "k");
    if (j.contains("T")) c.T = detail::get_count(j, "T");
    if (j.contains("W")) c.W = detail::get_count(j, "W");
    if (j.contains("sim0")) c.sim0 = measure_or_throw(detail::get_field<std::string>(j, "sim0"));
    if (j.contains("sim1")) c.sim1 = measure_or_throw(detail::get_field<std::string>(j, "sim1"));
    if (j.contains("sim2")) c.sim2 = measure_or_throw(detail::get_field<std::string>(j, "sim2"));
    if (j.contains("reduction_sim_overrides")) {
        const auto& o = j.at("reduction_sim_overrides");
        if (!o.is_object()) throw ConfigError("config: reduction_sim_overrides must be an object");
        for (const auto& [model, m] : o.items()) {
            if (!m.is_string()) throw ConfigError("config: override for '" + model + "' must be a string");
            c.reduction_sim_overrides[model] = measure_or_throw(m.get<std::string>());
        }
    }
    if (j.contains("best_model_id")) c.best_model_id = detail::get_field<std::string>(j, "best_model_id");
    if (j.contains("mode")) {
        const auto m = detail::get_field<std::string>(j, "mode");
        if (m == "concatenate") {
            c.mode = FusionMode::Concatenate;
        } else if (m == "select") {
            c.mode = FusionMode::Select;
        } else {
            throw ConfigError("config: mode must be 'concatenate' or 'select'");
        }
    }
    if (require_identity) {
        if (!j.contains("best_model_id")) throw ConfigError("config: best_model_id is required");
        if (!j.contains("mode")) throw ConfigError("config: mode is required");
    }
    if (j.contains("reduction_min_sentences")) {
        c.reduction_min_sentences = detail::get_count(j, "reduction_min_sentences");
    }
    if (j.contains("seed")) c.seed = detail::get_field<std::uint64_t>(j, "seed");
    if (j.contains("lda_alpha") && !j.at("lda_alpha").is_null()) c.lda_alpha = detail::get_field<double>(j, "lda_alpha");
    if (j.contains("lda_beta")) c.lda_beta = detail::get_field<double>(j, "lda_beta");
    if (j.contains("lda_iterations")) c.lda_iterations = detail::get_count(j, "lda_iterations");
    if (j.contains("lda_scope")) {
        const auto s = detail::get_field<std::string>(j, "lda_scope");
        if (s == "cluster") {
            c.lda_scope = LdaScope::Cluster;
        } else if (s == "dataset") {
            c.lda_scope = LdaScope::Dataset;
        } else {
            throw ConfigError("config: lda_scope must be 'cluster' or 'dataset'");
        }
    }
    if (j.contains("dbow_dimension")) c.dbow_dimension = detail::get_count(j, "dbow_dimension");
    if (j.contains("dbow_epochs")) c.dbow_epochs = detail::get_count(j, "dbow_epochs");
    if (j.contains("dbow_negatives")) c.dbow_negatives = detail::get_count(j, "dbow_negatives");
    if (require_identity) c.validate();
    return c;
}

inline FusionConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file: " + path);
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace mmrfuse
