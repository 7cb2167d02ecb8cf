#pragma once

/** \file corpus.hpp
 *  \brief Line-delimited JSON ingestion of clusters and candidate summaries.
 *
 * Loaders either throw on the first problem or, given an issue list,
 * record every problem and skip the offending records.
 */

#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/types.hpp"

namespace mmrfuse {

namespace detail {

template <class E>
void report(std::vector<std::string>* issues, E error) {
    if (!issues) throw error;
    issues->push_back(error.what());
}

// Calls fn(line_no, json) for every non-blank line; parse failures are reported.
template <class Fn>
void for_each_record(const std::string& path, std::vector<std::string>* issues, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            report(issues, ParseError(path, line_no, std::string("invalid JSON: ") + e.what()));
            continue;
        }
        if (!j.is_object()) {
            report(issues, ParseError(path, line_no, "expected a JSON object"));
            continue;
        }
        fn(line_no, j);
    }
}

inline const nlohmann::json* string_field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return nullptr;
    return &*it;
}

}  // namespace detail

inline Cluster cluster_from_json(const nlohmann::json& j, const std::string& where) {
    const auto* id = detail::string_field(j, "cluster_id");
    if (!id) throw ValidationError(where + ": missing string field 'cluster_id'");
    Cluster c;
    c.cluster_id = id->get<std::string>();
    if (c.cluster_id.empty()) throw ValidationError(where + ": cluster_id is empty");
    auto docs = j.find("documents");
    if (docs == j.end() || !docs->is_array()) throw ValidationError(where + ": missing array field 'documents'");
    if (docs->empty()) throw ValidationError(where + ": cluster '" + c.cluster_id + "' has no documents");
    std::set<std::string> ids;
    for (const auto& d : *docs) {
        const auto* did = d.is_object() ? detail::string_field(d, "doc_id") : nullptr;
        const auto* text = d.is_object() ? detail::string_field(d, "text") : nullptr;
        if (!did || !text) throw ValidationError(where + ": each document needs string 'doc_id' and 'text'");
        Document doc{did->get<std::string>(), text->get<std::string>()};
        if (doc.doc_id.empty()) throw ValidationError(where + ": empty doc_id in cluster '" + c.cluster_id + "'");
        if (detail::trim(doc.text).empty()) {
            throw ValidationError(where + ": document '" + doc.doc_id + "' has empty text");
        }
        if (!ids.insert(doc.doc_id).second) {
            throw ValidationError(where + ": duplicate doc_id '" + doc.doc_id + "' in cluster '" + c.cluster_id + "'");
        }
        c.documents.push_back(std::move(doc));
    }
    if (auto ref = j.find("reference_summary"); ref != j.end() && !ref->is_null()) {
        if (!ref->is_string()) throw ValidationError(where + ": reference_summary must be a string");
        c.reference_summary = ref->get<std::string>();
    }
    return c;
}

inline nlohmann::ordered_json to_json(const Cluster& c) {
    nlohmann::ordered_json j;
    j["cluster_id"] = c.cluster_id;
    j["documents"] = nlohmann::ordered_json::array();
    for (const auto& d : c.documents) j["documents"].push_back({{"doc_id", d.doc_id}, {"text", d.text}});
    if (c.reference_summary) j["reference_summary"] = *c.reference_summary;
    return j;
}

/** \brief Reads a clusters file in file order. */
inline std::vector<Cluster> load_clusters(const std::string& path, std::vector<std::string>* issues = nullptr) {
    std::vector<Cluster> out;
    std::set<std::string> seen;
    detail::for_each_record(path, issues, [&](std::size_t line_no, const nlohmann::json& j) {
        const std::string where = path + ":" + std::to_string(line_no);
        try {
            auto c = cluster_from_json(j, where);
            if (!seen.insert(c.cluster_id).second) {
                throw ValidationError(where + ": duplicate cluster_id '" + c.cluster_id + "'");
            }
            out.push_back(std::move(c));
        } catch (const ValidationError& e) {
            detail::report(issues, e);
        }
    });
    return out;
}

/** \brief Parses one candidate object; cross-references are checked by the caller. */
inline CandidateSummary candidate_from_json(const nlohmann::json& j, const std::string& where) {
    CandidateSummary c;
    const auto* cid = detail::string_field(j, "cluster_id");
    const auto* mid = detail::string_field(j, "model_id");
    const auto* scope = detail::string_field(j, "scope");
    const auto* text = detail::string_field(j, "text");
    if (!cid || !mid || !scope || !text) {
        throw ValidationError(where + ": candidate needs string fields cluster_id, model_id, scope and text");
    }
    c.cluster_id = cid->get<std::string>();
    c.model_id = mid->get<std::string>();
    c.text = text->get<std::string>();
    const auto parsed = parse_scope(scope->get<std::string>());
    if (!parsed) throw ValidationError(where + ": scope must be \"mds\" or \"sds\"");
    c.scope = *parsed;
    if (c.model_id.empty()) throw ValidationError(where + ": model_id is empty");
    auto doc = j.find("doc_id");
    const bool has_doc = doc != j.end() && !doc->is_null();
    if (c.scope == Scope::Sds) {
        if (!has_doc || !doc->is_string() || doc->get<std::string>().empty()) {
            throw ValidationError(where + ": sds candidate requires a doc_id");
        }
        c.doc_id = doc->get<std::string>();
    } else if (has_doc) {
        throw ValidationError(where + ": mds candidate must not carry a doc_id");
    }
    if (auto p = j.find("pretrained_on_dataset"); p != j.end()) {
        if (!p->is_boolean()) throw ValidationError(where + ": pretrained_on_dataset must be a boolean");
        c.pretrained_on_dataset = p->get<bool>();
    }
    if (detail::trim(c.text).empty()) {
        throw ValidationError(where + ": empty summary text for model '" + c.model_id + "' in cluster '" +
                              c.cluster_id + "'");
    }
    return c;
}

inline nlohmann::ordered_json to_json(const CandidateSummary& c) {
    nlohmann::ordered_json j;
    j["cluster_id"] = c.cluster_id;
    j["model_id"] = c.model_id;
    j["scope"] = std::string(to_string(c.scope));
    if (c.doc_id) j["doc_id"] = *c.doc_id;
    j["text"] = c.text;
    j["pretrained_on_dataset"] = c.pretrained_on_dataset;
    return j;
}

/** \brief Checks a candidate against the loaded clusters and the (cluster, model, scope) keys seen so far. */
class CandidateValidator {
public:
    explicit CandidateValidator(std::span<const Cluster> clusters) {
        for (const auto& c : clusters) by_id_.emplace(c.cluster_id, &c);
    }

    void check(const CandidateSummary& c, const std::string& where) {
        auto it = by_id_.find(c.cluster_id);
        if (it == by_id_.end()) throw ValidationError(where + ": unknown cluster_id '" + c.cluster_id + "'");
        if (c.scope == Scope::Sds && !it->second->find(*c.doc_id)) {
            throw ValidationError(where + ": doc_id '" + *c.doc_id + "' not found in cluster '" + c.cluster_id + "'");
        }
        auto key = std::make_tuple(c.cluster_id, c.model_id, c.doc_id.value_or(""), c.scope);
        if (!keys_.insert(std::move(key)).second) {
            throw ValidationError(where + ": duplicate candidate (cluster '" + c.cluster_id + "', model '" +
                                  c.model_id + "', scope " + std::string(to_string(c.scope)) +
                                  (c.doc_id ? " doc '" + *c.doc_id + "'" : std::string()) + ")");
        }
    }

private:
    std::unordered_map<std::string, const Cluster*> by_id_;
    std::set<std::tuple<std::string, std::string, std::string, Scope>> keys_;
};

inline std::vector<CandidateSummary> load_candidates(const std::string& path, std::span<const Cluster> clusters,
                                                     std::vector<std::string>* issues = nullptr) {
    std::vector<CandidateSummary> out;
    CandidateValidator validator(clusters);
    detail::for_each_record(path, issues, [&](std::size_t line_no, const nlohmann::json& j) {
        const std::string where = path + ":" + std::to_string(line_no);
        try {
            auto c = candidate_from_json(j, where);
            validator.check(c, where);
            out.push_back(std::move(c));
        } catch (const ValidationError& e) {
            detail::report(issues, e);
        }
    });
    return out;
}

}  // namespace mmrfuse
