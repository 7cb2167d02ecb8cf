#pragma once

/** \file fetch.hpp
 *  \brief Client for an external summarizer service.
 *
 * Request (POST, JSON):
 *   {"cluster_id": ..., "model_id": ..., "scope": "mds"|"sds",
 *    "documents": [{"doc_id": ..., "text": ...}, ...]}
 * Response:
 *   {"candidates": [CandidateSummary, ...]}
 * An MDS request yields exactly one whole-cluster candidate; an SDS request
 * yields one candidate per document.
 */

#include <chrono>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "mmrfuse/corpus.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/types.hpp"

namespace mmrfuse {

struct FetchOptions {
    std::chrono::milliseconds timeout{10000};
    std::size_t retries = 2;  ///< extra attempts after the first transport failure
    std::chrono::milliseconds backoff{200};
};

struct Endpoint {
    std::string base;  ///< scheme://host[:port]
    std::string path;  ///< starts with '/'
};

inline Endpoint parse_endpoint(const std::string& url) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
        throw ConfigError("endpoint must be an http:// URL: " + url);
    }
    const auto slash = url.find('/', scheme + 3);
    Endpoint e;
    e.base = url.substr(0, slash);
    e.path = slash == std::string::npos ? "/" : url.substr(slash);
    if (e.base.size() <= scheme + 3) throw ConfigError("endpoint has no host: " + url);
    return e;
}

inline nlohmann::ordered_json fetch_request(const Cluster& cluster, const std::string& model_id, Scope scope) {
    nlohmann::ordered_json j;
    j["cluster_id"] = cluster.cluster_id;
    j["model_id"] = model_id;
    j["scope"] = std::string(to_string(scope));
    j["documents"] = nlohmann::ordered_json::array();
    for (const auto& d : cluster.documents) j["documents"].push_back({{"doc_id", d.doc_id}, {"text", d.text}});
    return j;
}

/** \brief Validates a response body against the request it answers. */
inline std::vector<CandidateSummary> parse_fetch_response(const std::string& body, const Cluster& cluster,
                                                          const std::string& model_id, Scope scope) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ProtocolError(std::string("summarizer response is not JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("candidates") || !j.at("candidates").is_array()) {
        throw ProtocolError("summarizer response lacks a 'candidates' array");
    }
    std::vector<CandidateSummary> out;
    CandidateValidator validator(std::span<const Cluster>(&cluster, 1));
    std::size_t idx = 0;
    for (const auto& item : j.at("candidates")) {
        const std::string where = "response candidate " + std::to_string(idx++);
        if (!item.is_object()) throw ProtocolError(where + ": expected an object");
        try {
            auto c = candidate_from_json(item, where);
            if (c.cluster_id != cluster.cluster_id || c.model_id != model_id || c.scope != scope) {
                throw ProtocolError(where + ": does not match the requested cluster, model or scope");
            }
            validator.check(c, where);
            out.push_back(std::move(c));
        } catch (const ValidationError& e) {
            throw ProtocolError(e.what());
        }
    }
    if (scope == Scope::Mds && out.size() != 1) {
        throw ProtocolError("mds request must yield exactly one candidate, got " + std::to_string(out.size()));
    }
    if (scope == Scope::Sds) {
        if (out.size() != cluster.documents.size()) {
            throw ProtocolError("sds request over " + std::to_string(cluster.documents.size()) +
                                " documents yielded " + std::to_string(out.size()) + " candidates");
        }
        // Return in cluster document order.
        std::vector<CandidateSummary> ordered;
        for (const auto& d : cluster.documents) {
            for (auto& c : out) {
                if (c.doc_id == d.doc_id) ordered.push_back(std::move(c));
            }
        }
        out = std::move(ordered);
    }
    return out;
}

/** \brief POSTs one request; transport failures are retried, protocol failures are not. */
inline std::vector<CandidateSummary> fetch_candidates(const std::string& url, const Cluster& cluster,
                                                      const std::string& model_id, Scope scope,
                                                      const FetchOptions& options = {}) {
    const auto ep = parse_endpoint(url);
    const std::string body = fetch_request(cluster, model_id, scope).dump();
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= options.retries; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(options.backoff * static_cast<long>(attempt));
        httplib::Client client(ep.base);
        const auto secs = options.timeout.count() / 1000;
        const auto usecs = (options.timeout.count() % 1000) * 1000;
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        auto res = client.Post(ep.path, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw ProtocolError("summarizer answered HTTP " + std::to_string(res->status));
        return parse_fetch_response(res->body, cluster, model_id, scope);
    }
    throw TransportError("summarizer request to " + url + " failed after " + std::to_string(options.retries + 1) +
                         " attempts: " + last_error);
}

}  // namespace mmrfuse
