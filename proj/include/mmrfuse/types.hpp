#pragma once

/** \file types.hpp
 *  \brief Dataset data model: documents, clusters and candidate summaries.
 */

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmrfuse {

struct Document {
    std::string doc_id;
    std::string text;
};

/** \brief A multi-document input unit with an optional gold summary. */
struct Cluster {
    std::string cluster_id;
    std::vector<Document> documents;
    std::optional<std::string> reference_summary;

    const Document* find(std::string_view doc_id) const {
        for (const auto& d : documents) {
            if (d.doc_id == doc_id) return &d;
        }
        return nullptr;
    }
};

/** \brief Whole-cluster (MDS) or single-document (SDS) candidate scope. */
enum class Scope { Mds, Sds };

inline std::string_view to_string(Scope s) { return s == Scope::Mds ? "mds" : "sds"; }

inline std::optional<Scope> parse_scope(std::string_view s) {
    if (s == "mds") return Scope::Mds;
    if (s == "sds") return Scope::Sds;
    return std::nullopt;
}

/** \brief One upstream model's summary for a cluster or for one of its documents. */
struct CandidateSummary {
    std::string cluster_id;
    std::string model_id;
    Scope scope = Scope::Mds;
    std::optional<std::string> doc_id;  ///< set iff scope == Sds
    std::string text;
    bool pretrained_on_dataset = false;
};

}  // namespace mmrfuse
