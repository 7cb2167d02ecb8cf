#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mmrfuse {

/// One sentence of a fused summary and where it came from.
struct FusedSentence {
    std::string text;
    std::string model_id;
    std::optional<std::string> doc_id;
    std::size_t source_ordinal = 0;
    std::size_t rank = 0;                ///< position in the final summary
    std::optional<double> score;         ///< MMR score at selection; empty for anchor sentences

    bool is_anchor() const noexcept { return !score.has_value(); }
    bool operator==(const FusedSentence&) const = default;
};

/// Anchor sentences (n) followed by MMR-appended sentences (l).
struct FusedSummary {
    std::string cluster_id;
    std::vector<FusedSentence> sentences;
    std::size_t n = 0;
    std::size_t l = 0;
    std::string text;
    std::vector<std::string> warnings;

    bool operator==(const FusedSummary&) const = default;
};

}  // namespace mmrfuse
