#pragma once

/** \file textproc.hpp
 *  \brief Sentence segmentation, tokenization, stopwords and vocabularies.
 */

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/types.hpp"

namespace mmrfuse {

using TokenList = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

/** \brief Where a sentence came from. */
struct SentenceSource {
    std::string model_id;
    std::optional<std::string> doc_id;
    std::size_t ordinal = 0;  ///< position within the summary it was split from

    bool operator==(const SentenceSource&) const = default;
};

struct Sentence {
    std::string text;
    SentenceSource source;

    bool operator==(const Sentence&) const = default;
};

namespace detail {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
inline bool is_upper_or_digit(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isupper(u) != 0 || std::isdigit(u) != 0;
}
inline bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }
inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
inline bool is_opener(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string_view trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

// Abbreviations that never end a sentence.
inline bool is_abbreviation(std::string_view word) {
    static constexpr std::array<std::string_view, 8> kAbbrev{
        "dr.", "mr.", "mrs.", "ms.", "u.s.", "e.g.", "i.e.", "etc."};
    while (!word.empty() && is_opener(word.front())) word.remove_prefix(1);
    std::string lower(word);
    std::transform(lower.begin(), lower.end(), lower.begin(), ascii_lower);
    return std::find(kAbbrev.begin(), kAbbrev.end(), lower) != kAbbrev.end();
}

}  // namespace detail

/** \brief Rule-based sentence splitter for English news prose.
 *
 * A boundary is a run of '.', '!' or '?' (optionally followed by closing
 * quotes or brackets), then whitespace, then an uppercase letter or digit
 * (optionally behind an opening quote or bracket). A '.' closing one of
 * the known abbreviations is not a boundary. Text without any boundary is
 * a single sentence. Sentences are trimmed; ordinals count from 0.
 */
inline std::vector<Sentence> split_sentences(std::string_view text, const SentenceSource& base = {}) {
    std::vector<Sentence> out;
    auto emit = [&](std::string_view piece) {
        piece = detail::trim(piece);
        if (piece.empty()) return;
        Sentence s{std::string(piece), base};
        s.source.ordinal = out.size();
        out.push_back(std::move(s));
    };

    std::size_t start = 0;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (!detail::is_terminator(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && detail::is_terminator(text[j])) ++j;
        const std::size_t last_terminator = j - 1;
        while (j < n && detail::is_closer(text[j])) ++j;
        if (j >= n || !detail::is_space(text[j])) {
            i = j;
            continue;
        }
        std::size_t k = j;
        while (k < n && detail::is_space(text[k])) ++k;
        bool starts_sentence = false;
        if (k < n) {
            if (detail::is_upper_or_digit(text[k])) {
                starts_sentence = true;
            } else if (detail::is_opener(text[k]) && k + 1 < n && detail::is_upper_or_digit(text[k + 1])) {
                starts_sentence = true;
            }
        }
        if (starts_sentence && text[last_terminator] == '.' && last_terminator == i) {
            std::size_t w = i;
            while (w > start && !detail::is_space(text[w - 1])) --w;
            if (detail::is_abbreviation(text.substr(w, i + 1 - w))) starts_sentence = false;
        }
        if (starts_sentence) {
            emit(text.substr(start, j - start));
            start = k;
        }
        i = k;
    }
    emit(text.substr(start));
    return out;
}

/** \brief Whitespace tokenizer; with \p strip_punct ASCII punctuation also separates tokens. */
inline TokenList tokenize(std::string_view text, bool lowercase = true, bool strip_punct = true) {
    TokenList out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
    };
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isspace(u) != 0 || (strip_punct && u < 0x80 && std::ispunct(u) != 0)) {
            flush();
            continue;
        }
        current.push_back(lowercase ? detail::ascii_lower(c) : c);
    }
    flush();
    return out;
}

inline std::string join(const TokenList& tokens, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

/** \brief Lowercased, whitespace-collapsed form used for exact-duplicate checks. */
inline std::string normalize_text(std::string_view text) {
    return join(tokenize(text, /*lowercase=*/true, /*strip_punct=*/false));
}

inline TokenList remove_stopwords(TokenList tokens, const StopwordSet& stopwords) {
    std::erase_if(tokens, [&](const std::string& t) { return stopwords.count(t) != 0; });
    return tokens;
}

/** \brief Built-in English stopword list. */
inline const StopwordSet& default_stopwords() {
    static const StopwordSet words{
        "a",        "about",   "above",   "after",   "again",   "against", "all",     "also",
        "am",       "an",      "and",     "any",     "are",     "as",      "at",      "be",
        "because",  "been",    "before",  "being",   "below",   "between", "both",    "but",
        "by",       "can",     "could",   "did",     "do",      "does",    "doing",   "down",
        "during",   "each",    "few",     "for",     "from",    "further", "had",     "has",
        "have",     "having",  "he",      "her",     "here",    "hers",    "herself", "him",
        "himself",  "his",     "how",     "i",       "if",      "in",      "into",    "is",
        "it",       "its",     "itself",  "just",    "me",      "might",   "more",    "most",
        "must",     "my",      "myself",  "no",      "nor",     "not",     "now",     "of",
        "off",      "on",      "once",    "only",    "or",      "other",   "our",     "ours",
        "ourselves", "out",    "over",    "own",     "said",    "same",    "say",     "says",
        "she",      "should",  "so",      "some",    "such",    "than",    "that",    "the",
        "their",    "theirs",  "them",    "themselves", "then", "there",   "these",   "they",
        "this",     "those",   "through", "to",      "too",     "under",   "until",   "up",
        "upon",     "us",      "very",    "was",     "we",      "were",    "what",    "when",
        "where",    "which",   "while",   "who",     "whom",    "why",     "will",    "with",
        "would",    "you",     "your",    "yours",   "yourself", "yourselves", "s",   "t",
        "don",      "didn",    "doesn",   "isn",     "wasn",    "weren",   "won",     "ll",
        "re",       "ve",      "d",       "m",       "mr",      "mrs",     "ms",      "one",
        "new",      "like",    "get",     "got",     "many",    "much",    "even",    "still",
    };
    return words;
}

/** \brief Reads a stopword file: one word per line, blank lines ignored. */
inline StopwordSet load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read stopword file: " + path);
    StopwordSet out;
    std::string line;
    while (std::getline(in, line)) {
        auto w = detail::trim(line);
        if (!w.empty()) {
            std::string word(w);
            std::transform(word.begin(), word.end(), word.begin(), detail::ascii_lower);
            out.insert(std::move(word));
        }
    }
    return out;
}

/** \brief Dense word <-> index mapping with document frequencies.
 *
 * Indices follow lexicographic word order, so the mapping depends only on
 * the set of words, never on the order documents were seen in.
 */
class Vocabulary {
public:
    Vocabulary() = default;

    Vocabulary(std::vector<std::string> words, std::vector<std::size_t> df)
        : words_(std::move(words)), df_(std::move(df)) {
        index_.reserve(words_.size());
        for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
    }

    std::size_t size() const noexcept { return words_.size(); }
    bool empty() const noexcept { return words_.empty(); }

    std::optional<std::size_t> index_of(std::string_view word) const {
        auto it = index_.find(std::string(word));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(std::string_view word) const { return index_of(word).has_value(); }
    const std::string& word(std::size_t i) const { return words_.at(i); }
    std::size_t df(std::size_t i) const { return df_.at(i); }
    const std::vector<std::string>& words() const noexcept { return words_; }

private:
    std::vector<std::string> words_;
    std::vector<std::size_t> df_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline Vocabulary build_vocab(const std::vector<TokenList>& docs, const StopwordSet& stopwords,
                              std::size_t min_df) {
    if (min_df < 1) throw DomainError("build_vocab: min_df must be >= 1");
    std::map<std::string, std::size_t> df;
    for (const auto& doc : docs) {
        std::set<std::string_view> seen(doc.begin(), doc.end());
        for (auto w : seen) {
            std::string word(w);
            if (stopwords.count(word) == 0) ++df[word];
        }
    }
    std::vector<std::string> words;
    std::vector<std::size_t> counts;
    for (auto& [w, c] : df) {
        if (c >= min_df) {
            words.push_back(w);
            counts.push_back(c);
        }
    }
    if (words.empty()) throw DomainError("build_vocab: every word was filtered out (empty vocabulary)");
    return Vocabulary(std::move(words), std::move(counts));
}

inline std::size_t count_sentences(std::string_view text) { return split_sentences(text).size(); }

/** \brief Total sentences over all documents divided by the document count. */
inline double avg_sentences_per_doc(const Cluster& cluster) {
    if (cluster.documents.empty()) throw DomainError("avg_sentences_per_doc: cluster has no documents");
    std::size_t total = 0;
    for (const auto& d : cluster.documents) total += count_sentences(d.text);
    return static_cast<double>(total) / static_cast<double>(cluster.documents.size());
}

}  // namespace mmrfuse
