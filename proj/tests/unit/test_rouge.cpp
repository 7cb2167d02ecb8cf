#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "mmrfuse/rouge.hpp"
#include "oracles.hpp"

using namespace mmrfuse;
using Catch::Approx;

namespace {

/// Clipped n-gram overlap by matching and striking out reference n-grams one by one.
std::size_t overlap_by_strikeout(const TokenList& cand, const TokenList& ref, std::size_t n) {
    auto grams = [n](const TokenList& t) {
        std::vector<TokenList> out;
        for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
        return out;
    };
    auto pool = grams(ref);
    std::size_t hits = 0;
    for (const auto& g : grams(cand)) {
        auto it = std::find(pool.begin(), pool.end(), g);
        if (it != pool.end()) {
            ++hits;
            pool.erase(it);
        }
    }
    return hits;
}

std::string random_text(std::mt19937_64& rng, std::size_t max_len, std::size_t vocab = 5) {
    std::string s;
    const auto len = 1 + rng() % max_len;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) s.push_back(' ');
        s.push_back(static_cast<char>('a' + rng() % vocab));
        s += "x";
    }
    return s;
}

FusedSummary fused(std::string id, std::string text) {
    FusedSummary f;
    f.cluster_id = std::move(id);
    f.text = std::move(text);
    return f;
}

}  // namespace

TEST_CASE("rouge_n examples", "[rouge]") {
    const auto same = rouge_n("The storm hit the coast.", "The storm hit the coast.", 1);
    CHECK(same.precision == 1.0);
    CHECK(same.recall == 1.0);
    CHECK(same.f1 == 1.0);

    const auto r1 = rouge_n("the cat sat", "the cat ran", 1);
    CHECK(r1.precision == Approx(2.0 / 3.0));
    CHECK(r1.recall == Approx(2.0 / 3.0));
    CHECK(r1.f1 == Approx(0.6667).margin(1e-4));

    // One shared bigram ("the cat") out of two on each side.
    const auto r2 = rouge_n("the cat sat", "the cat ran", 2);
    CHECK(r2.precision == Approx(0.5));
    CHECK(r2.recall == Approx(0.5));
    CHECK(r2.f1 == Approx(0.5));

    // Punctuation and case do not matter; repeated words are clipped.
    CHECK(rouge_n("The, CAT!", "the cat", 1).f1 == 1.0);
    CHECK(rouge_n("the the the", "the cat", 1).precision == Approx(1.0 / 3.0));
    CHECK(rouge_n("the the the", "the cat", 1).recall == Approx(0.5));

    const auto shorter = rouge_n("word", "two words", 2);
    CHECK(shorter.precision == 0.0);
    CHECK(shorter.recall == 0.0);
    CHECK(shorter.f1 == 0.0);
    CHECK(rouge_n("", "two words", 1).f1 == 0.0);

    CHECK_THROWS_AS(rouge_n("x", "", 1), DomainError);
    CHECK_THROWS_AS(rouge_n("x", " ... ", 1), DomainError);
    CHECK_THROWS_AS(rouge_n("x", "y", 0), DomainError);
}

TEST_CASE("rouge_l examples", "[rouge]") {
    CHECK(rouge_l("The storm hit. Then it left.", "The storm hit. Then it left.").f1 == 1.0);
    CHECK(rouge_l("the cat sat", "the cat ran").f1 == Approx(2.0 / 3.0));
    const auto ac = rouge_l("a c", "a b c");
    CHECK(ac.precision == 1.0);
    CHECK(ac.recall == Approx(2.0 / 3.0));
    CHECK(ac.f1 == Approx(0.8));
    CHECK(rouge_l("", "a b").f1 == 0.0);
    CHECK_THROWS_AS(rouge_l("a", ""), DomainError);
}

TEST_CASE("rouge_l unions LCS hits across candidate sentences", "[rouge]") {
    // Reference w1..w5; the first candidate sentence shares w1 w2, the second
    // shares w1 w3 w5. The union covers w1 w2 w3 w5.
    const auto s = rouge_l("w1 w2 w6 w7 w8. w1 w3 w8 w9 w5.", "w1 w2 w3 w4 w5.");
    CHECK(s.recall == Approx(4.0 / 5.0));
    CHECK(s.precision == Approx(4.0 / 10.0));
    CHECK(s.f1 == Approx(2 * 0.8 * 0.4 / 1.2));

    // Hits are clipped by the candidate's token counts: one "a" in the
    // candidate cannot match two reference sentences.
    const auto clipped = rouge_l("a b.", "a x. a y.");
    CHECK(clipped.recall == Approx(1.0 / 4.0));
    CHECK(clipped.precision == Approx(1.0 / 2.0));
}

TEST_CASE("rouge_n matches a strike-out counting oracle", "[rouge][property]") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const auto cand = random_text(rng, 10);
        const auto ref = random_text(rng, 10);
        const auto ct = rouge_tokens(cand);
        const auto rt = rouge_tokens(ref);
        for (std::size_t n : {1, 2, 3}) {
            const auto s = rouge_n(cand, ref, n);
            if (ct.size() < n || rt.size() < n) {
                CHECK(s.f1 == 0.0);
                continue;
            }
            const double hits = static_cast<double>(overlap_by_strikeout(ct, rt, n));
            CHECK(s.precision == Approx(hits / static_cast<double>(ct.size() - n + 1)));
            CHECK(s.recall == Approx(hits / static_cast<double>(rt.size() - n + 1)));
        }
    }
}

TEST_CASE("rouge scores are bounded and swap symmetric", "[rouge][property]") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_text(rng, 12);
        const auto b = random_text(rng, 12);
        for (std::size_t n : {1, 2}) {
            const auto ab = rouge_n(a, b, n);
            const auto ba = rouge_n(b, a, n);
            CHECK(ab.precision == ba.recall);
            CHECK(ab.recall == ba.precision);
            CHECK(ab.f1 == Approx(ba.f1));
            if (rouge_tokens(a).size() >= n) CHECK(rouge_n(a, a, n).f1 == Approx(1.0));
        }
        for (const auto& s : {rouge_n(a, b, 1), rouge_n(a, b, 2), rouge_l(a, b)}) {
            CHECK(s.precision >= 0.0);
            CHECK(s.precision <= 1.0);
            CHECK(s.recall >= 0.0);
            CHECK(s.recall <= 1.0);
            CHECK(s.f1 >= 0.0);
            CHECK(s.f1 <= std::max(s.precision, s.recall) + 1e-12);
        }
    }
}

TEST_CASE("lcs_length matches subsequence enumeration", "[rouge][property]") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const auto a = rouge_tokens(random_text(rng, 8, 4));
        const auto b = rouge_tokens(random_text(rng, 8, 4));
        const auto expected = oracle::lcs(a, b);
        CHECK(lcs_length(a, b) == expected);
        // With a single sentence on each side the union LCS is the plain LCS.
        const auto s = rouge_l(join(a), join(b));
        CHECK(s.recall == Approx(static_cast<double>(expected) / static_cast<double>(b.size())));
        CHECK(s.precision == Approx(static_cast<double>(expected) / static_cast<double>(a.size())));
    }
}

TEST_CASE("evaluate_corpus aggregates per-cluster scores", "[rouge]") {
    const std::vector<Cluster> clusters{{"c1", {{"d", "x"}}, std::string("the cat ran")},
                                        {"c2", {{"d", "x"}}, std::string("a b c")},
                                        {"c3", {{"d", "x"}}, std::nullopt}};
    {
        const std::vector<FusedSummary> one{fused("c1", "the cat ran")};
        const auto r = evaluate_corpus(one, clusters);
        CHECK(r.per_cluster.size() == 1);
        CHECK(r.mean_rouge1.f1 == 1.0);
        CHECK(r.mean_rouge2.f1 == 1.0);
        CHECK(r.mean_rougeL.f1 == 1.0);
        CHECK(mean_f1(r) == 1.0);
    }
    const std::vector<FusedSummary> two{fused("c1", "the cat sat"), fused("c2", "a c")};
    const auto r = evaluate_corpus(two, clusters);
    REQUIRE(r.per_cluster.size() == 2);
    const double a1 = 2.0 / 3.0;
    const double b1 = 2 * 1.0 * (2.0 / 3.0) / (1.0 + 2.0 / 3.0);
    CHECK(r.mean_rouge1.f1 == Approx((a1 + b1) / 2.0));
    CHECK(r.mean_rouge2.f1 == Approx((0.5 + 0.0) / 2.0));
    CHECK(r.mean_rougeL.f1 == Approx((2.0 / 3.0 + 0.8) / 2.0));
    CHECK(r.mean_rouge1.precision == Approx((2.0 / 3.0 + 1.0) / 2.0));

    std::vector<std::string> warnings;
    {
        diag::ScopedWarningCapture capture([&](std::string_view w) { warnings.emplace_back(w); });
        const std::vector<FusedSummary> mixed{fused("c1", "the cat ran"), fused("c3", "x"), fused("zz", "x")};
        const auto m = evaluate_corpus(mixed, clusters);
        CHECK(m.per_cluster.size() == 1);
        CHECK(m.mean_rouge1.f1 == 1.0);
    }
    CHECK(warnings.size() == 2);

    {
        diag::ScopedWarningCapture capture([](std::string_view) {});
        const std::vector<FusedSummary> none{fused("c3", "x")};
        CHECK_THROWS_AS(evaluate_corpus(none, clusters), DomainError);
    }
}
