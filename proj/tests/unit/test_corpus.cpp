#include <catch_amalgamated.hpp>

#include <atomic>
#include <thread>

#include "mmrfuse/corpus.hpp"
#include "mmrfuse/fetch.hpp"
#include "mmrfuse/run_io.hpp"
#include "test_support.hpp"

using namespace mmrfuse;
using testing_support::TempDir;
using testing_support::write_text;
using testing_support::read_text;

namespace {

const char* kTwoClusters =
    R"({"cluster_id":"a","documents":[{"doc_id":"a1","text":"First doc."},{"doc_id":"a2","text":"Second doc."}]})"
    "\n"
    R"({"cluster_id":"b","documents":[{"doc_id":"b1","text":"Third doc."},{"doc_id":"b2","text":"Fourth doc."}],"reference_summary":"Gold."})"
    "\n";

std::string cluster_line(const std::string& id, std::size_t docs) {
    nlohmann::json j;
    j["cluster_id"] = id;
    j["documents"] = nlohmann::json::array();
    for (std::size_t i = 0; i < docs; ++i) {
        j["documents"].push_back({{"doc_id", id + std::to_string(i)}, {"text", "Text " + std::to_string(i) + "."}});
    }
    return j.dump() + "\n";
}

struct Fixture {
    TempDir dir;
    std::vector<Cluster> clusters;

    Fixture() {
        write_text(dir / "clusters.jsonl", kTwoClusters);
        clusters = load_clusters((dir / "clusters.jsonl").string());
    }

    std::vector<CandidateSummary> candidates(const std::string& body, std::vector<std::string>* issues = nullptr) {
        write_text(dir / "cands.jsonl", body);
        return load_candidates((dir / "cands.jsonl").string(), clusters, issues);
    }
};

}  // namespace

TEST_CASE("load_clusters reads clusters in file order", "[corpus]") {
    TempDir dir;
    write_text(dir / "empty.jsonl", "");
    CHECK(load_clusters((dir / "empty.jsonl").string()).empty());

    write_text(dir / "two.jsonl", kTwoClusters);
    const auto c = load_clusters((dir / "two.jsonl").string());
    REQUIRE(c.size() == 2);
    CHECK(c[0].cluster_id == "a");
    CHECK(c[1].cluster_id == "b");
    CHECK(c[0].documents.size() + c[1].documents.size() == 4);
    CHECK_FALSE(c[0].reference_summary);
    CHECK(c[1].reference_summary == std::optional<std::string>("Gold."));
}

TEST_CASE("load_clusters accepts a ten-document cluster silently", "[corpus]") {
    TempDir dir;
    write_text(dir / "ten.jsonl", cluster_line("mn", 10));
    std::vector<std::string> warnings;
    diag::ScopedWarningCapture capture([&](std::string_view m) { warnings.emplace_back(m); });
    const auto c = load_clusters((dir / "ten.jsonl").string());
    REQUIRE(c.size() == 1);
    CHECK(c[0].documents.size() == 10);
    CHECK(warnings.empty());
}

TEST_CASE("load_clusters rejects malformed input", "[corpus]") {
    TempDir dir;
    write_text(dir / "bad.jsonl", cluster_line("a", 1) + "\n{not json\n");
    try {
        load_clusters((dir / "bad.jsonl").string());
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(":3"));
    }

    write_text(dir / "dup.jsonl", cluster_line("a", 1) + cluster_line("a", 2));
    CHECK_THROWS_AS(load_clusters((dir / "dup.jsonl").string()), ValidationError);

    write_text(dir / "nodocs.jsonl", R"({"cluster_id":"x","documents":[]})" "\n");
    CHECK_THROWS_AS(load_clusters((dir / "nodocs.jsonl").string()), ValidationError);

    write_text(dir / "dupdoc.jsonl",
               R"({"cluster_id":"x","documents":[{"doc_id":"d","text":"a"},{"doc_id":"d","text":"b"}]})" "\n");
    CHECK_THROWS_AS(load_clusters((dir / "dupdoc.jsonl").string()), ValidationError);

    write_text(dir / "blank.jsonl", R"({"cluster_id":"x","documents":[{"doc_id":"d","text":"   "}]})" "\n");
    CHECK_THROWS_AS(load_clusters((dir / "blank.jsonl").string()), ValidationError);

    CHECK_THROWS_AS(load_clusters((dir / "missing.jsonl").string()), IoError);

    std::vector<std::string> issues;
    write_text(dir / "mixed.jsonl", cluster_line("a", 1) + "oops\n" + cluster_line("a", 1) + cluster_line("b", 1));
    const auto kept = load_clusters((dir / "mixed.jsonl").string(), &issues);
    CHECK(kept.size() == 2);
    CHECK(issues.size() == 2);
}

TEST_CASE("load_candidates validates cross references", "[corpus]") {
    Fixture f;
    CHECK(f.candidates("").empty());

    const auto sds = f.candidates(
        R"({"cluster_id":"a","model_id":"m1","scope":"sds","doc_id":"a1","text":"S1."})" "\n"
        R"({"cluster_id":"a","model_id":"m1","scope":"sds","doc_id":"a2","text":"S2."})" "\n"
        R"({"cluster_id":"b","model_id":"m1","scope":"sds","doc_id":"b1","text":"S3."})" "\n");
    REQUIRE(sds.size() == 3);
    for (const auto& c : sds) CHECK(c.scope == Scope::Sds);

    const auto mds = f.candidates(
        R"({"cluster_id":"a","model_id":"pegasus","scope":"mds","text":"Whole.","pretrained_on_dataset":true})" "\n");
    REQUIRE(mds.size() == 1);
    CHECK(mds[0].pretrained_on_dataset);
    CHECK_FALSE(mds[0].doc_id);

    CHECK_THROWS_AS(f.candidates(R"({"cluster_id":"zz","model_id":"m","scope":"mds","text":"x"})" "\n"),
                    ValidationError);
    try {
        f.candidates(R"({"cluster_id":"a","model_id":"m","scope":"sds","doc_id":"nope","text":"x"})" "\n");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("nope"));
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring(":1"));
    }
    CHECK_THROWS_AS(f.candidates(R"({"cluster_id":"a","model_id":"m","scope":"mds","text":"x"})" "\n"
                                 R"({"cluster_id":"a","model_id":"m","scope":"mds","text":"y"})" "\n"),
                    ValidationError);
    CHECK_THROWS_AS(f.candidates(R"({"cluster_id":"a","model_id":"m","scope":"mds","text":"  "})" "\n"),
                    ValidationError);
    CHECK_THROWS_AS(f.candidates(R"({"cluster_id":"a","model_id":"m","scope":"sds","text":"x"})" "\n"),
                    ValidationError);
    CHECK_THROWS_AS(f.candidates(R"({"cluster_id":"a","model_id":"m","scope":"mds","doc_id":"a1","text":"x"})" "\n"),
                    ValidationError);
    CHECK_THROWS_AS(f.candidates(R"({"cluster_id":"a","model_id":"m","scope":"both","text":"x"})" "\n"),
                    ValidationError);

    std::vector<std::string> issues;
    const auto some = f.candidates(R"({"cluster_id":"a","model_id":"m","scope":"mds","text":"x"})" "\n"
                                   R"({"cluster_id":"q","model_id":"m","scope":"mds","text":"x"})" "\n",
                                   &issues);
    CHECK(some.size() == 1);
    CHECK(issues.size() == 1);
}

TEST_CASE("every loaded SDS candidate resolves to a document", "[corpus][property]") {
    Fixture f;
    const auto c = f.candidates(
        R"({"cluster_id":"a","model_id":"m1","scope":"sds","doc_id":"a1","text":"S1."})" "\n"
        R"({"cluster_id":"b","model_id":"m2","scope":"sds","doc_id":"b2","text":"S2."})" "\n"
        R"({"cluster_id":"b","model_id":"m2","scope":"mds","text":"S3."})" "\n");
    for (const auto& cand : c) {
        if (cand.scope != Scope::Sds) continue;
        const auto it = std::find_if(f.clusters.begin(), f.clusters.end(),
                                     [&](const Cluster& cl) { return cl.cluster_id == cand.cluster_id; });
        REQUIRE(it != f.clusters.end());
        CHECK(it->find(*cand.doc_id) != nullptr);
    }
}

// ---- fetch ------------------------------------------------------------------

namespace {

/// Summarizer stand-in: answers with each document's first sentence.
class MockSummarizer {
public:
    explicit MockSummarizer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
        server_.Post("/summarize", [this, handler](const httplib::Request& req, httplib::Response& res) {
            ++hits_;
            handler(req, res);
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockSummarizer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/summarize"; }
    int hits() const { return hits_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::atomic<int> hits_{0};
};

void echo_first_sentence(const httplib::Request& req, httplib::Response& res) {
    const auto in = nlohmann::json::parse(req.body);
    nlohmann::json out;
    out["candidates"] = nlohmann::json::array();
    const std::string scope = in.at("scope");
    if (scope == "mds") {
        out["candidates"].push_back({{"cluster_id", in["cluster_id"]},
                                     {"model_id", in["model_id"]},
                                     {"scope", "mds"},
                                     {"text", split_sentences(in["documents"][0]["text"].get<std::string>())[0].text}});
    } else {
        // Reverse order on purpose; the client must restore document order.
        for (auto it = in["documents"].rbegin(); it != in["documents"].rend(); ++it) {
            out["candidates"].push_back({{"cluster_id", in["cluster_id"]},
                                         {"model_id", in["model_id"]},
                                         {"scope", "sds"},
                                         {"doc_id", (*it)["doc_id"]},
                                         {"text", split_sentences((*it)["text"].get<std::string>())[0].text}});
        }
    }
    res.set_content(out.dump(), "application/json");
}

Cluster three_docs() {
    return Cluster{"c",
                   {{"d1", "Alpha one. Alpha two."}, {"d2", "Beta one. Beta two."}, {"d3", "Gamma one."}},
                   std::nullopt};
}

FetchOptions quick() {
    FetchOptions o;
    o.timeout = std::chrono::milliseconds(2000);
    o.retries = 2;
    o.backoff = std::chrono::milliseconds(5);
    return o;
}

}  // namespace

TEST_CASE("fetch_candidates against a mock summarizer", "[corpus][fetch]") {
    MockSummarizer server(echo_first_sentence);
    const auto cluster = three_docs();

    const auto sds = fetch_candidates(server.url(), cluster, "m1", Scope::Sds, quick());
    REQUIRE(sds.size() == 3);
    CHECK(*sds[0].doc_id == "d1");
    CHECK(sds[0].text == "Alpha one.");
    CHECK(*sds[2].doc_id == "d3");
    CHECK(sds[2].text == "Gamma one.");

    const auto mds = fetch_candidates(server.url(), cluster, "m1", Scope::Mds, quick());
    REQUIRE(mds.size() == 1);
    CHECK(mds[0].scope == Scope::Mds);
    CHECK_FALSE(mds[0].doc_id);
}

TEST_CASE("fetch_candidates rejects non-conforming responses", "[corpus][fetch]") {
    const auto cluster = three_docs();
    SECTION("empty summary text") {
        MockSummarizer server([](const httplib::Request& req, httplib::Response& res) {
            const auto in = nlohmann::json::parse(req.body);
            nlohmann::json out{{"candidates", {{{"cluster_id", in["cluster_id"]},
                                                {"model_id", in["model_id"]},
                                                {"scope", "mds"},
                                                {"text", ""}}}}};
            res.set_content(out.dump(), "application/json");
        });
        CHECK_THROWS_AS(fetch_candidates(server.url(), cluster, "m1", Scope::Mds, quick()), ProtocolError);
        CHECK(server.hits() == 1);
    }
    SECTION("not JSON") {
        MockSummarizer server([](const httplib::Request&, httplib::Response& res) {
            res.set_content("<html>", "text/html");
        });
        CHECK_THROWS_AS(fetch_candidates(server.url(), cluster, "m1", Scope::Mds, quick()), ProtocolError);
    }
    SECTION("wrong SDS cardinality") {
        MockSummarizer server([](const httplib::Request& req, httplib::Response& res) {
            const auto in = nlohmann::json::parse(req.body);
            nlohmann::json out{{"candidates", {{{"cluster_id", in["cluster_id"]},
                                                {"model_id", in["model_id"]},
                                                {"scope", "sds"},
                                                {"doc_id", "d1"},
                                                {"text", "x"}}}}};
            res.set_content(out.dump(), "application/json");
        });
        CHECK_THROWS_AS(fetch_candidates(server.url(), cluster, "m1", Scope::Sds, quick()), ProtocolError);
    }
    SECTION("client error status is not retried") {
        MockSummarizer server([](const httplib::Request&, httplib::Response& res) { res.status = 400; });
        CHECK_THROWS_AS(fetch_candidates(server.url(), cluster, "m1", Scope::Mds, quick()), ProtocolError);
        CHECK(server.hits() == 1);
    }
}

TEST_CASE("fetch_candidates retries transport failures", "[corpus][fetch]") {
    const auto cluster = three_docs();
    SECTION("server errors exhaust the retry budget") {
        MockSummarizer server([](const httplib::Request&, httplib::Response& res) { res.status = 503; });
        CHECK_THROWS_AS(fetch_candidates(server.url(), cluster, "m1", Scope::Mds, quick()), TransportError);
        CHECK(server.hits() == 3);
    }
    SECTION("a transient failure recovers") {
        std::atomic<int> calls{0};
        MockSummarizer server([&](const httplib::Request& req, httplib::Response& res) {
            if (calls++ == 0) {
                res.status = 500;
                return;
            }
            echo_first_sentence(req, res);
        });
        CHECK(fetch_candidates(server.url(), cluster, "m1", Scope::Sds, quick()).size() == 3);
        CHECK(server.hits() == 2);
    }
    SECTION("unreachable endpoint") {
        int port = 0;
        {
            httplib::Server probe;
            port = probe.bind_to_any_port("127.0.0.1");
        }
        auto o = quick();
        o.retries = 1;
        CHECK_THROWS_AS(fetch_candidates("http://127.0.0.1:" + std::to_string(port) + "/x", cluster, "m1",
                                         Scope::Mds, o),
                        TransportError);
    }
    CHECK_THROWS_AS(parse_endpoint("ftp://host/x"), ConfigError);
    CHECK(parse_endpoint("http://h:9/a/b").path == "/a/b");
    CHECK(parse_endpoint("http://h:9").path == "/");
}

// ---- run outputs --------------------------------------------------------------

namespace {

FusedSummary sample_summary(const std::string& id, double score) {
    FusedSummary f;
    f.cluster_id = id;
    f.n = 2;
    f.l = 1;
    f.sentences = {{"Anchor one.", "best", std::nullopt, 0, 0, std::nullopt},
                   {"Anchor two.", "best", std::nullopt, 1, 1, std::nullopt},
                   {"Picked \"quoted\" line.", "other", std::string("d7"), 3, 2, score}};
    for (const auto& s : f.sentences) f.text += (f.text.empty() ? "" : " ") + s.text;
    f.warnings = {"note"};
    return f;
}

RunRecord sample_record() {
    RunRecord rec;
    rec.config.best_model_id = "best";
    rec.config.seed = 42;
    rec.seed = 42;
    rec.cluster_count = 3;
    rec.fused = {sample_summary("a", 0.1 + 0.2), sample_summary("b", 1.0 / 3.0)};
    rec.errors = {{"c", "no candidates from best model"}};
    rec.rouge = aggregate_rouge({{"a", make_rouge_score(2.0 / 3.0, 0.7), make_rouge_score(0.1, 0.2),
                                  make_rouge_score(1.0 / 7.0, 0.5)},
                                 {"b", make_rouge_score(0.3, 0.9), make_rouge_score(0.0, 0.0),
                                  make_rouge_score(0.25, 0.125)}});
    rec.started_at = "2026-01-01T00:00:00Z";
    rec.finished_at = "2026-01-01T00:00:01Z";
    return rec;
}

}  // namespace

TEST_CASE("write_run persists cluster order and round-trips exactly", "[corpus][run]") {
    TempDir dir;
    const auto rec = sample_record();
    write_run(rec, dir / "run");
    const auto fused = read_text(dir / "run" / "fused.jsonl");
    CHECK(std::count(fused.begin(), fused.end(), '\n') == 2);
    CHECK(fused.find("\"cluster_id\":\"a\"") < fused.find("\"cluster_id\":\"b\""));

    const auto back = read_run(dir / "run");
    REQUIRE(back.fused.size() == 2);
    CHECK(back.fused == rec.fused);
    CHECK(back.errors == rec.errors);
    CHECK(back.seed == 42);
    REQUIRE(back.rouge);
    CHECK(back.rouge->mean_rouge1.f1 == rec.rouge->mean_rouge1.f1);
    CHECK(back.rouge->per_cluster[0].rougeL.precision == rec.rouge->per_cluster[0].rougeL.precision);

    write_run(back, dir / "again");
    for (const char* name : {"fused.jsonl", "scores.jsonl", "report.json", "manifest.json"}) {
        CHECK(read_text(dir / "run" / name) == read_text(dir / "again" / name));
    }
}

TEST_CASE("write_run is deterministic and handles empty records", "[corpus][run]") {
    TempDir dir;
    const auto rec = sample_record();
    write_run(rec, dir / "one");
    write_run(rec, dir / "two");
    for (const char* name : {"fused.jsonl", "scores.jsonl", "report.json"}) {
        CHECK(read_text(dir / "one" / name) == read_text(dir / "two" / name));
    }

    RunRecord empty;
    empty.config.best_model_id = "best";
    write_run(empty, dir / "empty");
    CHECK(read_text(dir / "empty" / "fused.jsonl").empty());
    CHECK(read_text(dir / "empty" / "scores.jsonl").empty());
    const auto report = nlohmann::json::parse(read_text(dir / "empty" / "report.json"));
    CHECK(report["clusters"] == 0);
    CHECK(report["seed"] == 1);
    CHECK(report["means"].is_null());
    CHECK(report["config"]["best_model_id"] == "best");
    const auto back = read_run(dir / "empty");
    CHECK(back.fused.empty());
    CHECK_FALSE(back.rouge);
}

TEST_CASE("write_run reports unwritable destinations", "[corpus][run]") {
    TempDir dir;
    write_text(dir / "file", "x");
    CHECK_THROWS_AS(write_run(sample_record(), dir / "file" / "sub"), IoError);
}
