#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "rrank/core/io.hpp"
#include "rrank/core/toy_embed.hpp"
#include "rrank/core/types.hpp"
#include "rrank/errors.hpp"
#include "rrank/rng.hpp"

using namespace rrank;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
    const fs::path path = fs::temp_directory_path() / ("rrank_core_" + name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("load_queries round trip and validation") {
    SUBCASE("single record") {
        const auto path = temp_file("q1.tsv", "q1\thow to fix bike chain\n");
        const auto qs = load_queries(path.string());
        REQUIRE(qs.size() == 1);
        CHECK(qs.items()[0].qid == "q1");
        CHECK(qs.items()[0].text == "how to fix bike chain");
        CHECK(qs.items()[0].role == Role::Original);
    }
    SUBCASE("empty file gives empty set") {
        const auto path = temp_file("q_empty.tsv", "");
        CHECK(load_queries(path.string()).empty());
    }
    SUBCASE("missing tab names the line") {
        const auto path = temp_file("q_bad.tsv", "q1\n");
        CHECK_THROWS_WITH_AS(load_queries(path.string()), doctest::Contains("line 1"), DataError);
    }
    SUBCASE("duplicate qid rejected") {
        const auto path = temp_file("q_dup.tsv", "q1\ta\nq1\tb\n");
        CHECK_THROWS_AS(load_queries(path.string()), DataError);
    }
    SUBCASE("whitespace-only text rejected") {
        const auto path = temp_file("q_ws.tsv", "q1\t   \n");
        CHECK_THROWS_AS(load_queries(path.string()), DataError);
    }
    SUBCASE("file order preserved and serialization is exact") {
        const std::string original = "q9\tzuletzt\nq1\tfirst one\nq5\t\xe4\xb8\xad\xe6\x96\x87\n";
        const auto path = temp_file("q_rt.tsv", original);
        CHECK(serialize_queries(load_queries(path.string())) == original);
    }
}

TEST_CASE("load_qrels validation and duplicates") {
    SUBCASE("single record") {
        const auto path = temp_file("r1.txt", "q1 0 d1 2\n");
        const auto qrels = load_qrels(path.string(), 3);
        CHECK(qrels.grade("q1", "d1") == 2);
        CHECK(qrels.size() == 1);
        CHECK(qrels.duplicate_warnings == 0);
    }
    SUBCASE("grade at or above num_levels rejected") {
        const auto path = temp_file("r2.txt", "q1 0 d1 4\n");
        CHECK_THROWS_AS(load_qrels(path.string(), 3), DataError);
    }
    SUBCASE("non-integer grade rejected") {
        const auto path = temp_file("r3.txt", "q1 0 d1 high\n");
        CHECK_THROWS_AS(load_qrels(path.string(), 3), DataError);
    }
    SUBCASE("negative grade rejected") {
        const auto path = temp_file("r4.txt", "q1 0 d1 -1\n");
        CHECK_THROWS_AS(load_qrels(path.string(), 3), DataError);
    }
    SUBCASE("duplicate entries: last write wins, one warning") {
        const auto path = temp_file("r5.txt", "q1 0 d1 2\nq1 0 d2 1\nq1 0 d1 0\n");
        const auto qrels = load_qrels(path.string(), 3);
        CHECK(qrels.grade("q1", "d1") == 0);
        CHECK(qrels.duplicate_warnings == 1);
        CHECK(qrels.size() == 2);
    }
    SUBCASE("canonical round trip") {
        const std::string canonical = "q1 0 d1 2\nq1 0 d2 0\nq2 0 d9 1\n";
        const auto path = temp_file("r6.txt", canonical);
        CHECK(serialize_qrels(load_qrels(path.string(), 3)) == canonical);
    }
    SUBCASE("levels restricted to 3 or 5") {
        CHECK_THROWS_AS(Qrels(4), DataError);
        CHECK_NOTHROW(Qrels(5));
    }
}

TEST_CASE("run files: ordering invariant and round trip") {
    RankedRun run;
    run.tag = "rrank-test";
    run.by_qid["q1"] = {{"d2", 0.5}, {"d1", 0.9}, {"d3", 0.5}};
    run.by_qid["q2"] = {{"da", 1.25}};
    run.canonicalize();

    SUBCASE("scores non-increasing, ties by docid") {
        const auto& docs = run.by_qid["q1"];
        CHECK(docs[0].docid == "d1");
        CHECK(docs[1].docid == "d2");  // tie with d3 broken by docid
        CHECK(docs[2].docid == "d3");
    }
    SUBCASE("re-sorting is a no-op") {
        const std::string once = serialize_run(run);
        RankedRun copy = run;
        copy.canonicalize();
        CHECK(serialize_run(copy) == once);
    }
    SUBCASE("round trip through disk") {
        const auto path = temp_file("run1.run", serialize_run(run));
        const auto loaded = load_run(path.string());
        CHECK(serialize_run(loaded) == serialize_run(run));
        CHECK(loaded.tag == "rrank-test");
    }
    SUBCASE("duplicate docid rejected") {
        RankedRun bad;
        bad.by_qid["q1"] = {{"d1", 0.5}, {"d1", 0.4}};
        CHECK_THROWS_AS(bad.canonicalize(), DataError);
    }
    SUBCASE("role recovered from tag") {
        RankedRun tagged;
        tagged.tag = "rrank-elder";
        tagged.by_qid["q1"] = {{"d1", 1.0}};
        const auto path = temp_file("run2.run", serialize_run(tagged));
        CHECK(load_run(path.string()).role == Role::Elder);
    }
}

TEST_CASE("rewrites JSONL round trip and invariants") {
    std::vector<RewriteRecord> records(2);
    records[0] = {"q1", Role::Woman, "orig text", "rewritten text", "an intent", 2, 1, 0,
                  RewriteStatus::Accepted};
    records[1] = {"q1", Role::Elder, "orig text", "orig text", "an intent", 5, -1, 0,
                  RewriteStatus::FallbackOriginal};
    const std::string serialized = serialize_rewrites(records);
    const auto path = temp_file("rw.jsonl", serialized);
    const auto loaded = load_rewrites(path.string());
    REQUIRE(loaded.size() == 2);
    CHECK(serialize_rewrites(loaded) == serialized);
    CHECK(loaded[1].status == RewriteStatus::FallbackOriginal);

    SUBCASE("accepted record with negative score rejected") {
        const auto bad = temp_file("rw_bad.jsonl",
                                   "{\"qid\":\"q1\",\"role\":\"woman\",\"original_text\":\"a\","
                                   "\"rewritten_text\":\"b\",\"intent_summary\":\"i\","
                                   "\"iterations\":1,\"s0\":-1,\"s1\":1,\"status\":\"accepted\"}\n");
        CHECK_THROWS_AS(load_rewrites(bad.string()), DataError);
    }
    SUBCASE("fallback must carry the original text") {
        const auto bad = temp_file("rw_bad2.jsonl",
                                   "{\"qid\":\"q1\",\"role\":\"woman\",\"original_text\":\"a\","
                                   "\"rewritten_text\":\"b\",\"intent_summary\":\"i\","
                                   "\"iterations\":1,\"s0\":-1,\"s1\":1,"
                                   "\"status\":\"fallback_original\"}\n");
        CHECK_THROWS_AS(load_rewrites(bad.string()), DataError);
    }
}

TEST_CASE("embeddings JSONL") {
    SUBCASE("two records, d=4") {
        const auto path = temp_file(
            "e1.jsonl",
            "{\"qid\":\"q1\",\"role\":\"original\",\"docid\":\"d1\",\"vec\":[0.5,-1.0,0.25,3.0]}\n"
            "{\"qid\":\"q1\",\"role\":\"woman\",\"docid\":\"d1\",\"vec\":[1.5,2.0,0.125,-7.0]}\n");
        const auto set = load_embeddings(path.string());
        CHECK(set.size() == 2);
        CHECK(set.dim() == 4);
        CHECK(set.find("q1", "d1", Role::Woman) != nullptr);
        CHECK(set.find("q1", "d1", Role::Man) == nullptr);

        const auto rt = temp_file("e1b.jsonl", serialize_embeddings(set));
        std::ifstream a(path), b(rt);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
    }
    SUBCASE("dimension mismatch across lines") {
        const auto path = temp_file(
            "e2.jsonl",
            "{\"qid\":\"q1\",\"role\":\"original\",\"docid\":\"d1\",\"vec\":[1,2,3,4]}\n"
            "{\"qid\":\"q1\",\"role\":\"woman\",\"docid\":\"d1\",\"vec\":[1,2,3,4,5]}\n");
        CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("dimension"),
                             DataError);
    }
    SUBCASE("unknown role string") {
        const auto path = temp_file(
            "e3.jsonl", "{\"qid\":\"q1\",\"role\":\"robot\",\"docid\":\"d1\",\"vec\":[1,2]}\n");
        CHECK_THROWS_WITH_AS(load_embeddings(path.string()), doctest::Contains("unknown role"),
                             DataError);
    }
}

TEST_CASE("toy_embed is a pure deterministic hash projection") {
    SUBCASE("determinism") {
        const auto a = toy_embed("how to fix bike chain", "chains and sprockets", 64, 7);
        const auto b = toy_embed("how to fix bike chain", "chains and sprockets", 64, 7);
        CHECK(a == b);
    }
    SUBCASE("different doc changes at least one coordinate") {
        const auto a = toy_embed("a", "b", 64, 0);
        const auto b = toy_embed("a", "c", 64, 0);
        CHECK((a - b).norm() > 0.0);
    }
    SUBCASE("different seed changes the embedding") {
        const auto a = toy_embed("query text", "doc text", 32, 1);
        const auto b = toy_embed("query text", "doc text", 32, 2);
        CHECK((a - b).norm() > 0.0);
    }
    SUBCASE("positive norm for any non-empty texts") {
        Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::string q(1 + rng.below(12), 'a'), d(1 + rng.below(12), 'b');
            for (auto& c : q) c = static_cast<char>('a' + rng.below(26));
            for (auto& c : d) c = static_cast<char>('a' + rng.below(26));
            CHECK(toy_embed(q, d, 16, trial).norm() > 0.0);
        }
    }
    SUBCASE("contract violations") {
        CHECK_THROWS_AS(toy_embed("q", "d", 1, 0), DataError);
        CHECK_THROWS_AS(toy_embed("", "d", 8, 0), DataError);
        CHECK_THROWS_AS(toy_embed("q", "", 8, 0), DataError);
    }
}

TEST_CASE("role names and uniqueness") {
    CHECK(role_from_name("elder") == Role::Elder);
    CHECK(role_name(Role::Original) == "original");
    CHECK(role_index(Role::Original) == 0);
    CHECK_THROWS_AS(role_from_name("robot"), DataError);

    QuerySet qs;
    qs.add({"q1", "text", Role::Original});
    qs.add({"q1", "text", Role::Woman});  // same qid, different role is fine
    CHECK_THROWS_AS(qs.add({"q1", "other", Role::Original}), DataError);
}

TEST_CASE("format_double survives a parse round trip") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-6, 6));
        CHECK(std::stod(format_double(v)) == v);
    }
}
