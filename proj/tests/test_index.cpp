#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hypercube/index.hpp"
#include "support/fixture.hpp"
#include "support/generators.hpp"
#include "hypercube/parallel.hpp"
#include "support/oracles.hpp"

using namespace hypercube;

namespace {

DocumentRecord make_doc(const std::string& id,
                        std::map<std::string, LabelCounts> labels) {
    DocumentRecord d;
    d.doc_id = id;
    d.text = "text of " + id;
    d.labels = std::move(labels);
    return d;
}

std::vector<std::pair<std::string, int>> as_pairs(const HypercubeIndex::PostingList& plist) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& p : plist) out.emplace_back(p.doc_id, p.count);
    return out;
}

}  // namespace

TEST_CASE("add_document makes the doc reachable through every label pair") {
    HypercubeIndex index(gen::test_schema());
    index.add_document(make_doc("565", {{"topic", {{"rain", 5}}},
                                        {"place", {{"melbourne beach", 1}}},
                                        {"actor", {{"fay", 1}}}}));
    CHECK(as_pairs(index.lookup("topic", "rain")) ==
          std::vector<std::pair<std::string, int>>{{"565", 5}});
    CHECK(as_pairs(index.lookup("place", "melbourne beach")) ==
          std::vector<std::pair<std::string, int>>{{"565", 1}});
    CHECK(index.doc("565").text == "text of 565");
}

TEST_CASE("document with no labels is stored but reachable by no lookup") {
    HypercubeIndex index(gen::test_schema());
    index.add_document(make_doc("empty", {}));
    CHECK(index.has_doc("empty"));
    for (const auto& d : index.dimensions())
        CHECK(index.dimension_postings(d.name).empty());
}

TEST_CASE("duplicate doc_id is rejected with the identifier") {
    HypercubeIndex index(gen::test_schema());
    index.add_document(make_doc("d1", {{"topic", {{"storm", 1}}}}));
    CHECK_THROWS_WITH(index.add_document(make_doc("d1", {})),
                      Catch::Matchers::ContainsSubstring("d1"));
}

TEST_CASE("unknown dimension is rejected naming the valid dimensions") {
    HypercubeIndex index(gen::test_schema());
    CHECK_THROWS_WITH(index.add_document(make_doc("d1", {{"bogus", {{"x", 1}}}})),
                      Catch::Matchers::ContainsSubstring("bogus") &&
                          Catch::Matchers::ContainsSubstring("topic"));
    CHECK_THROWS_WITH(index.lookup("nope", "x"),
                      Catch::Matchers::ContainsSubstring("valid dimensions"));
}

TEST_CASE("count below one is rejected") {
    HypercubeIndex index(gen::test_schema());
    CHECK_THROWS_AS(index.add_document(make_doc("d1", {{"topic", {{"storm", 0}}}})), DataError);
}

TEST_CASE("labels must arrive normalized") {
    HypercubeIndex index(gen::test_schema());
    CHECK_THROWS_AS(index.add_document(make_doc("d1", {{"topic", {{"Storm", 1}}}})), DataError);
    CHECK_THROWS_AS(index.add_document(make_doc("d2", {{"topic", {{" storm ", 1}}}})), DataError);
}

TEST_CASE("duplicate dimension names are rejected at construction") {
    std::vector<DimensionSchema> dims = {
        {"topic", "", "t: {document}"},
        {"topic", "", "t2: {document}"},
    };
    CHECK_THROWS_AS(HypercubeIndex(dims), DataError);
}

TEST_CASE("lookup on an unpopulated cell returns an empty list") {
    HypercubeIndex index(gen::test_schema());
    index.add_document(make_doc("d1", {{"topic", {{"storm", 1}}}}));
    CHECK(index.lookup("place", "atlantis").empty());
}

TEST_CASE("cell with a single assignment equals lookup on that pair") {
    HypercubeIndex index(gen::test_schema());
    index.add_document(make_doc("a", {{"topic", {{"storm", 2}}}}));
    index.add_document(make_doc("b", {{"topic", {{"storm", 1}}}}));
    CubeCellRef cell{{{"topic", "storm"}}};
    std::set<std::string> expected{"a", "b"};
    CHECK(index.cell_docs(cell) == expected);
}

TEST_CASE("cell_docs rejects an empty cell") {
    HypercubeIndex index(gen::test_schema());
    CHECK_THROWS_AS(index.cell_docs(CubeCellRef{}), DataError);
}

TEST_CASE("fixture carries the case-study postings") {
    HypercubeIndex index = fixture::build_index();

    auto rain = as_pairs(index.lookup("theme", "rain"));
    REQUIRE(rain.size() == 1);
    CHECK(rain[0] == std::pair<std::string, int>{"565", 5});

    auto fay = as_pairs(index.lookup("event", "tropical storm fay"));
    REQUIRE(fay.size() == 2);
    CHECK(fay[0].first == "246");
    CHECK(fay[1].first == "565");

    CHECK(index.lookup("location", "atlantis").empty());

    CubeCellRef cell{{{"location", "melbourne beach"}, {"event", "tropical storm fay"}}};
    CHECK(index.cell_docs(cell) == std::set<std::string>{"565"});
}

TEST_CASE("lookup and cell_docs equal the scan oracle on random corpora") {
    for (uint64_t seed = 0; seed < 120; ++seed) {
        std::mt19937_64 rng(seed);
        auto docs = gen::random_corpus(rng, 200);
        HypercubeIndex index = gen::build_index(docs);

        for (int probe = 0; probe < 10; ++probe) {
            std::string dim = gen::test_schema()[rng() % 3].name;
            std::string label = gen::random_label(rng);
            INFO("seed=" << seed << " dim=" << dim << " label=" << label);
            CHECK(as_pairs(index.lookup(dim, label)) == oracle::scan_lookup(docs, dim, label));
        }

        CubeCellRef cell;
        cell.assignments[gen::test_schema()[rng() % 3].name] = gen::random_label(rng);
        cell.assignments[gen::test_schema()[rng() % 3].name] = gen::random_label(rng);
        CHECK(index.cell_docs(cell) == oracle::scan_cell(docs, cell.assignments));
    }
}

TEST_CASE("save then load reproduces every lookup") {
    std::mt19937_64 rng(7);
    auto docs = gen::random_corpus(rng, 60);
    HypercubeIndex index = gen::build_index(docs);

    fixture::TempDir tmp("hypercube-index-roundtrip");
    index.save(tmp.path() / "idx");
    HypercubeIndex loaded = HypercubeIndex::load(tmp.path() / "idx");

    REQUIRE(loaded.doc_count() == index.doc_count());
    for (const auto& dim : index.dimensions()) {
        const auto& vocab = index.dimension_postings(dim.name);
        const auto& loaded_vocab = loaded.dimension_postings(dim.name);
        REQUIRE(loaded_vocab.size() == vocab.size());
        for (const auto& [label, plist] : vocab)
            CHECK(as_pairs(loaded.lookup(dim.name, label)) == as_pairs(plist));
    }
}

TEST_CASE("insertion order does not change the serialized index") {
    std::mt19937_64 rng(11);
    auto docs = gen::random_corpus(rng, 50);

    HypercubeIndex forward = gen::build_index(docs);
    auto reversed = docs;
    std::reverse(reversed.begin(), reversed.end());
    HypercubeIndex backward = gen::build_index(reversed);

    fixture::TempDir tmp("hypercube-index-order");
    forward.save(tmp.path() / "a");
    backward.save(tmp.path() / "b");
    for (const char* file : {"schema.json", "docs.jsonl", "postings.jsonl"}) {
        INFO(file);
        CHECK(read_file(tmp.path() / "a" / file) == read_file(tmp.path() / "b" / file));
    }
}

TEST_CASE("a built index serves concurrent readers") {
    HypercubeIndex index = fixture::build_index();
    std::vector<std::string> failures(8);
    parallel_for(8, 8, [&](size_t worker) {
        for (int i = 0; i < 200; ++i) {
            const auto& plist = index.lookup("event", "tropical storm fay");
            if (plist.size() != 2 || plist[1].doc_id != "565")
                failures[worker] = "lookup mismatch";
            CubeCellRef cell{{{"location", "melbourne beach"}}};
            if (index.cell_docs(cell) != std::set<std::string>{"565"})
                failures[worker] = "cell mismatch";
        }
    });
    for (const auto& f : failures) CHECK(f.empty());
}

TEST_CASE("load rejects a corrupt index directory") {
    fixture::TempDir tmp("hypercube-index-corrupt");
    HypercubeIndex index(gen::test_schema());
    index.add_document(make_doc("d1", {{"topic", {{"storm", 2}}}}));
    index.save(tmp.path() / "idx");
    // Posting that references a doc the store does not know.
    write_file_atomic(tmp.path() / "idx" / "postings.jsonl",
                      "{\"dimension\":\"topic\",\"label\":\"storm\",\"postings\":[[\"ghost\",2]]}\n");
    CHECK_THROWS_AS(HypercubeIndex::load(tmp.path() / "idx"), DataError);
}
