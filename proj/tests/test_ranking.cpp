#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hypercube/ranking.hpp"
#include "support/fixture.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace hypercube;

namespace {

MatchResult candidate(const std::string& id, std::set<size_t> covered, int exact,
                      long long freq) {
    MatchResult m;
    m.doc_id = id;
    m.covered = std::move(covered);
    m.exact_score = exact;
    m.freq_sum = freq;
    return m;
}

std::vector<MatchResult> random_candidates(std::mt19937_64& rng, size_t n_components) {
    size_t n = rng() % 40;
    std::vector<MatchResult> out;
    for (size_t i = 0; i < n; ++i) {
        MatchResult m;
        m.doc_id = "doc" + std::to_string(100 + i);
        size_t coverage = rng() % (n_components + 1);  // may be zero
        for (size_t c = 0; c < coverage; ++c) m.covered.insert(rng() % n_components);
        m.exact_score = static_cast<int>(rng() % (m.covered.size() + 1));
        m.freq_sum = static_cast<long long>(rng() % 10);
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace

TEST_CASE("case-study candidates rank full coverage first, then by the tie chain") {
    std::vector<MatchResult> candidates = {
        candidate("565", {0, 1, 2}, 3, 7),
        candidate("246", {1}, 1, 1),
        candidate("535", {1}, 1, 1),
    };
    // 246 has the same coverage/exact/freq as 535; doc_id breaks the tie.
    RankedList ranked = rank(candidates, 3, 3);
    REQUIRE(ranked.entries.size() == 3);
    CHECK(ranked.entries[0].doc_id == "565");
    CHECK(ranked.entries[0].tier == CoverageTier::full);
    CHECK(ranked.entries[1].doc_id == "246");
    CHECK(ranked.entries[1].tier == CoverageTier::partial);
    CHECK(ranked.entries[2].doc_id == "535");
}

TEST_CASE("single full-coverage candidate ranks alone") {
    RankedList ranked = rank({candidate("d", {0, 1}, 2, 4)}, 2, 5);
    REQUIRE(ranked.entries.size() == 1);
    CHECK(ranked.entries[0].doc_id == "d");
    CHECK(ranked.entries[0].tier == CoverageTier::full);
}

TEST_CASE("empty candidates give an empty ranking, n_components must be positive") {
    CHECK(rank({}, 3, 5).entries.empty());
    CHECK_THROWS_AS(rank({}, 0, 5), DataError);
}

TEST_CASE("zero-coverage candidates are excluded and do not disturb the list") {
    std::vector<MatchResult> base = {
        candidate("a", {0}, 1, 2),
        candidate("b", {1}, 1, 9),
    };
    RankedList before = rank(base, 2, 5);
    base.push_back(candidate("zero", {}, 0, 99));
    RankedList after = rank(base, 2, 5);
    REQUIRE(before.entries.size() == after.entries.size());
    for (size_t i = 0; i < before.entries.size(); ++i)
        CHECK(before.entries[i].doc_id == after.entries[i].doc_id);
}

TEST_CASE("random candidate sets match a brute-force sort with the same comparator") {
    for (uint64_t seed = 0; seed < 150; ++seed) {
        std::mt19937_64 rng(seed);
        size_t n_components = 1 + rng() % 5;
        auto candidates = random_candidates(rng, n_components);
        size_t top_k = 1 + rng() % 10;

        RankedList actual = rank(candidates, n_components, top_k);
        auto expected = oracle::scan_rank(candidates, n_components, top_k);

        INFO("seed=" << seed);
        REQUIRE(actual.entries.size() == expected.size());
        for (size_t i = 0; i < expected.size(); ++i) {
            CHECK(actual.entries[i].doc_id == expected[i].doc_id);
            CHECK(actual.entries[i].coverage == expected[i].coverage);
            CHECK(actual.entries[i].exact_score == expected[i].exact_score);
            CHECK(actual.entries[i].freq_sum == expected[i].freq_sum);
        }
    }
}

TEST_CASE("tier dominance, stability, prefix consistency on random sets") {
    for (uint64_t seed = 0; seed < 1200; ++seed) {
        std::mt19937_64 rng(seed);
        size_t n_components = 1 + rng() % 5;
        auto candidates = random_candidates(rng, n_components);
        size_t top_k = 1 + rng() % 8;

        RankedList ranked = rank(candidates, n_components, top_k);
        INFO("seed=" << seed);

        // No partial-coverage doc ever outranks a full-coverage doc.
        bool seen_partial = false;
        for (const auto& e : ranked.entries) {
            if (e.tier == CoverageTier::partial) seen_partial = true;
            if (e.tier == CoverageTier::full) CHECK_FALSE(seen_partial);
            CHECK(e.coverage >= 1);
        }

        // Truncation: rank at top_k is a prefix of rank at top_k + 1.
        RankedList wider = rank(candidates, n_components, top_k + 1);
        REQUIRE(wider.entries.size() >= ranked.entries.size());
        for (size_t i = 0; i < ranked.entries.size(); ++i)
            CHECK(wider.entries[i].doc_id == ranked.entries[i].doc_id);

        // Determinism: equal inputs, equal outputs.
        RankedList again = rank(candidates, n_components, top_k);
        REQUIRE(again.entries.size() == ranked.entries.size());
        for (size_t i = 0; i < ranked.entries.size(); ++i)
            CHECK(again.entries[i].doc_id == ranked.entries[i].doc_id);
    }
}

// --- explain ---------------------------------------------------------------------

TEST_CASE("explanation of doc 565 reproduces its case-study row") {
    HypercubeIndex index = fixture::build_index();
    TrigramEmbedder embedder;
    std::vector<QueryComponent> components = {{"location", "melbourne beach"},
                                              {"event", "tropical storm fay"},
                                              {"theme", "rainfall"}};
    RetrievalConfig config;
    config.tau = 0.5;
    auto matches = retrieve(components, index, config, embedder);

    const MatchResult* m565 = nullptr;
    for (const auto& m : matches)
        if (m.doc_id == "565") m565 = &m;
    REQUIRE(m565);

    ExplanationRecord record = explain(*m565, index, components);
    std::map<std::string, LabelCounts> expected = {
        {"location", {{"melbourne beach", 1}}},
        {"event", {{"tropical storm fay", 1}}},
        {"theme", {{"rain", 5}}},
    };
    CHECK(record.matched_counts() == expected);
    CHECK(record.matched.at("theme").at("rain").components == std::vector<size_t>{2});
}

TEST_CASE("zero-coverage doc explains to an empty match map") {
    HypercubeIndex index = fixture::build_index();
    MatchResult m;
    m.doc_id = "101";
    ExplanationRecord record = explain(m, index, {{"theme", "rain"}});
    CHECK(record.matched.empty());
}

TEST_CASE("explaining an unknown doc is an error") {
    HypercubeIndex index = fixture::build_index();
    MatchResult m;
    m.doc_id = "ghost";
    CHECK_THROWS_AS(explain(m, index, {{"theme", "rain"}}), DataError);
}

TEST_CASE("explanation labels are a subset of the doc's stored labels") {
    for (uint64_t seed = 400; seed < 440; ++seed) {
        std::mt19937_64 rng(seed);
        auto docs = gen::random_corpus(rng, 60);
        HypercubeIndex index = gen::build_index(docs);
        auto components = gen::random_components(rng, 4);
        TrigramEmbedder embedder;
        RetrievalConfig config;
        config.tau = 0.7;

        for (const auto& m : retrieve(components, index, config, embedder)) {
            ExplanationRecord record = explain(m, index, components);
            const DocumentRecord& doc = index.doc(m.doc_id);
            for (const auto& [dim, labels] : record.matched) {
                REQUIRE(doc.labels.count(dim) == 1);
                for (const auto& [label, e] : labels) {
                    INFO("seed=" << seed << " doc=" << m.doc_id << " " << dim << "/" << label);
                    REQUIRE(doc.labels.at(dim).count(label) == 1);
                    CHECK(doc.labels.at(dim).at(label) == e.count);
                }
            }
        }
    }
}
