#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hypercube/builder.hpp"
#include "support/fixture.hpp"
#include "support/generators.hpp"

using namespace hypercube;

namespace {

// Hand-set vectors keyed by exact string; the blob-construction oracle.
class FixedEmbedder : public Embedder {
public:
    explicit FixedEmbedder(std::map<std::string, EmbeddingVector> table, size_t dim)
        : table_(std::move(table)), dim_(dim) {}
    size_t dimension() const override { return dim_; }
    EmbeddingVector embed(std::string_view text) override {
        auto it = table_.find(std::string(text));
        if (it == table_.end()) throw DataError("FixedEmbedder: unknown text " + std::string(text));
        return it->second;
    }

private:
    std::map<std::string, EmbeddingVector> table_;
    size_t dim_;
};

std::shared_ptr<LlmClient> scripted_client(std::shared_ptr<ScriptedChatBackend>& backend_out) {
    backend_out = std::make_shared<ScriptedChatBackend>();
    LlmOptions options;
    options.retry_base_ms = 0;
    return std::make_shared<LlmClient>(backend_out, PromptSet::defaults(), options);
}

}  // namespace

TEST_CASE("entity pool is the union of untyped extractions with frequencies") {
    Gazetteer g;
    g.add("location", "florida");
    g.add("theme", "rain");
    GazetteerBackend backend(g);
    std::vector<CorpusDoc> corpus = {
        {"a", "florida had rain"},
        {"b", "florida stayed dry"},
    };
    EntityPool pool = build_entity_pool(corpus, backend);
    CHECK(pool.entities == std::map<std::string, int>{{"florida", 2}, {"rain", 1}});
    CHECK(pool.failed_doc_ids.empty());
}

TEST_CASE("empty corpus is an error") {
    Gazetteer g;
    g.add("theme", "rain");
    GazetteerBackend backend(g);
    CHECK_THROWS_WITH(build_entity_pool({}, backend),
                      Catch::Matchers::ContainsSubstring("empty corpus"));
}

TEST_CASE("pool equals the phrase inventory on constructed corpora") {
    Gazetteer g;
    std::vector<std::string> inventory = {"storm", "flood", "drought", "harvest"};
    for (const auto& p : inventory) g.add("topic", p);
    GazetteerBackend backend(g);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        std::map<std::string, int> expected;
        std::vector<CorpusDoc> corpus;
        size_t docs = 1 + rng() % 6;
        for (size_t d = 0; d < docs; ++d) {
            std::string text;
            size_t words = 1 + rng() % 10;
            for (size_t w = 0; w < words; ++w) {
                const auto& p = inventory[rng() % inventory.size()];
                text += p + " ";
                expected[p] += 1;
            }
            corpus.push_back({"d" + std::to_string(d), text});
        }
        EntityPool pool = build_entity_pool(corpus, backend);
        CHECK(pool.entities == expected);
    }
}

TEST_CASE("per-document failures are collected, others continue") {
    struct FlakyBackend : ExtractionBackend {
        ExtractionResult extract(const std::string& doc_id, const std::string& text,
                                 const DimensionSchema& dim) override {
            if (text == "boom") throw BackendError("backend exploded");
            ExtractionResult r;
            r.doc_id = doc_id;
            r.dimension = dim.name;
            if (!text.empty()) r.labels[text] = 1;
            return r;
        }
        LabelCounts extract_untyped(const std::string& text) override {
            if (text == "boom") throw BackendError("backend exploded");
            LabelCounts c;
            if (!text.empty()) c[text] = 1;
            return c;
        }
        size_t max_parallelism() const override { return 2; }
    } backend;

    std::vector<CorpusDoc> corpus = {{"ok1", "alpha"}, {"bad", "boom"}, {"ok2", "beta"}};
    EntityPool pool = build_entity_pool(corpus, backend);
    CHECK(pool.failed_doc_ids == std::vector<std::string>{"bad"});
    CHECK(pool.entities.size() == 2);
}

TEST_CASE("cluster_entities validates k and is deterministic given the seed") {
    EntityPool pool;
    for (const char* e : {"aa", "bb", "cc", "dd"}) pool.entities[e] = 1;
    TrigramEmbedder embedder;
    CHECK_THROWS_AS(cluster_entities(pool, embedder, 0, 42), DataError);
    CHECK_THROWS_AS(cluster_entities(pool, embedder, 5, 42), DataError);

    EntityClusters a = cluster_entities(pool, embedder, 2, 42);
    EntityClusters b = cluster_entities(pool, embedder, 2, 42);
    CHECK(a.entities == b.entities);
    CHECK(a.clusters.assignments == b.clusters.assignments);
}

TEST_CASE("hand-set blob vectors cluster by blob membership") {
    std::map<std::string, EmbeddingVector> table = {
        {"florida", {0.0, 0.1}}, {"texas", {0.1, 0.0}},   {"miami", {0.05, 0.05}},
        {"rain", {9.0, 9.1}},    {"drought", {9.1, 9.0}},
    };
    FixedEmbedder embedder(table, 2);
    EntityPool pool;
    for (const auto& [name, v] : table) pool.entities[name] = 1;

    EntityClusters clustered = cluster_entities(pool, embedder, 2, 42);
    std::map<std::string, int> by_name;
    for (size_t i = 0; i < clustered.entities.size(); ++i)
        by_name[clustered.entities[i]] = clustered.clusters.assignments[i];
    CHECK(by_name["florida"] == by_name["texas"]);
    CHECK(by_name["florida"] == by_name["miami"]);
    CHECK(by_name["rain"] == by_name["drought"]);
    CHECK(by_name["florida"] != by_name["rain"]);
}

TEST_CASE("summarize_clusters produces one candidate per cluster via the scripted llm") {
    std::map<std::string, EmbeddingVector> table = {
        {"florida", {0.0, 0.1}}, {"texas", {0.1, 0.0}}, {"rain", {9.0, 9.1}},
    };
    FixedEmbedder embedder(table, 2);
    EntityPool pool;
    for (const auto& [name, v] : table) pool.entities[name] = 1;
    EntityClusters clustered = cluster_entities(pool, embedder, 2, 42);

    std::shared_ptr<ScriptedChatBackend> scripted;
    auto client = scripted_client(scripted);

    // Script one summary per cluster, keyed by the exact rendered prompt.
    for (size_t c = 0; c < 2; ++c) {
        std::vector<std::string> members;
        for (size_t i = 0; i < clustered.entities.size(); ++i)
            if (clustered.clusters.assignments[i] == static_cast<int>(c))
                members.push_back(clustered.entities[i]);
        // Members are ranked by centroid distance; with these blobs the
        // lexicographic order coincides for the two-member cluster.
        std::string reply = members.size() > 1 ? "location: places such as states and cities"
                                               : "theme: weather phenomena";
        scripted->script(client->options().chat_model,
                         client->render("summarize", {{"entities", join(members, ", ")}}), reply);
    }

    auto candidates = summarize_clusters(clustered, 30, *client, embedder);
    REQUIRE(candidates.size() == 2);
    std::set<std::string> names;
    for (const auto& c : candidates) {
        CHECK_FALSE(c.unresolved);
        CHECK_FALSE(c.summary.empty());
        CHECK_FALSE(c.proposed_name.empty());
        names.insert(c.proposed_name);
    }
    CHECK(names == std::set<std::string>{"location", "theme"});
}

TEST_CASE("single-entity cluster still produces a candidate; llm failure marks unresolved") {
    std::map<std::string, EmbeddingVector> table = {{"solo", {1.0, 0.0}}};
    FixedEmbedder embedder(table, 2);
    EntityPool pool;
    pool.entities["solo"] = 1;
    EntityClusters clustered = cluster_entities(pool, embedder, 1, 42);

    std::shared_ptr<ScriptedChatBackend> scripted;
    auto client = scripted_client(scripted);  // nothing scripted: summarize fails

    auto candidates = summarize_clusters(clustered, 30, *client, embedder);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0].unresolved);
    CHECK(candidates[0].proposed_name == "cluster_0");
}

TEST_CASE("consolidate merges via the scripted llm") {
    std::vector<DimensionCandidate> candidates = {
        {0, "cities and towns", "city", false},
        {1, "countries", "country", false},
    };
    std::shared_ptr<ScriptedChatBackend> scripted;
    auto client = scripted_client(scripted);

    std::vector<std::string> lines = {"- city: cities and towns", "- country: countries"};
    scripted->script(
        client->options().chat_model,
        client->render("consolidate", {{"candidates", join(lines, "\n")}}),
        "[{\"name\": \"location\", \"description\": \"geographic places\"}]");

    ConsolidationResult result = consolidate_dimensions(candidates, *client);
    CHECK_FALSE(result.fallback_used);
    REQUIRE(result.dimensions.size() == 1);
    CHECK(result.dimensions[0].name == "location");
    CHECK(result.dimensions[0].prompt_template.find("{document}") != std::string::npos);
}

TEST_CASE("duplicate candidate names collapse, llm failure falls back to one per candidate") {
    std::vector<DimensionCandidate> candidates = {
        {0, "places", "location", false},
        {1, "more places", "location", false},
        {2, "dates", "date", false},
    };
    std::shared_ptr<ScriptedChatBackend> scripted;
    auto client = scripted_client(scripted);  // unscripted: consolidation falls back

    ConsolidationResult result = consolidate_dimensions(candidates, *client);
    CHECK(result.fallback_used);
    REQUIRE(result.dimensions.size() == 2);
    CHECK(result.dimensions[0].name == "location");
    CHECK(result.dimensions[1].name == "date");
}

TEST_CASE("consolidation never drops all candidates") {
    std::vector<DimensionCandidate> candidates = {{0, "stuff", "stuff", false}};
    std::shared_ptr<ScriptedChatBackend> scripted;
    auto client = scripted_client(scripted);
    std::vector<std::string> lines = {"- stuff: stuff"};
    scripted->script(client->options().chat_model,
                     client->render("consolidate", {{"candidates", join(lines, "\n")}}), "[]");
    ConsolidationResult result = consolidate_dimensions(candidates, *client);
    CHECK(result.fallback_used);  // empty reply falls back
    CHECK(result.dimensions.size() == 1);
}

TEST_CASE("scripted replay consolidates into the six geoscience dimensions") {
    std::vector<DimensionCandidate> candidates = {
        {0, "states, cities, specific places", "places", false},
        {1, "people quoted in reports", "people", false},
        {2, "named storms and disasters", "storms", false},
        {3, "agencies and institutes", "agencies", false},
        {4, "weather and climate topics", "topics", false},
        {5, "years and calendar dates", "years", false},
    };
    std::shared_ptr<ScriptedChatBackend> scripted;
    auto client = scripted_client(scripted);

    std::vector<std::string> lines;
    for (const auto& c : candidates) lines.push_back("- " + c.proposed_name + ": " + c.summary);
    scripted->script(client->options().chat_model,
                     client->render("consolidate", {{"candidates", join(lines, "\n")}}),
                     "[{\"name\": \"location\", \"description\": \"places\"},"
                     " {\"name\": \"person\", \"description\": \"people\"},"
                     " {\"name\": \"event\", \"description\": \"named events\"},"
                     " {\"name\": \"organization\", \"description\": \"agencies\"},"
                     " {\"name\": \"theme\", \"description\": \"topics\"},"
                     " {\"name\": \"date\", \"description\": \"dates\"}]");

    ConsolidationResult result = consolidate_dimensions(candidates, *client);
    CHECK_FALSE(result.fallback_used);
    std::vector<std::string> names;
    for (const auto& d : result.dimensions) names.push_back(d.name);
    CHECK(names == std::vector<std::string>{"location", "person", "event", "organization",
                                            "theme", "date"});
}

TEST_CASE("index_corpus rejects zero dimensions and empty corpora") {
    GazetteerBackend backend(fixture::load_gazetteer());
    CHECK_THROWS_WITH(index_corpus(fixture::load_corpus(), {}, backend),
                      Catch::Matchers::ContainsSubstring("no dimensions"));
    CHECK_THROWS_AS(index_corpus({}, fixture::load_schema(), backend), DataError);
}

TEST_CASE("index_corpus over the fixture satisfies the case-study lookups") {
    GazetteerBackend backend(fixture::load_gazetteer());
    IndexBuildResult result = index_corpus(fixture::load_corpus(), fixture::load_schema(), backend);
    CHECK(result.report.docs_indexed == 10);
    CHECK(result.report.failures.empty());

    const auto& plist = result.index.lookup("theme", "rain");
    REQUIRE(plist.size() == 1);
    CHECK(plist[0].doc_id == "565");
    CHECK(plist[0].count == 5);
    CHECK(result.index.lookup("event", "tropical storm fay").size() == 2);
}

TEST_CASE("index lookups equal a scan over extraction results") {
    GazetteerBackend backend(fixture::load_gazetteer());
    auto corpus = fixture::load_corpus();
    auto schema = fixture::load_schema();
    IndexBuildResult result = index_corpus(corpus, schema, backend);

    for (const auto& doc : corpus) {
        for (const auto& dim : schema) {
            auto extracted = backend.extract(doc.doc_id, doc.text, dim);
            for (const auto& [label, count] : extracted.labels) {
                bool found = false;
                for (const auto& p : result.index.lookup(dim.name, label))
                    if (p.doc_id == doc.doc_id && p.count == count) found = true;
                INFO(doc.doc_id << " " << dim.name << " " << label);
                CHECK(found);
            }
        }
    }
}

TEST_CASE("build fails when too many documents fail extraction") {
    struct FailingBackend : ExtractionBackend {
        ExtractionResult extract(const std::string& doc_id, const std::string&,
                                 const DimensionSchema& dim) override {
            if (doc_id != "ok") throw BackendError("nope");
            ExtractionResult r;
            r.doc_id = doc_id;
            r.dimension = dim.name;
            return r;
        }
        LabelCounts extract_untyped(const std::string&) override { return {}; }
        size_t max_parallelism() const override { return 1; }
    } backend;

    std::vector<CorpusDoc> corpus = {{"ok", "x"}, {"bad1", "x"}, {"bad2", "x"}};
    std::vector<DimensionSchema> dims = {{"topic", "", "t: {document}"}};
    CHECK_THROWS_WITH(index_corpus(corpus, dims, backend),
                      Catch::Matchers::ContainsSubstring("bad1"));

    IndexBuildOptions loose;
    loose.max_failure_fraction = 0.7;
    IndexBuildResult result = index_corpus(corpus, dims, backend, loose);
    CHECK(result.report.docs_indexed == 1);
    CHECK(result.report.failures.size() == 2);
}

TEST_CASE("fixed inputs give byte-identical persisted indexes across runs") {
    fixture::TempDir tmp("hypercube-builder-determinism");
    for (const char* run : {"r1", "r2"}) {
        GazetteerBackend backend(fixture::load_gazetteer());
        IndexBuildResult result =
            index_corpus(fixture::load_corpus(), fixture::load_schema(), backend);
        result.index.save(tmp.path() / run);
    }
    for (const char* file : {"schema.json", "docs.jsonl", "postings.jsonl"}) {
        INFO(file);
        CHECK(read_file(tmp.path() / "r1" / file) == read_file(tmp.path() / "r2" / file));
    }
}
