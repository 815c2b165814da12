#pragma once

#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypercube/bm25.hpp"
#include "hypercube/builder.hpp"
#include "hypercube/embedding.hpp"
#include "hypercube/index.hpp"
#include "hypercube/ranking.hpp"
#include "hypercube/retrieval.hpp"

namespace hypercube {

// ---------------------------------------------------------------------------
// Dense-scan baseline: exhaustive cosine over per-document pooled label
// embeddings. Stands in for encoder-based retrieval without shipping a model.

class DenseScanIndex {
public:
    DenseScanIndex(const HypercubeIndex& index, Embedder& embedder) {
        for (const auto& [id, rec] : index.doc_store()) {
            EmbeddingVector pooled(embedder.dimension(), 0.0);
            for (const auto& [dim, counts] : rec.labels) {
                for (const auto& [label, count] : counts) {
                    EmbeddingVector v = embedder.embed(label);
                    for (size_t i = 0; i < pooled.size(); ++i)
                        pooled[i] += static_cast<double>(count) * v[i];
                }
            }
            l2_normalize(pooled);  // label-free docs keep a zero vector
            doc_ids_.push_back(id);
            vectors_.push_back(std::move(pooled));
        }
    }

    size_t doc_count() const { return doc_ids_.size(); }

    static EmbeddingVector pool_query(const std::vector<QueryComponent>& components,
                                      Embedder& embedder) {
        EmbeddingVector pooled(embedder.dimension(), 0.0);
        for (const auto& c : components) {
            EmbeddingVector v = embedder.embed(c.content);
            for (size_t i = 0; i < pooled.size(); ++i) pooled[i] += v[i];
        }
        l2_normalize(pooled);
        return pooled;
    }

    /// Scores every stored document.
    std::vector<ScoredDoc> rank(const EmbeddingVector& query, size_t top_k) const {
        std::vector<ScoredDoc> scored;
        scored.reserve(doc_ids_.size());
        for (size_t i = 0; i < doc_ids_.size(); ++i)
            scored.push_back({doc_ids_[i], dot(query, vectors_[i])});
        std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
        });
        if (scored.size() > top_k) scored.resize(top_k);
        return scored;
    }

private:
    std::vector<std::string> doc_ids_;
    std::vector<EmbeddingVector> vectors_;
};

// ---------------------------------------------------------------------------
// Synthetic corpora: a small labeled core plus noise documents that carry no
// query-relevant labels, mimicking a large off-topic knowledge base.

struct SyntheticQuery {
    std::string text;
    std::vector<QueryComponent> components;
};

struct SyntheticCorpus {
    std::vector<CorpusDoc> docs;
    std::vector<DimensionSchema> dimensions;
    Gazetteer gazetteer;
    std::vector<SyntheticQuery> queries;
};

/// `noise_fraction` of the documents mention no gazetteer phrase at all, so
/// they land in no cube cell. Queries reference only labels the core docs
/// carry. Deterministic given the seed.
inline SyntheticCorpus make_synthetic_corpus(size_t size, double noise_fraction, uint64_t seed,
                                             size_t n_queries = 8) {
    SyntheticCorpus corpus;
    DimensionSchema topic{"topic", "subject of the report", "topics: {document}"};
    DimensionSchema place{"place", "site the report covers", "places: {document}"};
    corpus.dimensions = {topic, place};

    std::vector<std::string> topics, places;
    for (int i = 0; i < 12; ++i) topics.push_back("topic" + std::to_string(i));
    for (int i = 0; i < 12; ++i) places.push_back("site" + std::to_string(i));
    for (const auto& t : topics) corpus.gazetteer.add("topic", t);
    for (const auto& p : places) corpus.gazetteer.add("place", p);

    std::vector<std::string> filler = {"survey", "annual",  "figures", "section", "update",
                                       "review", "summary", "notes",   "draft",   "chapter"};

    std::mt19937_64 rng(seed);
    auto pick = [&](const std::vector<std::string>& pool) {
        return pool[rng() % pool.size()];
    };

    size_t noise_docs = static_cast<size_t>(static_cast<double>(size) * noise_fraction);
    for (size_t i = 0; i < size; ++i) {
        CorpusDoc doc;
        doc.doc_id = "d" + std::to_string(1000000 + i);
        std::ostringstream text;
        if (i < noise_docs) {
            for (int w = 0; w < 24; ++w) text << pick(filler) << ' ';
        } else {
            text << "field report covering " << pick(topics) << " measurements near "
                 << pick(places) << ". ";
            if (rng() % 2) text << "secondary readings on " << pick(topics) << ". ";
            for (int w = 0; w < 12; ++w) text << pick(filler) << ' ';
        }
        doc.text = text.str();
        corpus.docs.push_back(std::move(doc));
    }

    for (size_t q = 0; q < n_queries; ++q) {
        SyntheticQuery query;
        std::string t = pick(topics);
        std::string p = pick(places);
        query.text = t + " " + p;
        query.components = {{"topic", t}, {"place", p}};
        corpus.queries.push_back(std::move(query));
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Latency benchmark

struct BenchRow {
    std::string method;
    size_t corpus_size = 0;
    double median_ms = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;

    double median_ms(const std::string& method, size_t size) const {
        for (const auto& r : rows)
            if (r.method == method && r.corpus_size == size) return r.median_ms;
        throw DataError("bench: no row for " + method + " @ " + std::to_string(size));
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << "method,corpus_size,median_ms\n";
        for (const auto& r : rows)
            out << r.method << ',' << r.corpus_size << ',' << r.median_ms << '\n';
        return out.str();
    }
};

namespace detail {

inline double median(std::vector<double> samples) {
    if (samples.empty()) return 0.0;
    std::sort(samples.begin(), samples.end());
    size_t mid = samples.size() / 2;
    if (samples.size() % 2 == 1) return samples[mid];
    return 0.5 * (samples[mid - 1] + samples[mid]);
}

}  // namespace detail

struct LatencyBenchOptions {
    std::vector<size_t> sizes = {500, 1000, 2500, 5000};
    size_t repetitions = 5;
    double noise_fraction = 0.9;
    uint64_t seed = 42;
    size_t n_queries = 8;
};

/// Per (method, size) median retrieval time; index build time excluded.
/// Query representations (components, query strings, pooled query vectors)
/// are prepared outside the timers so timings cover matching and ranking
/// only. Runs strictly sequentially.
inline BenchResult latency_bench(const LatencyBenchOptions& options, Embedder& embedder) {
    if (options.sizes.size() < 3) throw UsageError("bench: need at least 3 corpus sizes");
    if (options.repetitions < 3) throw UsageError("bench: need at least 3 repetitions");

    BenchResult result;
    RetrievalConfig config;
    config.top_k = 5;

    for (size_t size : options.sizes) {
        SyntheticCorpus synth =
            make_synthetic_corpus(size, options.noise_fraction, options.seed, options.n_queries);

        GazetteerBackend backend(synth.gazetteer);
        IndexBuildResult built = index_corpus(synth.docs, synth.dimensions, backend);
        Bm25Index bm25 = Bm25Index::build(synth.docs);
        DenseScanIndex dense(built.index, embedder);

        std::vector<EmbeddingVector> query_vectors;
        for (const auto& q : synth.queries)
            query_vectors.push_back(DenseScanIndex::pool_query(q.components, embedder));

        std::vector<double> cube_ms, bm25_ms, dense_ms;
        for (size_t rep = 0; rep < options.repetitions; ++rep) {
            for (size_t qi = 0; qi < synth.queries.size(); ++qi) {
                const auto& q = synth.queries[qi];

                auto t0 = std::chrono::steady_clock::now();
                auto matches = retrieve(q.components, built.index, config, embedder);
                auto ranked = rank(matches, q.components.size(), config.top_k);
                auto t1 = std::chrono::steady_clock::now();
                cube_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                (void)ranked;

                t0 = std::chrono::steady_clock::now();
                auto bm25_ranked = bm25.rank(q.text, config.top_k);
                t1 = std::chrono::steady_clock::now();
                bm25_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                (void)bm25_ranked;

                t0 = std::chrono::steady_clock::now();
                auto dense_ranked = dense.rank(query_vectors[qi], config.top_k);
                t1 = std::chrono::steady_clock::now();
                dense_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
                (void)dense_ranked;
            }
        }
        result.rows.push_back({"hypercube", size, detail::median(std::move(cube_ms))});
        result.rows.push_back({"bm25", size, detail::median(std::move(bm25_ms))});
        result.rows.push_back({"dense-scan", size, detail::median(std::move(dense_ms))});
    }
    return result;
}

}  // namespace hypercube
