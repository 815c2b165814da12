#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hypercube/clustering.hpp"
#include "hypercube/extraction.hpp"
#include "hypercube/index.hpp"
#include "hypercube/io.hpp"
#include "hypercube/parallel.hpp"

namespace hypercube {

// ---------------------------------------------------------------------------
// Dimension discovery: entity pool -> clusters -> summaries -> dimensions

struct EntityPool {
    std::map<std::string, int> entities;  // normalized label -> corpus frequency
    std::vector<std::string> failed_doc_ids;

    Json to_json() const {
        Json ents = Json::object();
        for (const auto& [label, freq] : entities) ents[label] = freq;
        return Json{{"entities", std::move(ents)}, {"failed_doc_ids", failed_doc_ids}};
    }

    static EntityPool from_json(const Json& j) {
        EntityPool p;
        for (const auto& [label, freq] : j.at("entities").items())
            p.entities[label] = freq.get<int>();
        if (j.contains("failed_doc_ids"))
            for (const auto& id : j.at("failed_doc_ids"))
                p.failed_doc_ids.push_back(id.get<std::string>());
        return p;
    }
};

/// Union of untyped extractions over the corpus. Per-document failures are
/// collected and reported; only an empty corpus is fatal.
inline EntityPool build_entity_pool(const std::vector<CorpusDoc>& corpus,
                                    ExtractionBackend& backend) {
    if (corpus.empty()) throw DataError("empty corpus");
    std::vector<LabelCounts> per_doc(corpus.size());
    std::vector<std::string> failures(corpus.size());
    parallel_for(corpus.size(), backend.max_parallelism(), [&](size_t i) {
        try {
            per_doc[i] = backend.extract_untyped(corpus[i].text);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });
    EntityPool pool;
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (!failures[i].empty()) {
            pool.failed_doc_ids.push_back(corpus[i].doc_id);
            continue;
        }
        for (const auto& [label, count] : per_doc[i]) pool.entities[label] += count;
    }
    return pool;
}

struct EntityClusters {
    std::vector<std::string> entities;  // index-aligned with cluster assignments
    ClusterSet clusters;

    Json to_json() const {
        Json assign = Json::object();
        for (size_t i = 0; i < entities.size(); ++i)
            assign[entities[i]] = clusters.assignments[i];
        return Json{{"k", clusters.k},
                    {"inertia", clusters.inertia},
                    {"iterations", clusters.iterations},
                    {"assignments", std::move(assign)}};
    }
};

/// Embeds every pool entity and clusters the vectors. Entities are ordered
/// lexicographically before clustering so the result depends only on
/// (pool, embedder, k, seed).
inline EntityClusters cluster_entities(const EntityPool& pool, Embedder& embedder, size_t k,
                                       uint64_t seed) {
    if (k == 0) throw DataError("cluster_entities: k must be positive");
    if (k > pool.entities.size())
        throw DataError("cluster_entities: k (" + std::to_string(k) + ") exceeds pool size (" +
                        std::to_string(pool.entities.size()) + ")");
    EntityClusters result;
    for (const auto& [label, _] : pool.entities) result.entities.push_back(label);
    std::vector<EmbeddingVector> points;
    points.reserve(result.entities.size());
    for (const auto& e : result.entities) points.push_back(embedder.embed(e));
    result.clusters = KMeans(k, seed).fit(points);
    return result;
}

struct DimensionCandidate {
    int cluster_id = 0;
    std::string summary;
    std::string proposed_name;  // normalized identifier, never empty
    bool unresolved = false;    // summarization backend failed for this cluster

    Json to_json() const {
        return Json{{"cluster_id", cluster_id},
                    {"summary", summary},
                    {"proposed_name", proposed_name},
                    {"unresolved", unresolved}};
    }

    static DimensionCandidate from_json(const Json& j) {
        DimensionCandidate c;
        c.cluster_id = j.at("cluster_id").get<int>();
        c.summary = j.value("summary", "");
        c.proposed_name = j.at("proposed_name").get<std::string>();
        c.unresolved = j.value("unresolved", false);
        return c;
    }
};

namespace detail {

/// Lowercased identifier: word characters kept, runs of anything else
/// collapse to single underscores.
inline std::string slugify(const std::string& text, const std::string& fallback) {
    std::string out;
    bool pending = false;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '_') {
            if (pending && !out.empty()) out.push_back('_');
            pending = false;
            out.push_back(ascii_lower(c));
        } else {
            pending = true;
        }
    }
    return out.empty() ? fallback : out;
}

}  // namespace detail

/// One candidate per cluster. The summarization prompt sees up to
/// sample_size entities nearest the centroid (ties broken lexicographically);
/// replies of the form "name: description" yield the name, anything else is
/// slugged from the leading words. A failed chat call marks the candidate
/// unresolved and the pipeline continues.
inline std::vector<DimensionCandidate> summarize_clusters(const EntityClusters& clustered,
                                                          size_t sample_size, LlmClient& llm,
                                                          Embedder& embedder) {
    std::vector<DimensionCandidate> candidates;
    for (size_t c = 0; c < clustered.clusters.k; ++c) {
        std::vector<std::pair<double, std::string>> members;  // (centroid distance, entity)
        for (size_t i = 0; i < clustered.entities.size(); ++i) {
            if (clustered.clusters.assignments[i] != static_cast<int>(c)) continue;
            double d = detail::squared_distance(embedder.embed(clustered.entities[i]),
                                                clustered.clusters.centroids[c]);
            members.emplace_back(d, clustered.entities[i]);
        }
        if (members.empty())
            throw DataError("summarize_clusters: cluster " + std::to_string(c) + " is empty");
        std::sort(members.begin(), members.end());

        std::vector<std::string> sample;
        for (size_t i = 0; i < members.size() && i < sample_size; ++i)
            sample.push_back(members[i].second);

        DimensionCandidate cand;
        cand.cluster_id = static_cast<int>(c);
        std::string fallback_name = "cluster_" + std::to_string(c);
        try {
            std::string reply = llm.chat("summarize", {{"entities", join(sample, ", ")}});
            size_t colon = reply.find(':');
            if (colon != std::string::npos && colon > 0 && colon < 64) {
                cand.proposed_name = detail::slugify(reply.substr(0, colon), fallback_name);
                std::string rest = reply.substr(colon + 1);
                cand.summary = normalize_text(rest).empty() ? reply : rest;
            } else {
                cand.summary = reply;
                std::string head = reply.substr(0, std::min<size_t>(reply.size(), 48));
                cand.proposed_name = detail::slugify(head, fallback_name);
            }
            while (!cand.summary.empty() &&
                   is_ascii_space(static_cast<unsigned char>(cand.summary.front())))
                cand.summary.erase(cand.summary.begin());
        } catch (const BackendError&) {
            cand.unresolved = true;
            cand.proposed_name = fallback_name;
        }
        candidates.push_back(std::move(cand));
    }
    return candidates;
}

/// Per-dimension extraction prompt assembled from a consolidated name and
/// description. Exactly one {document} placeholder, as the schema requires.
inline std::string make_extraction_prompt(const std::string& name,
                                          const std::string& description) {
    std::string prompt = "Extract all entities of category '" + name +
                         "' from the document below.";
    if (!description.empty()) prompt += " Category description: " + description;
    prompt +=
        "\nReply with a JSON array of strings and nothing else; list one entry "
        "per occurrence.\n\nDocument: {document}\n";
    return prompt;
}

struct ConsolidationResult {
    std::vector<DimensionSchema> dimensions;
    bool fallback_used = false;  // chat failed; one dimension per candidate
};

/// Merges candidate dimensions into the final schema list via one chat call.
/// Duplicate names are dropped (first wins); a backend failure or an empty
/// reply falls back to one dimension per candidate, flagged in the result.
inline ConsolidationResult consolidate_dimensions(const std::vector<DimensionCandidate>& candidates,
                                                  LlmClient& llm) {
    if (candidates.empty()) throw DataError("consolidate_dimensions: no candidates");

    auto add_unique = [](std::vector<DimensionSchema>& dims, DimensionSchema d) {
        for (const auto& existing : dims)
            if (existing.name == d.name) return;
        dims.push_back(std::move(d));
    };

    auto fallback = [&]() {
        ConsolidationResult result;
        result.fallback_used = true;
        for (const auto& c : candidates) {
            DimensionSchema d;
            d.name = detail::slugify(c.proposed_name, "cluster_" + std::to_string(c.cluster_id));
            d.description = c.summary;
            d.prompt_template = make_extraction_prompt(d.name, d.description);
            d.validate();
            add_unique(result.dimensions, std::move(d));
        }
        return result;
    };

    std::vector<std::string> lines;
    for (const auto& c : candidates)
        lines.push_back("- " + c.proposed_name + ": " + (c.summary.empty() ? "(no summary)" : c.summary));

    std::string reply;
    try {
        reply = llm.chat("consolidate", {{"candidates", join(lines, "\n")}});
    } catch (const BackendError&) {
        return fallback();
    }

    Json j;
    try {
        j = Json::parse(reply);
    } catch (const Json::exception&) {
        return fallback();
    }
    if (!j.is_array() || j.empty()) return fallback();

    ConsolidationResult result;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("name")) return fallback();
        DimensionSchema d;
        d.name = detail::slugify(item.at("name").get<std::string>(), "");
        if (d.name.empty()) return fallback();
        d.description = item.value("description", "");
        d.prompt_template = make_extraction_prompt(d.name, d.description);
        d.validate();
        add_unique(result.dimensions, std::move(d));
    }
    if (result.dimensions.empty()) return fallback();
    return result;
}

// ---------------------------------------------------------------------------
// Corpus indexing

struct IndexBuildOptions {
    double max_failure_fraction = 0.05;
    size_t threads = 0;  // 0: use the backend's parallelism bound
};

struct BuildReport {
    size_t docs_indexed = 0;
    std::vector<std::pair<std::string, std::string>> failures;  // (doc_id, message)
    std::map<std::string, size_t> labels_per_dimension;         // unique labels
    size_t total_label_occurrences = 0;

    Json to_json() const {
        Json fails = Json::array();
        for (const auto& [id, msg] : failures) fails.push_back(Json{{"doc_id", id}, {"error", msg}});
        return Json{{"docs_indexed", docs_indexed},
                    {"failures", std::move(fails)},
                    {"labels_per_dimension", labels_per_dimension},
                    {"total_label_occurrences", total_label_occurrences}};
    }
};

struct IndexBuildResult {
    HypercubeIndex index;
    BuildReport report;
};

/// Extracts per-dimension labels for every document (parallel, bounded by the
/// backend) and assembles the index single-writer. Fails only when more than
/// max_failure_fraction of documents failed extraction.
inline IndexBuildResult index_corpus(const std::vector<CorpusDoc>& corpus,
                                     const std::vector<DimensionSchema>& dimensions,
                                     ExtractionBackend& backend,
                                     const IndexBuildOptions& options = {}) {
    if (dimensions.empty()) throw DataError("no dimensions");
    if (corpus.empty()) throw DataError("empty corpus");

    size_t threads = options.threads == 0 ? backend.max_parallelism() : options.threads;
    std::vector<DocumentRecord> records(corpus.size());
    std::vector<std::string> failures(corpus.size());
    parallel_for(corpus.size(), threads, [&](size_t i) {
        DocumentRecord rec;
        rec.doc_id = corpus[i].doc_id;
        rec.text = corpus[i].text;
        try {
            for (const auto& dim : dimensions) {
                ExtractionResult r = backend.extract(corpus[i].doc_id, corpus[i].text, dim);
                if (!r.labels.empty()) rec.labels[dim.name] = std::move(r.labels);
            }
            records[i] = std::move(rec);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });

    IndexBuildResult result{HypercubeIndex(dimensions), {}};
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (!failures[i].empty()) {
            result.report.failures.emplace_back(corpus[i].doc_id, failures[i]);
            continue;
        }
        result.index.add_document(std::move(records[i]));
        ++result.report.docs_indexed;
    }

    double failure_fraction =
        corpus.empty() ? 0.0
                       : static_cast<double>(result.report.failures.size()) /
                             static_cast<double>(corpus.size());
    if (failure_fraction > options.max_failure_fraction) {
        std::string msg = "extraction failed for " +
                          std::to_string(result.report.failures.size()) + "/" +
                          std::to_string(corpus.size()) + " documents:";
        for (const auto& [id, err] : result.report.failures)
            msg += "\n  " + id + ": " + err;
        throw DataError(msg);
    }

    for (const auto& dim : dimensions) {
        const auto& vocab = result.index.dimension_postings(dim.name);
        result.report.labels_per_dimension[dim.name] = vocab.size();
        for (const auto& [label, plist] : vocab)
            for (const auto& p : plist)
                result.report.total_label_occurrences += static_cast<size_t>(p.count);
    }
    return result;
}

}  // namespace hypercube
