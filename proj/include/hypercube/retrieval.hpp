#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hypercube/embedding.hpp"
#include "hypercube/index.hpp"
#include "hypercube/llm.hpp"

namespace hypercube {

// One decomposed (dimension, content) unit of a query. Content is normalized.
struct QueryComponent {
    std::string dimension;
    std::string content;

    bool operator==(const QueryComponent&) const = default;
};

struct SemanticHit {
    size_t component = 0;  // index into the component list
    std::string label;     // cube label that matched
    double similarity = 0.0;

    bool operator==(const SemanticHit&) const = default;
};

// Per-document match evidence gathered during retrieval.
struct MatchResult {
    std::string doc_id;
    std::set<size_t> covered;             // component indexes satisfied
    int exact_score = 0;                  // components matched lexically
    std::vector<SemanticHit> semantic_hits;
    long long freq_sum = 0;               // occurrence counts of matched labels
};

struct RetrievalConfig {
    size_t top_k = 5;
    double tau = 0.9;  // similarity acceptance threshold
    bool semantic_enabled = true;
    bool exact_enabled = true;
    std::set<std::string> disabled_dimensions;  // ablation hook

    void validate() const {
        if (top_k == 0) throw UsageError("top_k must be positive");
        if (tau < 0.0 || tau > 1.0) throw UsageError("tau must be in [0, 1]");
        if (!semantic_enabled && !exact_enabled)
            throw UsageError("at least one matching strategy must be enabled");
    }
};

// Instrumentation: proves retrieval cost tracks the candidate set, not the
// corpus.
struct RetrievalStats {
    size_t docs_scored = 0;            // distinct candidates assembled
    size_t semantic_comparisons = 0;   // label embeddings compared
    size_t postings_touched = 0;
};

// ---------------------------------------------------------------------------
// Query decomposition

struct DecomposeResult {
    std::vector<QueryComponent> components;
    std::vector<std::string> warnings;  // dropped unknown-dimension outputs
};

/// LLM-backed decomposition. The reply must be a JSON array of
/// {"dimension", "content"} objects; dimensions outside the schema are
/// dropped with a warning, contents are normalized, reply order is kept.
inline DecomposeResult decompose_query(const std::string& question,
                                       const std::vector<DimensionSchema>& schema,
                                       LlmClient& llm) {
    if (schema.empty()) throw DataError("decompose_query: empty schema");
    std::vector<std::string> names;
    for (const auto& d : schema) names.push_back(d.name);

    std::string reply;
    try {
        reply = llm.chat("decompose", {{"dimensions", join(names, ", ")},
                                       {"question", question}});
    } catch (const BackendError& e) {
        throw BackendError(std::string(e.what()) +
                               " (decomposition unavailable; use fallback_decompose)",
                           e.retryable());
    }

    Json j;
    try {
        j = Json::parse(reply);
    } catch (const Json::exception&) {
        throw ReplyParseError("decomposition reply is not a JSON array", reply);
    }
    if (!j.is_array()) throw ReplyParseError("decomposition reply is not a JSON array", reply);

    DecomposeResult result;
    for (const auto& item : j) {
        if (!item.is_object() || !item.contains("dimension") || !item.contains("content"))
            throw ReplyParseError("decomposition entries need dimension and content", reply);
        std::string dim = normalize_text(item.at("dimension").get<std::string>());
        auto content = normalize_label(item.at("content").get<std::string>());
        if (!content) continue;
        if (std::find(names.begin(), names.end(), dim) == names.end()) {
            result.warnings.push_back("dropped component with unknown dimension '" + dim +
                                      "': '" + *content + "'");
            continue;
        }
        result.components.push_back({dim, *content});
    }
    if (result.components.empty()) throw DataError("no components");
    return result;
}

/// Deterministic offline decomposition: longest-first matching of query
/// n-grams (n <= 5) against the index's label vocabulary. Each query token is
/// consumed at most once; when a label exists on several dimensions the first
/// dimension in schema order wins. Components come back in query order.
inline std::vector<QueryComponent> fallback_decompose(const std::string& question,
                                                      const HypercubeIndex& index) {
    std::vector<std::string> tokens = tokenize(question);
    std::vector<bool> consumed(tokens.size(), false);
    std::vector<std::pair<size_t, QueryComponent>> found;  // (start position, component)

    for (size_t n = 5; n >= 1; --n) {
        if (n > tokens.size()) continue;
        for (size_t start = 0; start + n <= tokens.size(); ++start) {
            bool free_span = true;
            for (size_t i = start; i < start + n && free_span; ++i) free_span = !consumed[i];
            if (!free_span) continue;
            std::string gram = tokens[start];
            for (size_t i = start + 1; i < start + n; ++i) gram += " " + tokens[i];
            for (const auto& dim : index.dimensions()) {
                if (index.dimension_postings(dim.name).count(gram) == 0) continue;
                found.emplace_back(start, QueryComponent{dim.name, gram});
                for (size_t i = start; i < start + n; ++i) consumed[i] = true;
                break;
            }
        }
    }

    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<QueryComponent> components;
    for (auto& [pos, c] : found) components.push_back(std::move(c));
    return components;
}

// ---------------------------------------------------------------------------
// Matching

/// Presence-based lexical score: the number of components whose content
/// appears among the document's labels on the component's dimension.
inline int exact_score(const DocumentRecord& doc, const std::vector<QueryComponent>& components) {
    int score = 0;
    for (const auto& c : components) {
        auto dim_it = doc.labels.find(c.dimension);
        if (dim_it != doc.labels.end() && dim_it->second.count(c.content)) ++score;
    }
    return score;
}

/// Embedding fallback for one component: cosine similarity against every
/// label on the component's dimension, keeping labels with similarity >= tau,
/// sorted by similarity descending then label ascending. Callers only invoke
/// this for components with no exact vocabulary match.
inline std::vector<std::pair<std::string, double>> semantic_match(
    const QueryComponent& component, const HypercubeIndex& index, Embedder& embedder, double tau,
    RetrievalStats* stats = nullptr) {
    const auto& vocab = index.dimension_postings(component.dimension);
    std::vector<std::pair<std::string, double>> hits;
    if (vocab.empty()) return hits;
    EmbeddingVector query_vec = embedder.embed(component.content);
    for (const auto& [label, plist] : vocab) {
        double sim = cosine(query_vec, embedder.embed(label));
        if (stats) ++stats->semantic_comparisons;
        if (sim >= tau) hits.emplace_back(label, sim);
    }
    std::sort(hits.begin(), hits.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return hits;
}

/// Gathers candidates from the posting lists of exact-matched components and
/// of semantically accepted labels, then assembles per-document evidence.
/// Only candidate documents are ever touched. Components on disabled
/// dimensions contribute nothing; the exact and semantic strategies toggle
/// independently. Results come back keyed in doc_id order (unranked).
inline std::vector<MatchResult> retrieve(const std::vector<QueryComponent>& components,
                                         const HypercubeIndex& index,
                                         const RetrievalConfig& config, Embedder& embedder,
                                         RetrievalStats* stats = nullptr) {
    config.validate();
    if (components.empty()) throw DataError("no components");
    for (const auto& c : components) {
        if (!index.has_dimension(c.dimension))
            throw DataError("component references unknown dimension '" + c.dimension + "'");
    }

    std::map<std::string, MatchResult> candidates;
    auto touch = [&](const std::string& doc_id) -> MatchResult& {
        auto it = candidates.find(doc_id);
        if (it == candidates.end()) {
            if (stats) ++stats->docs_scored;
            it = candidates.emplace(doc_id, MatchResult{doc_id, {}, 0, {}, 0}).first;
        }
        return it->second;
    };

    for (size_t i = 0; i < components.size(); ++i) {
        const auto& c = components[i];
        if (config.disabled_dimensions.count(c.dimension)) continue;

        bool exact_hit = false;
        if (config.exact_enabled) {
            const auto& plist = index.lookup(c.dimension, c.content);
            exact_hit = !plist.empty();
            for (const auto& p : plist) {
                if (stats) ++stats->postings_touched;
                MatchResult& m = touch(p.doc_id);
                m.covered.insert(i);
                m.exact_score += 1;
                m.freq_sum += p.count;
            }
        }

        // Exact-first contract: the embedding fallback only runs for
        // components with no exact vocabulary match.
        if (config.semantic_enabled && !exact_hit) {
            auto hits = semantic_match(c, index, embedder, config.tau, stats);
            for (const auto& [label, sim] : hits) {
                for (const auto& p : index.lookup(c.dimension, label)) {
                    if (stats) ++stats->postings_touched;
                    MatchResult& m = touch(p.doc_id);
                    m.covered.insert(i);
                    m.semantic_hits.push_back({i, label, sim});
                    m.freq_sum += p.count;
                }
            }
        }
    }

    std::vector<MatchResult> results;
    results.reserve(candidates.size());
    for (auto& [id, m] : candidates) results.push_back(std::move(m));
    return results;
}

}  // namespace hypercube
