#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hypercube/index.hpp"
#include "hypercube/retrieval.hpp"

namespace hypercube {

enum class CoverageTier { full, partial };

struct RankedEntry {
    std::string doc_id;
    size_t coverage = 0;  // components satisfied
    int exact_score = 0;
    long long freq_sum = 0;
    CoverageTier tier = CoverageTier::partial;
};

struct RankedList {
    std::vector<RankedEntry> entries;  // full tier first, length <= top_k
};

/// Total order over candidates: coverage desc, exact score desc, frequency
/// sum desc, doc_id asc. The final key makes equal inputs produce identical
/// outputs.
inline bool rank_less(const MatchResult& a, const MatchResult& b) {
    if (a.covered.size() != b.covered.size()) return a.covered.size() > b.covered.size();
    if (a.exact_score != b.exact_score) return a.exact_score > b.exact_score;
    if (a.freq_sum != b.freq_sum) return a.freq_sum > b.freq_sum;
    return a.doc_id < b.doc_id;
}

/// Documents covering every component form the full tier and always precede
/// partially covering ones; the partial tier fills any remaining top_k slots.
/// Zero-coverage candidates are dropped.
inline RankedList rank(const std::vector<MatchResult>& candidates, size_t n_components,
                       size_t top_k) {
    if (n_components == 0) throw DataError("rank: n_components must be >= 1");
    std::vector<MatchResult> live;
    live.reserve(candidates.size());
    for (const auto& m : candidates)
        if (!m.covered.empty()) live.push_back(m);
    std::sort(live.begin(), live.end(), rank_less);

    RankedList ranked;
    for (const auto& m : live) {
        if (ranked.entries.size() >= top_k) break;
        RankedEntry e;
        e.doc_id = m.doc_id;
        e.coverage = m.covered.size();
        e.exact_score = m.exact_score;
        e.freq_sum = m.freq_sum;
        e.tier = m.covered.size() == n_components ? CoverageTier::full : CoverageTier::partial;
        ranked.entries.push_back(std::move(e));
    }
    return ranked;
}

// ---------------------------------------------------------------------------
// Explanations: the per-document label evidence behind a ranking decision

struct ExplainedLabel {
    int count = 0;                     // stored occurrence count
    std::vector<size_t> components;    // component indexes this label satisfied
};

struct ExplanationRecord {
    std::string doc_id;
    // dimension -> label -> evidence; empty for zero-coverage docs
    std::map<std::string, std::map<std::string, ExplainedLabel>> matched;

    /// Matched labels with counts only, the compact tabular form.
    std::map<std::string, LabelCounts> matched_counts() const {
        std::map<std::string, LabelCounts> out;
        for (const auto& [dim, labels] : matched)
            for (const auto& [label, e] : labels) out[dim][label] = e.count;
        return out;
    }
};

/// Reconstructs which stored labels satisfied which components for one
/// candidate. Exact matches point at the component content itself; semantic
/// matches point at the accepted label.
inline ExplanationRecord explain(const MatchResult& match, const HypercubeIndex& index,
                                 const std::vector<QueryComponent>& components) {
    const DocumentRecord& doc = index.doc(match.doc_id);
    ExplanationRecord record;
    record.doc_id = match.doc_id;

    auto doc_count = [&](const std::string& dim, const std::string& label) -> int {
        auto dim_it = doc.labels.find(dim);
        if (dim_it == doc.labels.end()) return 0;
        auto it = dim_it->second.find(label);
        return it == dim_it->second.end() ? 0 : it->second;
    };

    // Per component exactly one route ran during retrieval; components that
    // appear among the semantic hits were covered semantically, every other
    // covered component was an exact match on its own content.
    std::set<size_t> semantic_components;
    for (const auto& hit : match.semantic_hits) semantic_components.insert(hit.component);

    for (size_t i : match.covered) {
        if (i >= components.size())
            throw DataError("explain: component index out of range for doc '" + match.doc_id +
                            "'");
        if (semantic_components.count(i)) continue;
        const auto& c = components[i];
        int count = doc_count(c.dimension, c.content);
        if (count == 0)
            throw DataError("explain: doc '" + match.doc_id + "' lacks exact-matched label '" +
                            c.content + "'");
        auto& e = record.matched[c.dimension][c.content];
        e.count = count;
        e.components.push_back(i);
    }
    for (const auto& hit : match.semantic_hits) {
        int count = doc_count(components[hit.component].dimension, hit.label);
        if (count == 0) continue;
        auto& e = record.matched[components[hit.component].dimension][hit.label];
        e.count = count;
        if (std::find(e.components.begin(), e.components.end(), hit.component) ==
            e.components.end())
            e.components.push_back(hit.component);
    }
    for (auto& [dim, labels] : record.matched)
        for (auto& [label, e] : labels) std::sort(e.components.begin(), e.components.end());
    return record;
}

}  // namespace hypercube
