#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hypercube/embedding.hpp"
#include "hypercube/errors.hpp"
#include "hypercube/llm.hpp"
#include "hypercube/text.hpp"

namespace hypercube {

// ---------------------------------------------------------------------------
// Retrieval metrics

/// |top-k intersect gold| / k.
inline double precision_at_k(const std::vector<std::string>& retrieved,
                             const std::set<std::string>& gold, size_t k) {
    if (k == 0) throw UsageError("precision_at_k: k must be >= 1");
    size_t hits = 0;
    for (size_t i = 0; i < retrieved.size() && i < k; ++i)
        if (gold.count(retrieved[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(k);
}

/// |top-k intersect gold| / |gold|. An empty gold set is degenerate: recall
/// is 1 by convention unless strict_empty_gold asks for an error.
inline double recall_at_k(const std::vector<std::string>& retrieved,
                          const std::set<std::string>& gold, size_t k,
                          bool strict_empty_gold = false) {
    if (k == 0) throw UsageError("recall_at_k: k must be >= 1");
    if (gold.empty()) {
        if (strict_empty_gold) throw DataError("recall_at_k: empty gold set");
        return 1.0;
    }
    size_t hits = 0;
    for (size_t i = 0; i < retrieved.size() && i < k; ++i)
        if (gold.count(retrieved[i])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

// ---------------------------------------------------------------------------
// Answer metrics

namespace detail {

inline std::map<std::string, int> token_multiset(const std::string& text) {
    std::map<std::string, int> counts;
    for (const auto& raw : tokenize(text)) counts[raw] += 1;
    return counts;
}

}  // namespace detail

/// Harmonic mean of token precision and recall over whitespace-normalized
/// token multisets. Symmetric; equals 1 iff the multisets are equal. Both
/// strings empty scores 1 by convention, one empty scores 0.
inline double token_f1(const std::string& pred, const std::string& gold) {
    auto p = detail::token_multiset(pred);
    auto g = detail::token_multiset(gold);
    if (p.empty() && g.empty()) return 1.0;
    if (p.empty() || g.empty()) return 0.0;

    long long overlap = 0, p_total = 0, g_total = 0;
    for (const auto& [t, c] : p) p_total += c;
    for (const auto& [t, c] : g) g_total += c;
    for (const auto& [t, c] : p) {
        auto it = g.find(t);
        if (it != g.end()) overlap += std::min(c, it->second);
    }
    if (overlap == 0) return 0.0;
    double precision = static_cast<double>(overlap) / static_cast<double>(p_total);
    double recall = static_cast<double>(overlap) / static_cast<double>(g_total);
    return 2.0 * precision * recall / (precision + recall);
}

/// Cosine of the two answer embeddings mapped to [0, 1] via (1 + cos) / 2.
inline double semantic_score(const std::string& pred, const std::string& gold,
                             Embedder& embedder) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    double cos = cosine(embedder.embed(pred), embedder.embed(gold));
    return (1.0 + cos) / 2.0;
}

// ---------------------------------------------------------------------------
// LLM-as-judge

struct JudgeVerdict {
    int correctness = 0;   // 0 or 1
    int completeness = 0;  // 0 or 1
    std::string explanation;
};

namespace detail {

inline JudgeVerdict parse_judge_reply(const std::string& reply) {
    Json j;
    try {
        j = Json::parse(reply);
    } catch (const Json::exception&) {
        throw ReplyParseError("judge reply is not valid JSON", reply);
    }
    if (!j.is_object() || !j.contains("correctness") || !j.contains("completeness"))
        throw ReplyParseError("judge reply lacks correctness/completeness", reply);
    JudgeVerdict v;
    v.correctness = j.at("correctness").get<int>();
    v.completeness = j.at("completeness").get<int>();
    v.explanation = j.value("explanation", "");
    if ((v.correctness != 0 && v.correctness != 1) ||
        (v.completeness != 0 && v.completeness != 1))
        throw ReplyParseError("judge scores must be 0 or 1", reply);
    return v;
}

}  // namespace detail

/// Sends the judge prompt and parses its JSON contract. A malformed reply is
/// re-asked once (bypassing the reply cache); a second failure propagates.
inline JudgeVerdict llm_judge(const std::string& question, const std::string& gold,
                              const std::string& pred, LlmClient& llm) {
    std::map<std::string, std::string> vars{
        {"question", question}, {"gold_answer", gold}, {"predicted_answer", pred}};
    std::string reply = llm.chat("judge", vars);
    try {
        return detail::parse_judge_reply(reply);
    } catch (const ReplyParseError&) {
        reply = llm.chat("judge", vars, /*bypass_cache=*/true);
        return detail::parse_judge_reply(reply);
    }
}

}  // namespace hypercube
