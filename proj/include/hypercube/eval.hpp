#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hypercube/index.hpp"
#include "hypercube/io.hpp"
#include "hypercube/metrics.hpp"
#include "hypercube/ranking.hpp"
#include "hypercube/retrieval.hpp"

namespace hypercube {

struct QueryEval {
    std::string question;
    std::vector<std::string> retrieved;  // ranked doc ids
    size_t hits = 0;
    size_t gold_size = 0;
    double precision = 0.0;
    double recall = 0.0;
    double retrieval_ms = 0.0;
    bool qa_scored = false;  // answer metrics present
    std::string answer;
    double f1 = 0.0;
    double sem = 0.0;
    bool judged = false;
    JudgeVerdict judge;
    bool skipped = false;
    std::string skip_reason;
};

struct LatencyStats {
    double mean_ms = 0.0;
    double p50_ms = 0.0;
    double p95_ms = 0.0;
};

inline LatencyStats latency_stats(std::vector<double> samples) {
    LatencyStats s;
    if (samples.empty()) return s;
    double total = 0.0;
    for (double v : samples) total += v;
    s.mean_ms = total / static_cast<double>(samples.size());
    std::sort(samples.begin(), samples.end());
    auto quantile = [&](double q) {
        double pos = q * static_cast<double>(samples.size() - 1);
        size_t lo = static_cast<size_t>(pos);
        size_t hi = std::min(lo + 1, samples.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return samples[lo] * (1.0 - frac) + samples[hi] * frac;
    };
    s.p50_ms = quantile(0.5);
    s.p95_ms = quantile(0.95);
    return s;
}

struct MetricReport {
    size_t k = 5;
    std::vector<QueryEval> per_query;
    size_t evaluated = 0;
    size_t skipped = 0;
    double mean_precision = 0.0;
    double mean_recall = 0.0;
    bool qa_scored = false;
    double mean_f1 = 0.0;
    double mean_sem = 0.0;
    size_t judged = 0;
    double mean_correctness = 0.0;
    double mean_completeness = 0.0;
    LatencyStats latency;

    // The answer-similarity definition used by this harness; stated in every
    // report so its numbers are never mistaken for someone else's metric.
    static constexpr const char* kSemanticScoreDefinition =
        "(1 + cosine(embed(pred), embed(gold))) / 2";

    void finalize() {
        evaluated = 0;
        skipped = 0;
        double p = 0, r = 0, f = 0, s = 0, c = 0, cp = 0;
        size_t qa_count = 0;
        judged = 0;
        std::vector<double> latencies;
        for (const auto& q : per_query) {
            if (q.skipped) {
                ++skipped;
                continue;
            }
            ++evaluated;
            p += q.precision;
            r += q.recall;
            latencies.push_back(q.retrieval_ms);
            if (q.qa_scored) {
                ++qa_count;
                f += q.f1;
                s += q.sem;
            }
            if (q.judged) {
                ++judged;
                c += q.judge.correctness;
                cp += q.judge.completeness;
            }
        }
        if (evaluated > 0) {
            mean_precision = p / static_cast<double>(evaluated);
            mean_recall = r / static_cast<double>(evaluated);
        }
        qa_scored = qa_count > 0;
        if (qa_count > 0) {
            mean_f1 = f / static_cast<double>(qa_count);
            mean_sem = s / static_cast<double>(qa_count);
        }
        if (judged > 0) {
            mean_correctness = c / static_cast<double>(judged);
            mean_completeness = cp / static_cast<double>(judged);
        }
        latency = latency_stats(std::move(latencies));
    }

    /// Rates are derived from integer hit counts; this re-checks that
    /// precision*k and recall*|gold| round cleanly back to integers.
    void check_rate_integrality() const {
        for (const auto& q : per_query) {
            if (q.skipped) continue;
            double pk = q.precision * static_cast<double>(k);
            if (std::abs(pk - std::round(pk)) > 1e-9)
                throw DataError("precision@k * k is not integral for query: " + q.question);
            if (q.gold_size > 0) {
                double rg = q.recall * static_cast<double>(q.gold_size);
                if (std::abs(rg - std::round(rg)) > 1e-9)
                    throw DataError("recall@k * |gold| is not integral for query: " + q.question);
            }
        }
    }

    Json to_json() const {
        Json queries = Json::array();
        for (const auto& q : per_query) {
            Json e{{"question", q.question}};
            if (q.skipped) {
                e["skipped"] = true;
                e["reason"] = q.skip_reason;
            } else {
                e["retrieved"] = q.retrieved;
                e["hits"] = q.hits;
                e["gold_size"] = q.gold_size;
                e["precision"] = q.precision;
                e["recall"] = q.recall;
                e["retrieval_ms"] = q.retrieval_ms;
                if (q.qa_scored) {
                    e["answer"] = q.answer;
                    e["token_f1"] = q.f1;
                    e["semantic_score"] = q.sem;
                }
                if (q.judged) {
                    e["judge"] = Json{{"correctness", q.judge.correctness},
                                      {"completeness", q.judge.completeness},
                                      {"explanation", q.judge.explanation}};
                }
            }
            queries.push_back(std::move(e));
        }
        Json j{{"k", k},
               {"semantic_score_definition", kSemanticScoreDefinition},
               {"evaluated", evaluated},
               {"skipped", skipped},
               {"precision_at_k", mean_precision},
               {"recall_at_k", mean_recall},
               {"latency_ms",
                Json{{"mean", latency.mean_ms}, {"p50", latency.p50_ms}, {"p95", latency.p95_ms}}},
               {"queries", std::move(queries)}};
        if (qa_scored) {
            j["token_f1"] = mean_f1;
            j["semantic_score"] = mean_sem;
        }
        if (judged > 0) {
            j["judge_correctness"] = mean_correctness;
            j["judge_completeness"] = mean_completeness;
        }
        return j;
    }

    std::string to_table() const {
        std::ostringstream out;
        out << std::fixed << std::setprecision(4);
        out << "metric             value\n";
        out << "-----------------  --------\n";
        out << "queries evaluated  " << evaluated << "\n";
        out << "queries skipped    " << skipped << "\n";
        out << "precision@" << k << "        " << mean_precision << "\n";
        out << "recall@" << k << "           " << mean_recall << "\n";
        if (qa_scored) {
            out << "token F1           " << mean_f1 << "\n";
            out << "semantic score     " << mean_sem << "\n";
        }
        if (judged > 0) {
            out << "judge correctness  " << mean_correctness << "\n";
            out << "judge completeness " << mean_completeness << "\n";
        }
        out << std::setprecision(3);
        out << "latency mean (ms)  " << latency.mean_ms << "\n";
        out << "latency p50 (ms)   " << latency.p50_ms << "\n";
        out << "latency p95 (ms)   " << latency.p95_ms << "\n";
        return out.str();
    }
};

// Hooks keep the eval loop independent of backend wiring. The answerer sees
// the ranked doc ids; the judge sees (question, gold, predicted).
struct EvalHooks {
    std::function<std::vector<QueryComponent>(const std::string&)> decompose;
    std::function<std::string(const std::string&, const std::vector<std::string>&)> answer;
    std::function<JudgeVerdict(const std::string&, const std::string&, const std::string&)> judge;
};

/// Runs every QA record through decompose -> retrieve -> rank -> metrics.
/// Records whose gold ids are missing from the corpus are skipped with a
/// reason; retrieval time per query covers retrieve+rank only.
inline MetricReport run_eval(const HypercubeIndex& index, const std::vector<QaRecord>& records,
                             const RetrievalConfig& config, Embedder& embedder,
                             const EvalHooks& hooks) {
    if (records.empty()) throw DataError("eval: no QA records");
    if (!hooks.decompose) throw UsageError("eval: decompose hook is required");
    MetricReport report;
    report.k = config.top_k;

    for (const auto& rec : records) {
        QueryEval qe;
        qe.question = rec.question;
        qe.gold_size = rec.gold_doc_ids.size();

        std::vector<std::string> missing;
        for (const auto& id : rec.gold_doc_ids)
            if (!index.has_doc(id)) missing.push_back(id);
        if (!missing.empty()) {
            qe.skipped = true;
            qe.skip_reason = "gold doc ids absent from corpus: " + join(missing, ", ");
            report.per_query.push_back(std::move(qe));
            continue;
        }

        std::vector<QueryComponent> components;
        try {
            components = hooks.decompose(rec.question);
        } catch (const Error& e) {
            qe.skipped = true;
            qe.skip_reason = std::string("decomposition failed: ") + e.what();
            report.per_query.push_back(std::move(qe));
            continue;
        }
        if (components.empty()) {
            qe.skipped = true;
            qe.skip_reason = "no components";
            report.per_query.push_back(std::move(qe));
            continue;
        }

        auto start = std::chrono::steady_clock::now();
        std::vector<MatchResult> matches = retrieve(components, index, config, embedder);
        RankedList ranked = rank(matches, components.size(), config.top_k);
        auto stop = std::chrono::steady_clock::now();
        qe.retrieval_ms = std::chrono::duration<double, std::milli>(stop - start).count();

        for (const auto& e : ranked.entries) qe.retrieved.push_back(e.doc_id);
        std::set<std::string> gold(rec.gold_doc_ids.begin(), rec.gold_doc_ids.end());
        for (size_t i = 0; i < qe.retrieved.size() && i < config.top_k; ++i)
            if (gold.count(qe.retrieved[i])) ++qe.hits;
        qe.precision = precision_at_k(qe.retrieved, gold, config.top_k);
        qe.recall = recall_at_k(qe.retrieved, gold, config.top_k);

        if (hooks.answer) {
            qe.answer = hooks.answer(rec.question, qe.retrieved);
            qe.f1 = token_f1(qe.answer, rec.gold_answer);
            qe.sem = semantic_score(qe.answer, rec.gold_answer, embedder);
            qe.qa_scored = true;
            if (hooks.judge) {
                qe.judge = hooks.judge(rec.question, rec.gold_answer, qe.answer);
                qe.judged = true;
            }
        }
        report.per_query.push_back(std::move(qe));
    }

    report.finalize();
    report.check_rate_integrality();
    return report;
}

}  // namespace hypercube
