#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypercube/errors.hpp"
#include "hypercube/io.hpp"
#include "hypercube/text.hpp"

namespace hypercube {

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;
};

/// Okapi BM25 with the nonnegative idf variant
/// idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)). Duplicate query terms score
/// once per occurrence. Ties break by doc_id ascending.
class Bm25Index {
public:
    Bm25Index(double k1 = 1.2, double b = 0.75) : k1_(k1), b_(b) {
        if (k1 <= 0.0) throw UsageError("bm25: k1 must be > 0");
        if (b < 0.0 || b > 1.0) throw UsageError("bm25: b must be in [0, 1]");
    }

    void add_document(const std::string& doc_id, const std::string& text) {
        if (doc_lengths_.count(doc_id)) throw DataError("bm25: duplicate doc_id '" + doc_id + "'");
        std::vector<std::string> tokens = tokenize(text);
        std::map<std::string, int> tf;
        for (const auto& t : tokens) tf[t] += 1;
        for (const auto& [term, count] : tf) postings_[term].emplace_back(doc_id, count);
        doc_lengths_[doc_id] = tokens.size();
        total_length_ += tokens.size();
    }

    static Bm25Index build(const std::vector<CorpusDoc>& corpus, double k1 = 1.2,
                           double b = 0.75) {
        Bm25Index index(k1, b);
        for (const auto& d : corpus) index.add_document(d.doc_id, d.text);
        return index;
    }

    size_t doc_count() const { return doc_lengths_.size(); }

    /// Score for every stored document, zeros included.
    std::map<std::string, double> scores(const std::string& query) const {
        std::vector<std::string> terms = tokenize(query);
        if (terms.empty()) throw DataError("bm25: query is empty after tokenization");
        std::map<std::string, double> out;
        for (const auto& [doc_id, len] : doc_lengths_) out[doc_id] = 0.0;
        if (doc_lengths_.empty()) return out;

        double n_docs = static_cast<double>(doc_lengths_.size());
        double avg_len = total_length_ / n_docs;
        for (const auto& term : terms) {
            auto it = postings_.find(term);
            if (it == postings_.end()) continue;
            double df = static_cast<double>(it->second.size());
            double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
            for (const auto& [doc_id, tf] : it->second) {
                double dl = static_cast<double>(doc_lengths_.at(doc_id));
                double denom = tf + k1_ * (1.0 - b_ + b_ * dl / avg_len);
                out[doc_id] += idf * (tf * (k1_ + 1.0)) / denom;
            }
        }
        return out;
    }

    /// Positive-score documents only, best first, ties by doc_id ascending.
    std::vector<ScoredDoc> rank(const std::string& query, size_t top_k) const {
        std::vector<std::string> terms = tokenize(query);
        if (terms.empty()) throw DataError("bm25: query is empty after tokenization");
        if (doc_lengths_.empty()) return {};

        double n_docs = static_cast<double>(doc_lengths_.size());
        double avg_len = total_length_ / n_docs;

        std::unordered_map<std::string, double> accum;
        for (const auto& term : terms) {
            auto it = postings_.find(term);
            if (it == postings_.end()) continue;
            double df = static_cast<double>(it->second.size());
            double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
            for (const auto& [doc_id, tf] : it->second) {
                double dl = static_cast<double>(doc_lengths_.at(doc_id));
                double denom = tf + k1_ * (1.0 - b_ + b_ * dl / avg_len);
                accum[doc_id] += idf * (tf * (k1_ + 1.0)) / denom;
            }
        }

        std::vector<ScoredDoc> ranked;
        ranked.reserve(accum.size());
        for (const auto& [doc_id, score] : accum) ranked.push_back({doc_id, score});
        std::sort(ranked.begin(), ranked.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.doc_id < b.doc_id;
        });
        if (ranked.size() > top_k) ranked.resize(top_k);
        return ranked;
    }

private:
    double k1_;
    double b_;
    std::map<std::string, std::vector<std::pair<std::string, int>>> postings_;
    std::map<std::string, size_t> doc_lengths_;
    double total_length_ = 0.0;
};

}  // namespace hypercube
