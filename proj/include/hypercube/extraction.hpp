#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "hypercube/errors.hpp"
#include "hypercube/io.hpp"
#include "hypercube/llm.hpp"
#include "hypercube/types.hpp"

namespace hypercube {

enum class ExtractionProvenance { llm, gazetteer };

struct ExtractionResult {
    std::string doc_id;
    std::string dimension;
    LabelCounts labels;  // normalized, counts >= 1
    ExtractionProvenance provenance = ExtractionProvenance::gazetteer;
};

// ---------------------------------------------------------------------------
// Gazetteer: per-dimension phrase lexicon, the deterministic extraction path

/// File format: one JSON object per dimension mapping canonical phrase to an
/// array of aliases, e.g. {"location": {"springfield": ["springfield, il"]}}.
/// Phrases are normalized on load; aliases resolve to their canonical.
class Gazetteer {
public:
    Gazetteer() = default;

    static Gazetteer load(const fs::path& path) {
        Json j;
        try {
            j = Json::parse(read_file(path));
        } catch (const Json::exception& e) {
            throw DataError("invalid gazetteer file " + path.string() + ": " + e.what());
        }
        Gazetteer g;
        for (const auto& [dim, entries] : j.items()) {
            for (const auto& [canonical, aliases] : entries.items()) {
                g.add(dim, canonical);
                for (const auto& a : aliases) g.add_alias(dim, a.get<std::string>(), canonical);
            }
        }
        return g;
    }

    void add(const std::string& dimension, const std::string& canonical) {
        auto norm = normalize_label(canonical);
        if (!norm) throw DataError("gazetteer: phrase normalizes to empty: '" + canonical + "'");
        entries_[dimension][*norm] = *norm;
    }

    void add_alias(const std::string& dimension, const std::string& alias,
                   const std::string& canonical) {
        auto norm_alias = normalize_label(alias);
        auto norm_canonical = normalize_label(canonical);
        if (!norm_alias || !norm_canonical)
            throw DataError("gazetteer: alias or canonical normalizes to empty");
        auto& dim_entries = entries_[dimension];
        if (dim_entries.find(*norm_canonical) == dim_entries.end())
            throw DataError("gazetteer: alias '" + *norm_alias + "' targets unknown canonical '" +
                            *norm_canonical + "'");
        dim_entries[*norm_alias] = *norm_canonical;
    }

    bool has_dimension(const std::string& dimension) const {
        return entries_.count(dimension) > 0;
    }

    std::vector<std::string> dimensions() const {
        std::vector<std::string> out;
        for (const auto& [dim, _] : entries_) out.push_back(dim);
        return out;
    }

    /// phrase -> canonical for one dimension (empty map if absent).
    const std::map<std::string, std::string>& phrases(const std::string& dimension) const {
        static const std::map<std::string, std::string> empty;
        auto it = entries_.find(dimension);
        return it == entries_.end() ? empty : it->second;
    }

    /// Union of all dimensions' phrase maps; the untyped entity-pool path.
    std::map<std::string, std::string> all_phrases() const {
        std::map<std::string, std::string> out;
        for (const auto& [dim, m] : entries_) out.insert(m.begin(), m.end());
        return out;
    }

private:
    // dimension -> (normalized phrase -> canonical label)
    std::map<std::string, std::map<std::string, std::string>> entries_;
};

namespace detail {

inline bool word_boundary_before(const std::string& text, size_t pos) {
    if (pos == 0) return true;
    unsigned char c = static_cast<unsigned char>(text[pos - 1]);
    return !(std::isalnum(c) || c >= 128);
}

inline bool word_boundary_after(const std::string& text, size_t end) {
    if (end >= text.size()) return true;
    unsigned char c = static_cast<unsigned char>(text[end]);
    return !(std::isalnum(c) || c >= 128);
}

/// Case-insensitive, whole-phrase, non-overlapping occurrence counting over
/// raw text. Longer phrases claim spans first; shorter phrases cannot match
/// inside a claimed span. Returns counts keyed by the canonical label of the
/// matched phrase.
inline LabelCounts count_phrases(const std::string& text,
                                 const std::map<std::string, std::string>& phrase_to_canonical) {
    LabelCounts counts;
    if (phrase_to_canonical.empty() || text.empty()) return counts;

    std::string lowered;
    lowered.reserve(text.size());
    for (unsigned char c : text) lowered.push_back(ascii_lower(c));

    // Longest-first, then lexicographic for determinism.
    std::vector<std::pair<std::string, std::string>> ordered(phrase_to_canonical.begin(),
                                                             phrase_to_canonical.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
        return a.first < b.first;
    });

    std::vector<bool> claimed(lowered.size(), false);
    for (const auto& [phrase, canonical] : ordered) {
        size_t pos = 0;
        while ((pos = lowered.find(phrase, pos)) != std::string::npos) {
            size_t end = pos + phrase.size();
            bool free_span = true;
            for (size_t i = pos; i < end && free_span; ++i) free_span = !claimed[i];
            if (free_span && word_boundary_before(lowered, pos) &&
                word_boundary_after(lowered, end)) {
                counts[canonical] += 1;
                for (size_t i = pos; i < end; ++i) claimed[i] = true;
                pos = end;
            } else {
                ++pos;
            }
        }
    }
    return counts;
}

}  // namespace detail

/// Pure function; identical inputs yield identical outputs. Missing dimension
/// in the gazetteer yields an empty multiset.
inline LabelCounts gazetteer_extract(const std::string& text, const std::string& dimension,
                                     const Gazetteer& gazetteer) {
    return detail::count_phrases(text, gazetteer.phrases(dimension));
}

/// Case-insensitive whole-phrase occurrences of one normalized label; the
/// fallback count rule when an LLM returns a deduplicated list.
inline int count_label_occurrences(const std::string& text, const std::string& label) {
    std::map<std::string, std::string> single{{label, label}};
    LabelCounts counts = detail::count_phrases(text, single);
    auto it = counts.find(label);
    return it == counts.end() ? 0 : it->second;
}

// ---------------------------------------------------------------------------
// Extraction backends

class ExtractionBackend {
public:
    virtual ~ExtractionBackend() = default;
    /// Per-dimension labels for one document.
    virtual ExtractionResult extract(const std::string& doc_id, const std::string& text,
                                     const DimensionSchema& dim) = 0;
    /// Untyped extraction feeding the entity pool during dimension discovery.
    virtual LabelCounts extract_untyped(const std::string& text) = 0;
    virtual size_t max_parallelism() const = 0;
};

class GazetteerBackend : public ExtractionBackend {
public:
    explicit GazetteerBackend(Gazetteer gazetteer) : gazetteer_(std::move(gazetteer)) {}

    const Gazetteer& gazetteer() const { return gazetteer_; }

    ExtractionResult extract(const std::string& doc_id, const std::string& text,
                             const DimensionSchema& dim) override {
        ExtractionResult r;
        r.doc_id = doc_id;
        r.dimension = dim.name;
        r.labels = gazetteer_extract(text, dim.name, gazetteer_);
        r.provenance = ExtractionProvenance::gazetteer;
        return r;
    }

    LabelCounts extract_untyped(const std::string& text) override {
        return detail::count_phrases(text, gazetteer_.all_phrases());
    }

    size_t max_parallelism() const override {
        size_t hw = std::thread::hardware_concurrency();
        return hw == 0 ? 4 : hw;
    }

private:
    Gazetteer gazetteer_;
};

/// Sends each dimension's prompt (from the schema) with the document filled
/// in, and expects one JSON array of strings back. Duplicates in the reply
/// count as repeated occurrences; a deduplicated reply falls back to counting
/// whole-phrase occurrences of each label in the document.
class LlmExtractionBackend : public ExtractionBackend {
public:
    explicit LlmExtractionBackend(std::shared_ptr<LlmClient> client) : client_(std::move(client)) {}

    ExtractionResult extract(const std::string& doc_id, const std::string& text,
                             const DimensionSchema& dim) override {
        std::string prompt = render_template(dim.prompt_template, {{"document", text}});
        std::string reply;
        try {
            reply = client_->chat_prompt(prompt);
        } catch (const BackendError& e) {
            throw BackendError("extraction failed for doc '" + doc_id + "', dimension '" +
                                   dim.name + "': " + e.what(),
                               e.retryable());
        }
        ExtractionResult r;
        r.doc_id = doc_id;
        r.dimension = dim.name;
        r.provenance = ExtractionProvenance::llm;
        r.labels = parse_reply(reply, text, doc_id, dim.name);
        return r;
    }

    LabelCounts extract_untyped(const std::string& text) override {
        std::string reply = client_->chat("extract_pool", {{"document", text}});
        return parse_reply(reply, text, "", "entity pool");
    }

    size_t max_parallelism() const override { return client_->options().max_in_flight; }

private:
    LabelCounts parse_reply(const std::string& reply, const std::string& doc_text,
                            const std::string& doc_id, const std::string& context) {
        Json j;
        try {
            j = Json::parse(reply);
        } catch (const Json::exception&) {
            throw ReplyParseError("extraction reply is not valid JSON (doc '" + doc_id +
                                      "', " + context + ")",
                                  reply);
        }
        if (!j.is_array())
            throw ReplyParseError("extraction reply must be a JSON array of strings (doc '" +
                                      doc_id + "', " + context + ")",
                                  reply);
        // First pass: duplicates in the reply are occurrence counts.
        LabelCounts raw;
        for (const auto& item : j) {
            if (!item.is_string())
                throw ReplyParseError("extraction reply array must contain only strings (doc '" +
                                          doc_id + "', " + context + ")",
                                      reply);
            auto label = normalize_label(item.get<std::string>());
            if (label) raw[*label] += 1;
        }
        LabelCounts out;
        for (const auto& [label, count] : raw) {
            int n = count;
            if (n == 1) {
                int occurrences = count_label_occurrences(doc_text, label);
                if (occurrences > 1) n = occurrences;
            }
            out[label] = n;
        }
        return out;
    }

    std::shared_ptr<LlmClient> client_;
};

}  // namespace hypercube
