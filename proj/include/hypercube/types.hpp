#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercube/errors.hpp"
#include "hypercube/text.hpp"

namespace hypercube {

using Json = nlohmann::json;

// Multiset of normalized labels with occurrence counts (always >= 1).
// std::map keeps iteration order canonical for serialization.
using LabelCounts = std::map<std::string, int>;

// One axis of a hypercube. `prompt_template` drives per-dimension LLM
// extraction and must contain exactly one {document} placeholder.
struct DimensionSchema {
    std::string name;
    std::string description;
    std::string prompt_template;

    static constexpr const char* kDocumentPlaceholder = "{document}";

    void validate() const {
        if (name.empty() || normalize_text(name) != name || name.find(' ') != std::string::npos)
            throw DataError("dimension name must be non-empty, normalized, single token: '" +
                            name + "'");
        size_t first = prompt_template.find(kDocumentPlaceholder);
        if (first == std::string::npos ||
            prompt_template.find(kDocumentPlaceholder, first + 1) != std::string::npos)
            throw DataError("dimension '" + name +
                            "': prompt_template needs exactly one {document} placeholder");
    }

    Json to_json() const {
        return Json{{"name", name},
                    {"description", description},
                    {"prompt_template", prompt_template}};
    }

    static DimensionSchema from_json(const Json& j) {
        DimensionSchema d;
        d.name = j.at("name").get<std::string>();
        d.description = j.value("description", "");
        d.prompt_template = j.value("prompt_template", std::string("{document}"));
        d.validate();
        return d;
    }
};

// A document plus its per-dimension label multisets (its cube-cell
// assignment). doc_id is an opaque string.
struct DocumentRecord {
    std::string doc_id;
    std::string text;
    std::map<std::string, LabelCounts> labels;  // dimension name -> multiset

    Json to_json() const {
        Json l = Json::object();
        for (const auto& [dim, counts] : labels) {
            Json m = Json::object();
            for (const auto& [label, count] : counts) m[label] = count;
            l[dim] = std::move(m);
        }
        return Json{{"doc_id", doc_id}, {"text", text}, {"labels", std::move(l)}};
    }

    static DocumentRecord from_json(const Json& j) {
        DocumentRecord r;
        r.doc_id = j.at("doc_id").get<std::string>();
        r.text = j.value("text", "");
        if (j.contains("labels")) {
            for (const auto& [dim, m] : j.at("labels").items()) {
                LabelCounts counts;
                for (const auto& [label, c] : m.items()) {
                    int n = c.get<int>();
                    if (n < 1)
                        throw DataError("doc '" + r.doc_id + "': label count < 1 for '" + label +
                                        "'");
                    counts[label] = n;
                }
                r.labels[dim] = std::move(counts);
            }
        }
        return r;
    }
};

// One (doc_id, occurrence count) entry in a posting list.
struct Posting {
    std::string doc_id;
    int count = 0;

    bool operator==(const Posting&) const = default;
};

// A partial cube coordinate: fixed labels on one or more dimensions,
// unassigned dimensions act as wildcards.
struct CubeCellRef {
    std::map<std::string, std::string> assignments;  // dimension -> label

    void validate() const {
        if (assignments.empty()) throw DataError("cube cell needs at least one assigned dimension");
    }
};

}  // namespace hypercube
