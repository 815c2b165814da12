#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "hypercube/index.hpp"
#include "hypercube/ranking.hpp"
#include "hypercube/retrieval.hpp"

namespace hypercube {

inline Json explanation_to_json(const ExplanationRecord& record) {
    Json matched = Json::object();
    for (const auto& [dim, labels] : record.matched) {
        Json dim_j = Json::object();
        for (const auto& [label, e] : labels)
            dim_j[label] = Json{{"count", e.count}, {"components", e.components}};
        matched[dim] = std::move(dim_j);
    }
    return Json{{"doc_id", record.doc_id}, {"matched", std::move(matched)}};
}

/// Ranked doc ids with per-document match evidence, the machine-readable
/// retrieval report.
inline Json make_retrieval_report(const std::string& query,
                                  const std::vector<QueryComponent>& components,
                                  const RankedList& ranked,
                                  const std::vector<ExplanationRecord>& explanations) {
    Json comp = Json::array();
    for (const auto& c : components)
        comp.push_back(Json{{"dimension", c.dimension}, {"content", c.content}});

    Json results = Json::array();
    for (size_t i = 0; i < ranked.entries.size(); ++i) {
        const auto& e = ranked.entries[i];
        Json r{{"rank", i + 1},
               {"doc_id", e.doc_id},
               {"coverage", e.coverage},
               {"n_components", components.size()},
               {"tier", e.tier == CoverageTier::full ? "full" : "partial"},
               {"exact_score", e.exact_score},
               {"freq_sum", e.freq_sum}};
        if (i < explanations.size()) r["matched"] = explanation_to_json(explanations[i])["matched"];
        results.push_back(std::move(r));
    }
    return Json{{"query", query}, {"components", std::move(comp)}, {"results", std::move(results)}};
}

/// Aligned-text rendering of match evidence: one row per document, one
/// column per dimension, cells listing 'label': count.
inline std::string render_explanation_table(const HypercubeIndex& index,
                                            const RankedList& ranked,
                                            const std::vector<ExplanationRecord>& explanations) {
    std::vector<std::string> dims;
    for (const auto& d : index.dimensions()) dims.push_back(d.name);

    auto cell_text = [&](const ExplanationRecord& rec, const std::string& dim) {
        auto it = rec.matched.find(dim);
        if (it == rec.matched.end() || it->second.empty()) return std::string("--");
        std::vector<std::string> parts;
        for (const auto& [label, e] : it->second)
            parts.push_back("'" + label + "': " + std::to_string(e.count));
        return join(parts, ", ");
    };

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{"doc"};
    header.insert(header.end(), dims.begin(), dims.end());
    grid.push_back(header);
    for (size_t i = 0; i < ranked.entries.size(); ++i) {
        std::vector<std::string> row{ranked.entries[i].doc_id};
        for (const auto& d : dims)
            row.push_back(i < explanations.size() ? cell_text(explanations[i], d) : "--");
        grid.push_back(std::move(row));
    }

    std::vector<size_t> widths(header.size(), 0);
    for (const auto& row : grid)
        for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());

    std::ostringstream out;
    for (size_t r = 0; r < grid.size(); ++r) {
        for (size_t c = 0; c < grid[r].size(); ++c) {
            out << std::left << std::setw(static_cast<int>(widths[c]) + 2) << grid[r][c];
        }
        out << '\n';
        if (r == 0) {
            for (size_t c = 0; c < widths.size(); ++c)
                out << std::string(widths[c], '-') << "  ";
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace hypercube
