#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hypercube/io.hpp"
#include "hypercube/types.hpp"

namespace hypercube {

/// Per-dimension inverted maps label -> postings, plus a document store.
/// Cube cells are materialized implicitly: a cell is the intersection of the
/// posting lists of its assigned (dimension, label) pairs. Append-only during
/// build; all query methods are const, so a built index is safe for any
/// number of concurrent readers.
class HypercubeIndex {
public:
    using PostingList = std::vector<Posting>;
    // label -> postings sorted by doc_id
    using DimensionPostings = std::map<std::string, PostingList>;

    HypercubeIndex() = default;

    explicit HypercubeIndex(std::vector<DimensionSchema> dimensions)
        : dimensions_(std::move(dimensions)) {
        std::set<std::string> seen;
        for (const auto& d : dimensions_) {
            d.validate();
            if (!seen.insert(d.name).second)
                throw DataError("duplicate dimension name: '" + d.name + "'");
            postings_[d.name];  // materialize empty map per dimension
        }
    }

    const std::vector<DimensionSchema>& dimensions() const { return dimensions_; }

    bool has_dimension(const std::string& name) const { return postings_.count(name) > 0; }

    const DimensionSchema& dimension(const std::string& name) const {
        for (const auto& d : dimensions_)
            if (d.name == name) return d;
        throw DataError(unknown_dimension_message(name));
    }

    size_t doc_count() const { return doc_store_.size(); }

    const std::map<std::string, DocumentRecord>& doc_store() const { return doc_store_; }

    const DocumentRecord& doc(const std::string& doc_id) const {
        auto it = doc_store_.find(doc_id);
        if (it == doc_store_.end()) throw DataError("unknown doc_id: '" + doc_id + "'");
        return it->second;
    }

    bool has_doc(const std::string& doc_id) const { return doc_store_.count(doc_id) > 0; }

    void add_document(DocumentRecord record) {
        if (doc_store_.count(record.doc_id))
            throw DataError("duplicate doc_id: '" + record.doc_id + "'");
        for (const auto& [dim, counts] : record.labels) {
            if (!has_dimension(dim)) throw DataError(unknown_dimension_message(dim));
            for (const auto& [label, count] : counts) {
                // Labels are stored post-normalization, so they must be
                // fixed points of the normalization rule.
                if (label.empty() || normalize_text(label) != label)
                    throw DataError("label not normalized on dimension '" + dim + "': '" + label +
                                    "'");
                if (count < 1)
                    throw DataError("doc '" + record.doc_id + "': count < 1 for label '" + label +
                                    "'");
            }
        }
        for (const auto& [dim, counts] : record.labels) {
            for (const auto& [label, count] : counts) {
                PostingList& plist = postings_[dim][label];
                Posting p{record.doc_id, count};
                auto pos = std::lower_bound(
                    plist.begin(), plist.end(), p,
                    [](const Posting& a, const Posting& b) { return a.doc_id < b.doc_id; });
                plist.insert(pos, std::move(p));
            }
        }
        doc_store_.emplace(record.doc_id, std::move(record));
    }

    /// All and only the docs carrying `label` on `dimension`, sorted by
    /// doc_id. Empty for an unpopulated cell; the label must be normalized.
    const PostingList& lookup(const std::string& dimension, const std::string& label) const {
        auto dim_it = postings_.find(dimension);
        if (dim_it == postings_.end()) throw DataError(unknown_dimension_message(dimension));
        auto it = dim_it->second.find(label);
        if (it == dim_it->second.end()) return empty_postings_;
        return it->second;
    }

    /// Label -> postings for one dimension: the dimension's vocabulary.
    const DimensionPostings& dimension_postings(const std::string& dimension) const {
        auto it = postings_.find(dimension);
        if (it == postings_.end()) throw DataError(unknown_dimension_message(dimension));
        return it->second;
    }

    /// Docs housed in a (possibly partial) cube cell: the intersection of
    /// lookups over all assigned (dimension, label) pairs.
    std::set<std::string> cell_docs(const CubeCellRef& cell) const {
        cell.validate();
        std::set<std::string> result;
        bool first = true;
        for (const auto& [dim, label] : cell.assignments) {
            const PostingList& plist = lookup(dim, label);
            std::set<std::string> ids;
            for (const auto& p : plist) ids.insert(p.doc_id);
            if (first) {
                result = std::move(ids);
                first = false;
            } else {
                std::set<std::string> merged;
                std::set_intersection(result.begin(), result.end(), ids.begin(), ids.end(),
                                      std::inserter(merged, merged.begin()));
                result = std::move(merged);
            }
            if (result.empty()) break;
        }
        return result;
    }

    /// Postings and doc_store must agree exactly; used by tests and after load.
    void validate_consistency() const {
        size_t posting_entries = 0;
        for (const auto& [dim, labels] : postings_) {
            for (const auto& [label, plist] : labels) {
                for (size_t i = 0; i < plist.size(); ++i) {
                    if (i > 0 && !(plist[i - 1].doc_id < plist[i].doc_id))
                        throw DataError("posting list not strictly sorted for (" + dim + ", " +
                                        label + ")");
                    auto doc_it = doc_store_.find(plist[i].doc_id);
                    if (doc_it == doc_store_.end())
                        throw DataError("posting references unknown doc '" + plist[i].doc_id + "'");
                    auto lbl_it = doc_it->second.labels.find(dim);
                    if (lbl_it == doc_it->second.labels.end() ||
                        lbl_it->second.count(label) == 0 ||
                        lbl_it->second.at(label) != plist[i].count)
                        throw DataError("posting (" + dim + ", " + label + ", " + plist[i].doc_id +
                                        ") disagrees with doc_store");
                    ++posting_entries;
                }
            }
        }
        size_t doc_entries = 0;
        for (const auto& [id, rec] : doc_store_) {
            for (const auto& [dim, counts] : rec.labels) {
                if (!has_dimension(dim)) throw DataError(unknown_dimension_message(dim));
                doc_entries += counts.size();
            }
        }
        if (doc_entries != posting_entries)
            throw DataError("doc_store and postings disagree on entry count");
    }

    // --- Persistence -------------------------------------------------------
    // Directory layout: schema.json, docs.jsonl (sorted by doc_id),
    // postings.jsonl (dimensions in schema order, labels sorted). Everything
    // is canonically ordered so identical content is byte-identical on disk.

    void save(const fs::path& dir) const {
        fs::create_directories(dir);

        Json schema = Json::object();
        Json dims = Json::array();
        for (const auto& d : dimensions_) dims.push_back(d.to_json());
        schema["dimensions"] = std::move(dims);
        write_file_atomic(dir / "schema.json", schema.dump(2) + "\n");

        std::string docs_out;
        for (const auto& [id, rec] : doc_store_) {
            docs_out += rec.to_json().dump();
            docs_out += '\n';
        }
        write_file_atomic(dir / "docs.jsonl", docs_out);

        std::string postings_out;
        for (const auto& d : dimensions_) {
            const auto& labels = postings_.at(d.name);
            for (const auto& [label, plist] : labels) {
                Json arr = Json::array();
                for (const auto& p : plist) arr.push_back(Json::array({p.doc_id, p.count}));
                Json line{{"dimension", d.name}, {"label", label}, {"postings", std::move(arr)}};
                postings_out += line.dump();
                postings_out += '\n';
            }
        }
        write_file_atomic(dir / "postings.jsonl", postings_out);
    }

    static HypercubeIndex load(const fs::path& dir) {
        Json schema;
        try {
            schema = Json::parse(read_file(dir / "schema.json"));
        } catch (const Json::exception& e) {
            throw DataError("invalid schema.json in " + dir.string() + ": " + e.what());
        }
        std::vector<DimensionSchema> dims;
        for (const auto& j : schema.at("dimensions")) dims.push_back(DimensionSchema::from_json(j));
        HypercubeIndex index(std::move(dims));

        for_each_jsonl(dir / "docs.jsonl", [&](size_t, const Json& j) {
            DocumentRecord rec = DocumentRecord::from_json(j);
            if (index.doc_store_.count(rec.doc_id))
                throw DataError("duplicate doc_id in docs.jsonl: '" + rec.doc_id + "'");
            index.doc_store_.emplace(rec.doc_id, std::move(rec));
        });

        for_each_jsonl(dir / "postings.jsonl", [&](size_t, const Json& j) {
            std::string dim = j.at("dimension").get<std::string>();
            std::string label = j.at("label").get<std::string>();
            if (!index.has_dimension(dim)) throw DataError(index.unknown_dimension_message(dim));
            PostingList plist;
            for (const auto& e : j.at("postings"))
                plist.push_back({e.at(0).get<std::string>(), e.at(1).get<int>()});
            index.postings_[dim][label] = std::move(plist);
        });

        index.validate_consistency();
        return index;
    }

private:
    std::string unknown_dimension_message(const std::string& name) const {
        std::string msg = "unknown dimension '" + name + "'; valid dimensions:";
        for (const auto& d : dimensions_) msg += " '" + d.name + "'";
        return msg;
    }

    std::vector<DimensionSchema> dimensions_;
    std::map<std::string, DimensionPostings> postings_;  // dimension -> label -> postings
    std::map<std::string, DocumentRecord> doc_store_;
    PostingList empty_postings_;
};

}  // namespace hypercube
