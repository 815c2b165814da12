#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hypercube/errors.hpp"

namespace hypercube {

namespace fs = std::filesystem;
using Json = nlohmann::json;

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Atomic write: temp file in the same directory, then rename over the target.
inline void write_file_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write file: " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("short write: " + tmp.string());
    }
    fs::rename(tmp, path);
}

// Calls fn(line_number, parsed_json) for every non-blank line.
inline void for_each_jsonl(const fs::path& path,
                           const std::function<void(size_t, const nlohmann::json&)>& fn) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": invalid JSON: " + e.what());
        }
        fn(lineno, j);
    }
}

struct CorpusDoc {
    std::string doc_id;
    std::string text;
};

// corpus.jsonl: one {"doc_id": ..., "text": ...} object per line.
inline std::vector<CorpusDoc> load_corpus_jsonl(const fs::path& path) {
    std::vector<CorpusDoc> docs;
    for_each_jsonl(path, [&](size_t lineno, const nlohmann::json& j) {
        if (!j.contains("doc_id") || !j.contains("text"))
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": corpus line needs doc_id and text");
        docs.push_back({j.at("doc_id").get<std::string>(), j.at("text").get<std::string>()});
    });
    return docs;
}

struct QaRecord {
    std::string question;
    std::string gold_answer;
    std::vector<std::string> gold_doc_ids;
};

// qa.jsonl: one {"question","answer","gold_doc_ids"} object per line.
inline std::vector<QaRecord> load_qa_jsonl(const fs::path& path) {
    std::vector<QaRecord> records;
    for_each_jsonl(path, [&](size_t lineno, const nlohmann::json& j) {
        if (!j.contains("question"))
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": missing question");
        QaRecord r;
        r.question = j.at("question").get<std::string>();
        r.gold_answer = j.value("answer", "");
        if (j.contains("gold_doc_ids"))
            for (const auto& id : j.at("gold_doc_ids")) r.gold_doc_ids.push_back(id.get<std::string>());
        records.push_back(std::move(r));
    });
    return records;
}

}  // namespace hypercube
