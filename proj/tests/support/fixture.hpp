// Shared access to the case-study fixture corpus and temp-dir plumbing.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "hypercube/builder.hpp"
#include "hypercube/extraction.hpp"
#include "hypercube/index.hpp"
#include "hypercube/io.hpp"
#include "hypercube/llm.hpp"

namespace fixture {

namespace fs = std::filesystem;

inline fs::path dir() { return fs::path(HYPERCUBE_FIXTURES_DIR); }
inline fs::path corpus_path() { return dir() / "corpus.jsonl"; }
inline fs::path gazetteer_path() { return dir() / "gazetteer.json"; }
inline fs::path schema_path() { return dir() / "schema.json"; }
inline fs::path qa_path() { return dir() / "qa.jsonl"; }

inline std::vector<hypercube::CorpusDoc> load_corpus() {
    return hypercube::load_corpus_jsonl(corpus_path());
}

inline hypercube::Gazetteer load_gazetteer() {
    return hypercube::Gazetteer::load(gazetteer_path());
}

inline std::vector<hypercube::DimensionSchema> load_schema() {
    hypercube::Json j = hypercube::Json::parse(hypercube::read_file(schema_path()));
    std::vector<hypercube::DimensionSchema> dims;
    for (const auto& d : j.at("dimensions")) dims.push_back(hypercube::DimensionSchema::from_json(d));
    return dims;
}

/// The fixture index, built through the real extraction pipeline.
inline hypercube::HypercubeIndex build_index() {
    hypercube::GazetteerBackend backend(load_gazetteer());
    auto result = hypercube::index_corpus(load_corpus(), load_schema(), backend);
    return std::move(result.index);
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() /
                (tag + "-" + std::to_string(static_cast<unsigned long>(std::rand())) + "-" +
                 std::to_string(reinterpret_cast<uintptr_t>(this) & 0xffff));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

/// The case-study decomposition, scripted: the query splits into a location,
/// an event, and a theme component.
inline const char* kCaseStudyQuery =
    "How much rainfall did Melbourne Beach, Florida receive from Tropical Storm Fay?";

inline const char* kCaseStudyDecomposition =
    R"([{"dimension": "location", "content": "melbourne beach"},
        {"dimension": "event", "content": "tropical storm fay"},
        {"dimension": "theme", "content": "rainfall"}])";

/// Scripts a decomposition reply for `question` against the fixture schema.
inline void script_decomposition(hypercube::ScriptedChatBackend& backend,
                                 const hypercube::LlmClient& client, const std::string& question,
                                 const std::string& reply) {
    std::vector<std::string> names;
    for (const auto& d : load_schema()) names.push_back(d.name);
    std::string prompt = client.render(
        "decompose", {{"dimensions", hypercube::join(names, ", ")}, {"question", question}});
    backend.script(client.options().chat_model, prompt, reply);
}

}  // namespace fixture
