#pragma once

#include <set>
#include <string>

#include "hypercube/io.hpp"
#include "hypercube/llm.hpp"
#include "hypercube/retrieval.hpp"

namespace hypercube {

enum class BackendKind { llm, gazetteer, scripted };

inline BackendKind parse_backend_kind(const std::string& name) {
    if (name == "llm") return BackendKind::llm;
    if (name == "gazetteer") return BackendKind::gazetteer;
    if (name == "scripted") return BackendKind::scripted;
    throw UsageError("unknown backend '" + name + "' (expected llm, gazetteer, or scripted)");
}

inline std::string backend_kind_name(BackendKind kind) {
    switch (kind) {
        case BackendKind::llm: return "llm";
        case BackendKind::gazetteer: return "gazetteer";
        case BackendKind::scripted: return "scripted";
    }
    return "?";
}

struct HttpEndpointConfig {
    std::string endpoint;  // e.g. http://localhost:8000
    std::string api_key_env = "HYPERCUBE_API_KEY";
    int timeout_s = 30;
};

struct AppConfig {
    fs::path index_dir = "index";
    BackendKind backend = BackendKind::gazetteer;
    fs::path gazetteer_path;
    fs::path prompts_path;
    fs::path scripted_path;
    std::string embedder = "trigram";  // trigram | http
    RetrievalConfig retrieval;
    LlmOptions llm;
    HttpEndpointConfig http;
    uint64_t seed = 42;

    static AppConfig load(const fs::path& path) {
        Json j;
        try {
            j = Json::parse(read_file(path));
        } catch (const Json::exception& e) {
            throw DataError("invalid config file " + path.string() + ": " + e.what());
        }
        AppConfig c;
        c.index_dir = j.value("index_dir", c.index_dir.string());
        if (j.contains("backend")) c.backend = parse_backend_kind(j.at("backend").get<std::string>());
        c.gazetteer_path = j.value("gazetteer", "");
        c.prompts_path = j.value("prompts", "");
        c.scripted_path = j.value("scripted_replies", "");
        c.embedder = j.value("embedder", c.embedder);
        if (c.embedder != "trigram" && c.embedder != "http")
            throw DataError("config: embedder must be 'trigram' or 'http'");
        c.seed = j.value("seed", c.seed);

        if (j.contains("retrieval")) {
            const Json& r = j.at("retrieval");
            c.retrieval.top_k = r.value("top_k", c.retrieval.top_k);
            c.retrieval.tau = r.value("tau", c.retrieval.tau);
            c.retrieval.semantic_enabled = r.value("semantic_enabled", true);
            c.retrieval.exact_enabled = r.value("exact_enabled", true);
            if (r.contains("disabled_dimensions"))
                for (const auto& d : r.at("disabled_dimensions"))
                    c.retrieval.disabled_dimensions.insert(d.get<std::string>());
            c.retrieval.validate();
        }

        if (j.contains("llm")) {
            const Json& l = j.at("llm");
            c.llm.chat_model = l.value("chat_model", c.llm.chat_model);
            c.llm.embed_model = l.value("embed_model", c.llm.embed_model);
            c.llm.temperature = l.value("temperature", 0.0);
            c.llm.cache_dir = l.value("cache_dir", "");
            c.llm.max_retries = l.value("max_retries", c.llm.max_retries);
            c.llm.retry_base_ms = l.value("retry_base_ms", c.llm.retry_base_ms);
            c.llm.max_in_flight = l.value("max_in_flight", c.llm.max_in_flight);
            c.http.endpoint = l.value("endpoint", "");
            c.http.api_key_env = l.value("api_key_env", c.http.api_key_env);
            c.http.timeout_s = l.value("timeout_s", c.http.timeout_s);
        }
        return c;
    }

    // Paths referenced by the active backend must exist before a command runs.
    void validate_paths() const {
        auto require = [](const fs::path& p, const std::string& what) {
            if (p.empty()) throw UsageError(what + " path not configured");
            if (!fs::exists(p)) throw DataError(what + " path does not exist: " + p.string());
        };
        if (backend == BackendKind::gazetteer) require(gazetteer_path, "gazetteer");
        if (backend == BackendKind::scripted) require(scripted_path, "scripted replies");
        if (backend == BackendKind::llm && http.endpoint.empty())
            throw UsageError("llm backend requires an endpoint in the config");
        if (!prompts_path.empty() && !fs::exists(prompts_path))
            throw DataError("prompts path does not exist: " + prompts_path.string());
    }
};

}  // namespace hypercube
