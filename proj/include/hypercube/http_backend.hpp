#pragma once

#include <cstdlib>
#include <memory>
#include <string>

#include <httplib.h>

#include "hypercube/config.hpp"
#include "hypercube/embedding.hpp"
#include "hypercube/io.hpp"
#include "hypercube/llm.hpp"

namespace hypercube {

namespace detail {

inline std::string api_key_from_env(const std::string& env_var) {
    if (env_var.empty()) return "";
    const char* v = std::getenv(env_var.c_str());
    return v ? std::string(v) : std::string();
}

inline bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace detail

/// Chat-completions client speaking the common /v1/chat/completions JSON
/// protocol. Connection failures and 5xx/429 replies surface as retryable
/// backend errors; the LlmClient wrapper applies the backoff policy.
class HttpChatBackend : public ChatBackend {
public:
    HttpChatBackend(HttpEndpointConfig config, size_t max_in_flight = 4)
        : config_(std::move(config)), max_in_flight_(max_in_flight) {
        if (config_.endpoint.empty()) throw UsageError("http chat backend: endpoint is empty");
    }

    std::string chat(const std::string& model, const std::string& prompt,
                     double temperature) override {
        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(config_.timeout_s);
        client.set_read_timeout(config_.timeout_s);
        std::string key = detail::api_key_from_env(config_.api_key_env);
        if (!key.empty()) client.set_bearer_token_auth(key);

        Json body{{"model", model},
                  {"temperature", temperature},
                  {"messages", Json::array({Json{{"role", "user"}, {"content", prompt}}})}};
        auto res = client.Post("/v1/chat/completions", body.dump(), "application/json");
        if (!res)
            throw BackendError("chat endpoint unreachable: " + config_.endpoint,
                               /*retryable=*/true);
        if (res->status != 200)
            throw BackendError("chat endpoint returned status " + std::to_string(res->status) +
                                   ": " + res->body.substr(0, 200),
                               detail::retryable_status(res->status));
        try {
            Json j = Json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const Json::exception&) {
            throw ReplyParseError("chat endpoint reply did not match the completions schema",
                                  res->body);
        }
    }

    size_t max_parallelism() const override { return max_in_flight_; }

private:
    HttpEndpointConfig config_;
    size_t max_in_flight_;
};

/// Embeddings client for the /v1/embeddings protocol. Vectors are
/// re-normalized on receipt; replies are cached on disk by
/// hash(model, input) when a cache directory is set.
class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(HttpEndpointConfig config, std::string model, fs::path cache_dir = {},
                 int max_retries = 3)
        : config_(std::move(config)), model_(std::move(model)), cache_dir_(std::move(cache_dir)),
          max_retries_(max_retries) {
        if (config_.endpoint.empty()) throw UsageError("http embedder: endpoint is empty");
        if (!cache_dir_.empty()) fs::create_directories(cache_dir_);
    }

    size_t dimension() const override {
        if (dimension_ == 0)
            throw BackendError("http embedder dimensionality unknown before the first call");
        return dimension_;
    }

    EmbeddingVector embed(std::string_view text) override {
        std::string input(text);
        fs::path cache_file;
        if (!cache_dir_.empty()) {
            cache_file = cache_dir_ / ("embed-" + chat_request_key(model_, input) + ".json");
            if (fs::exists(cache_file)) {
                Json j = Json::parse(read_file(cache_file));
                EmbeddingVector v = j.get<EmbeddingVector>();
                if (dimension_ == 0) dimension_ = v.size();
                return v;
            }
        }

        EmbeddingVector v = fetch(input);
        l2_normalize(v);
        if (dimension_ == 0) dimension_ = v.size();
        if (v.size() != dimension_)
            throw BackendError("http embedder returned inconsistent dimensionality");
        if (!cache_file.empty()) write_file_atomic(cache_file, Json(v).dump());
        return v;
    }

private:
    EmbeddingVector fetch(const std::string& input) {
        int attempt = 0;
        for (;;) {
            try {
                return fetch_once(input);
            } catch (const BackendError& e) {
                if (!e.retryable() || attempt >= max_retries_) throw;
                ++attempt;
            }
        }
    }

    EmbeddingVector fetch_once(const std::string& input) {
        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(config_.timeout_s);
        client.set_read_timeout(config_.timeout_s);
        std::string key = detail::api_key_from_env(config_.api_key_env);
        if (!key.empty()) client.set_bearer_token_auth(key);

        Json body{{"model", model_}, {"input", Json::array({input})}};
        auto res = client.Post("/v1/embeddings", body.dump(), "application/json");
        if (!res)
            throw BackendError("embedding endpoint unreachable: " + config_.endpoint,
                               /*retryable=*/true);
        if (res->status != 200)
            throw BackendError("embedding endpoint returned status " +
                                   std::to_string(res->status),
                               detail::retryable_status(res->status));
        try {
            Json j = Json::parse(res->body);
            return j.at("data").at(0).at("embedding").get<EmbeddingVector>();
        } catch (const Json::exception&) {
            throw ReplyParseError("embedding endpoint reply did not match the embeddings schema",
                                  res->body);
        }
    }

    HttpEndpointConfig config_;
    std::string model_;
    fs::path cache_dir_;
    int max_retries_;
    size_t dimension_ = 0;
};

}  // namespace hypercube
