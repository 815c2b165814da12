#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hypercube/errors.hpp"
#include "hypercube/text.hpp"

namespace hypercube {

using EmbeddingVector = std::vector<double>;

inline double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const EmbeddingVector& v) { return std::sqrt(dot(v, v)); }

inline void l2_normalize(EmbeddingVector& v) {
    double n = l2_norm(v);
    if (n > 0.0)
        for (auto& x : v) x /= n;
}

// Vectors are kept unit-normalized, so cosine reduces to the dot product.
inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw DataError("cosine: dimensionality mismatch");
    return dot(a, b);
}

/// Text -> unit vector. Implementations must be deterministic per input.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual size_t dimension() const = 0;
    virtual EmbeddingVector embed(std::string_view text) = 0;

    std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) {
        if (texts.empty()) throw DataError("embed_batch: empty input list");
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed(t));
        return out;
    }
};

/// Deterministic offline embedder: hashed character-trigram counts projected
/// to a fixed dimensionality, then L2-normalized. Pure function of the input
/// string. Strings shorter than three characters contribute themselves as a
/// single feature.
class TrigramEmbedder : public Embedder {
public:
    static constexpr size_t kDimension = 256;

    size_t dimension() const override { return kDimension; }

    EmbeddingVector embed(std::string_view text) override {
        EmbeddingVector v(kDimension, 0.0);
        if (text.size() < 3) {
            v[fnv1a64(text) % kDimension] += 1.0;
        } else {
            for (size_t i = 0; i + 3 <= text.size(); ++i)
                v[fnv1a64(text.substr(i, 3)) % kDimension] += 1.0;
        }
        l2_normalize(v);
        return v;
    }
};

/// Memoizing wrapper; underlying embedders are deterministic, so caching is
/// transparent. Thread-safe.
class CachingEmbedder : public Embedder {
public:
    explicit CachingEmbedder(std::shared_ptr<Embedder> inner) : inner_(std::move(inner)) {}

    size_t dimension() const override { return inner_->dimension(); }

    EmbeddingVector embed(std::string_view text) override {
        std::string key(text);
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = cache_.find(key);
            if (it != cache_.end()) return it->second;
        }
        EmbeddingVector v = inner_->embed(text);
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.emplace(std::move(key), std::move(v)).first->second;
    }

    size_t cache_size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return cache_.size();
    }

private:
    std::shared_ptr<Embedder> inner_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
};

}  // namespace hypercube
