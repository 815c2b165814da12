#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "hypercube/embedding.hpp"
#include "hypercube/errors.hpp"

namespace hypercube {

struct ClusterSet {
    size_t k = 0;
    std::vector<int> assignments;             // point index -> cluster id
    std::vector<EmbeddingVector> centroids;   // k vectors
    double inertia = 0.0;                     // total squared distance
    std::vector<double> inertia_history;      // one entry per Lloyd iteration
    size_t iterations = 0;
};

namespace detail {

inline double squared_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Uniform double in [0, 1) scaled from raw engine draws, so results do not
// depend on the standard library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Deterministic given the seed:
/// ties in distance resolve to the lowest index, empty clusters keep their
/// previous centroid, and sampling uses raw engine draws. Stops at an
/// assignment fixpoint or after max_iterations.
class KMeans {
public:
    explicit KMeans(size_t k, uint64_t seed = 42, size_t max_iterations = 100)
        : k_(k), seed_(seed), max_iterations_(max_iterations) {}

    ClusterSet fit(const std::vector<EmbeddingVector>& points) const {
        if (k_ == 0) throw DataError("k-means: k must be positive");
        if (points.empty() || k_ > points.size())
            throw DataError("k-means: k (" + std::to_string(k_) +
                            ") exceeds number of points (" + std::to_string(points.size()) + ")");
        size_t dim = points[0].size();
        for (const auto& p : points)
            if (p.size() != dim) throw DataError("k-means: inconsistent point dimensionality");

        std::mt19937_64 rng(seed_);
        ClusterSet result;
        result.k = k_;
        result.centroids = seed_centroids(points, rng);
        result.assignments.assign(points.size(), -1);

        for (size_t iter = 0; iter < max_iterations_; ++iter) {
            bool changed = false;
            double inertia = 0.0;
            for (size_t i = 0; i < points.size(); ++i) {
                int best = 0;
                double best_dist = std::numeric_limits<double>::infinity();
                for (size_t c = 0; c < k_; ++c) {
                    double d = detail::squared_distance(points[i], result.centroids[c]);
                    if (d < best_dist) {
                        best_dist = d;
                        best = static_cast<int>(c);
                    }
                }
                if (result.assignments[i] != best) {
                    result.assignments[i] = best;
                    changed = true;
                }
                inertia += best_dist;
            }
            result.inertia = inertia;
            result.inertia_history.push_back(inertia);
            result.iterations = iter + 1;
            if (!changed) break;

            std::vector<EmbeddingVector> sums(k_, EmbeddingVector(dim, 0.0));
            std::vector<size_t> sizes(k_, 0);
            for (size_t i = 0; i < points.size(); ++i) {
                int c = result.assignments[i];
                for (size_t d = 0; d < dim; ++d) sums[static_cast<size_t>(c)][d] += points[i][d];
                ++sizes[static_cast<size_t>(c)];
            }
            for (size_t c = 0; c < k_; ++c) {
                if (sizes[c] == 0) continue;  // empty cluster keeps its centroid
                for (size_t d = 0; d < dim; ++d)
                    result.centroids[c][d] = sums[c][d] / static_cast<double>(sizes[c]);
            }
        }
        return result;
    }

private:
    std::vector<EmbeddingVector> seed_centroids(const std::vector<EmbeddingVector>& points,
                                                std::mt19937_64& rng) const {
        std::vector<EmbeddingVector> centroids;
        centroids.reserve(k_);
        size_t first = static_cast<size_t>(detail::uniform01(rng) * static_cast<double>(points.size()));
        if (first >= points.size()) first = points.size() - 1;
        centroids.push_back(points[first]);

        std::vector<double> min_dist(points.size());
        while (centroids.size() < k_) {
            double total = 0.0;
            for (size_t i = 0; i < points.size(); ++i) {
                double d = std::numeric_limits<double>::infinity();
                for (const auto& c : centroids)
                    d = std::min(d, detail::squared_distance(points[i], c));
                min_dist[i] = d;
                total += d;
            }
            size_t chosen = 0;
            if (total <= 0.0) {
                // All points coincide with existing centroids; pick the
                // first not already chosen.
                chosen = centroids.size() % points.size();
            } else {
                double target = detail::uniform01(rng) * total;
                double acc = 0.0;
                chosen = points.size() - 1;
                for (size_t i = 0; i < points.size(); ++i) {
                    acc += min_dist[i];
                    if (acc >= target) {
                        chosen = i;
                        break;
                    }
                }
            }
            centroids.push_back(points[chosen]);
        }
        return centroids;
    }

    size_t k_;
    uint64_t seed_;
    size_t max_iterations_;
};

}  // namespace hypercube
