#pragma once

#include <cstdint>
#include <vector>

#include "error.hpp"

namespace ecco {

struct KMeansOptions {
    int clusters = 0;
    int max_iterations = 50;
    double relative_tolerance = 1e-7;
    int restarts = 4;
};

struct KMeansResult {
    std::vector<double> centroids; // clusters * dim, row-major
    std::vector<int> assignment;   // per point
    double objective = 0.0;        // weighted within-cluster squared error
};

// Weighted Lloyd iterations from k-means++ seeding, deterministic for a given
// seed. Ties in assignment go to the lower centroid index; empty clusters are
// re-seeded at the point farthest from its current centroid. Runs
// options.restarts independent starts and keeps the best objective.
// `weights` may be empty (uniform). Handles clusters > distinct points by
// leaving duplicate centroids in place.
KMeansResult kmeans(const std::vector<double>& points, size_t dim,
                    const std::vector<double>& weights,
                    const KMeansOptions& options, uint64_t seed);

} // namespace ecco
