#include "kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "rng.hpp"

namespace ecco {

namespace {

double sq_distance(const double* a, const double* b, size_t dim) {
    double s = 0.0;
    for (size_t d = 0; d < dim; ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

// k-means++: first centroid sampled by weight, the rest by weight times
// squared distance to the nearest chosen centroid.
std::vector<double> seed_centroids(const std::vector<double>& points, size_t dim,
                                   const std::vector<double>& weights, int k, Rng& rng) {
    const size_t n = points.size() / dim;
    std::vector<double> centroids(static_cast<size_t>(k) * dim);
    std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());

    auto pick_by_mass = [&](const std::vector<double>& mass, size_t fallback) {
        double total = 0.0;
        for (double m : mass) total += m;
        if (!(total > 0.0)) return fallback % n;
        const double r = rng.uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < n; ++i) {
            acc += mass[i];
            if (r < acc) return i;
        }
        return n - 1;
    };

    std::vector<double> mass(n);
    for (int c = 0; c < k; ++c) {
        size_t chosen;
        if (c == 0) {
            for (size_t i = 0; i < n; ++i) mass[i] = weights[i];
            chosen = pick_by_mass(mass, rng.index(n));
        } else {
            for (size_t i = 0; i < n; ++i) mass[i] = weights[i] * best_d2[i];
            chosen = pick_by_mass(mass, static_cast<size_t>(c));
        }
        const double* p = &points[chosen * dim];
        std::copy(p, p + dim, &centroids[static_cast<size_t>(c) * dim]);
        for (size_t i = 0; i < n; ++i) {
            best_d2[i] = std::min(best_d2[i], sq_distance(&points[i * dim], p, dim));
        }
    }
    return centroids;
}

struct LloydState {
    std::vector<double> centroids;
    std::vector<int> assignment;
    std::vector<double> point_d2; // squared distance to assigned centroid
    double objective = 0.0;
};

void assign_points(const std::vector<double>& points, size_t dim,
                   const std::vector<double>& weights, int k, LloydState& st,
                   bool use_threads) {
    const size_t n = points.size() / dim;
    auto one = [&](size_t i) {
        const double* p = &points[i * dim];
        int best = 0;
        double best_d = sq_distance(p, &st.centroids[0], dim);
        for (int c = 1; c < k; ++c) {
            const double d = sq_distance(p, &st.centroids[static_cast<size_t>(c) * dim], dim);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        st.assignment[i] = best;
        st.point_d2[i] = best_d;
    };
    if (use_threads) {
        parallel_for_index(n, one);
    } else {
        for (size_t i = 0; i < n; ++i) one(i);
    }
    double obj = 0.0;
    for (size_t i = 0; i < n; ++i) obj += weights[i] * st.point_d2[i];
    st.objective = obj;
}

// Re-seed empty clusters at the point farthest from its assigned centroid
// (ties to the lowest point index); points claimed by one repair are not
// reused by the next.
void repair_empty_clusters(const std::vector<double>& points, size_t dim, int k,
                           const std::vector<double>& cluster_mass, LloydState& st) {
    const size_t n = points.size() / dim;
    std::vector<bool> claimed(n, false);
    for (int c = 0; c < k; ++c) {
        if (cluster_mass[static_cast<size_t>(c)] > 0.0) continue;
        size_t far_idx = 0;
        double far_d = -1.0;
        for (size_t i = 0; i < n; ++i) {
            if (claimed[i]) continue;
            if (st.point_d2[i] > far_d) {
                far_d = st.point_d2[i];
                far_idx = i;
            }
        }
        claimed[far_idx] = true;
        std::copy(&points[far_idx * dim], &points[far_idx * dim] + dim,
                  &st.centroids[static_cast<size_t>(c) * dim]);
    }
}

KMeansResult run_once(const std::vector<double>& points, size_t dim,
                      const std::vector<double>& weights,
                      const KMeansOptions& options, uint64_t seed) {
    const size_t n = points.size() / dim;
    const int k = options.clusters;
    Rng rng(seed);

    LloydState st;
    st.centroids = seed_centroids(points, dim, weights, k, rng);
    st.assignment.assign(n, 0);
    st.point_d2.assign(n, 0.0);

    const bool use_threads = n * static_cast<size_t>(k) * dim > (1u << 18);
    double prev_obj = std::numeric_limits<double>::infinity();
    std::vector<double> sums(static_cast<size_t>(k) * dim);
    std::vector<double> mass(static_cast<size_t>(k));

    for (int iter = 0; iter < options.max_iterations; ++iter) {
        assign_points(points, dim, weights, k, st, use_threads);

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(mass.begin(), mass.end(), 0.0);
        for (size_t i = 0; i < n; ++i) {
            const int c = st.assignment[i];
            const double w = weights[i];
            mass[static_cast<size_t>(c)] += w;
            const double* p = &points[i * dim];
            double* s = &sums[static_cast<size_t>(c) * dim];
            for (size_t d = 0; d < dim; ++d) s[d] += w * p[d];
        }
        bool had_empty = false;
        for (int c = 0; c < k; ++c) {
            if (mass[static_cast<size_t>(c)] > 0.0) {
                double* ctr = &st.centroids[static_cast<size_t>(c) * dim];
                for (size_t d = 0; d < dim; ++d) {
                    ctr[d] = sums[static_cast<size_t>(c) * dim + d] / mass[static_cast<size_t>(c)];
                }
            } else {
                had_empty = true;
            }
        }
        if (had_empty) {
            repair_empty_clusters(points, dim, k, mass, st);
        }

        if (!had_empty && prev_obj != std::numeric_limits<double>::infinity()) {
            const double denom = std::max(prev_obj, 1e-300);
            if (prev_obj - st.objective >= 0 &&
                (prev_obj - st.objective) / denom < options.relative_tolerance) {
                break;
            }
        }
        prev_obj = st.objective;
    }
    // Final assignment against the last centroid update.
    assign_points(points, dim, weights, k, st, use_threads);

    KMeansResult result;
    result.centroids = std::move(st.centroids);
    result.assignment = std::move(st.assignment);
    result.objective = st.objective;
    return result;
}

} // namespace

KMeansResult kmeans(const std::vector<double>& points, size_t dim,
                    const std::vector<double>& weights,
                    const KMeansOptions& options, uint64_t seed) {
    if (dim == 0 || points.size() % dim != 0 || points.empty()) {
        raise(ErrorCode::invalid_argument, "bad point array");
    }
    if (options.clusters < 1) {
        raise(ErrorCode::invalid_argument, "clusters must be positive");
    }
    const size_t n = points.size() / dim;
    std::vector<double> w = weights;
    if (w.empty()) {
        w.assign(n, 1.0);
    }
    if (w.size() != n) {
        raise(ErrorCode::invalid_argument, "weight count does not match points");
    }

    KMeansResult best;
    bool have_best = false;
    const int restarts = std::max(1, options.restarts);
    for (int r = 0; r < restarts; ++r) {
        KMeansResult res = run_once(points, dim, w, options, derive_seed(seed, 0x6B6D, r));
        if (!have_best || res.objective < best.objective) {
            best = std::move(res);
            have_best = true;
        }
    }
    return best;
}

} // namespace ecco
