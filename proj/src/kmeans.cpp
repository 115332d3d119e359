#include "cbir/kmeans.hpp"

#include "cbir/errors.hpp"
#include "cbir/kernels.hpp"

#include <cmath>
#include <random>
#include <string>

namespace cbir {

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

Matrix kmeanspp_init(const Matrix& points, int k, std::uint64_t seed) {
    const std::size_t n = points.rows();
    if (k < 1) throw ValidationError("k must be at least 1");
    if (n < static_cast<std::size_t>(k))
        throw InsufficientDataError("k-means needs at least k=" + std::to_string(k) + " points, got " +
                                    std::to_string(n));

    std::mt19937_64 rng(seed);
    Matrix centroids;
    std::size_t first = static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(n));
    centroids.append_row(points.row(first));

    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = squared_distance(points.row(i), centroids.row(0));

    while (centroids.rows() < static_cast<std::size_t>(k)) {
        double total = 0;
        for (double d : nearest) total += d;
        std::size_t pick = n - 1;
        const double u = unit_uniform(rng());
        if (total > 0) {
            const double target = u * total;
            double acc = 0;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest[i];
                if (nearest[i] > 0 && acc > target) {
                    pick = i;
                    break;
                }
            }
            // rounding can leave the cumulative sum just short of target
            while (nearest[pick] == 0 && pick > 0) --pick;
        } else {
            // every point coincides with a centre already chosen
            pick = static_cast<std::size_t>(u * static_cast<double>(n));
        }
        centroids.append_row(points.row(pick));
        const auto added = centroids.row(centroids.rows() - 1);
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], squared_distance(points.row(i), added));
    }
    return centroids;
}

int assign_nearest(const Matrix& centroids, std::span<const double> point) {
    if (centroids.empty()) throw ValidationError("no centroids to assign against");
    if (centroids.cols() != point.size())
        throw ValidationError("point has dimension " + std::to_string(point.size()) + ", centroids have " +
                              std::to_string(centroids.cols()));
    return kernels::nearest_centroid(point, centroids);
}

double sum_squared_error(const Matrix& points, const Matrix& centroids, std::span<const int> assignments) {
    double sse = 0;
    for (std::size_t i = 0; i < points.rows(); ++i)
        sse += squared_distance(points.row(i), centroids.row(static_cast<std::size_t>(assignments[i])));
    return sse;
}

namespace {

void assign_all(const Matrix& points, const Matrix& centroids, std::span<int> out, Execution exec) {
    if (exec == Execution::Parallel) kernels::omp::assign_nearest(points, centroids, out);
    else kernels::serial::assign_nearest(points, centroids, out);
}

// Moves the farthest point of a multi-member cluster into every empty cluster.
void repair_empty_clusters(const Matrix& points, const Matrix& centroids, std::vector<int>& assignments,
                           std::vector<std::size_t>& counts) {
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] != 0) continue;
        std::size_t far = points.rows();
        double far_d = -1;
        for (std::size_t i = 0; i < points.rows(); ++i) {
            const auto a = static_cast<std::size_t>(assignments[i]);
            if (counts[a] < 2) continue;
            const double d = squared_distance(points.row(i), centroids.row(a));
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far == points.rows()) return;
        --counts[static_cast<std::size_t>(assignments[far])];
        assignments[far] = static_cast<int>(c);
        ++counts[c];
    }
}

} // namespace

ClusteringResult lloyd(const Matrix& points, Matrix centroids, int maxIterations, double convergenceEps,
                       const LloydObserver& observer, Execution exec) {
    const std::size_t n = points.rows();
    const std::size_t k = centroids.rows();
    const std::size_t dim = centroids.cols();
    if (k == 0) throw ValidationError("lloyd needs at least one centroid");
    if (n < k) throw InsufficientDataError("fewer points than clusters");
    if (points.cols() != dim) throw ValidationError("points and centroids differ in dimension");

    ClusteringResult result;
    std::vector<int> assignments(n, 0);
    std::vector<std::size_t> counts(k);

    for (int iter = 1; iter <= maxIterations; ++iter) {
        assign_all(points, centroids, assignments, exec);
        const double sse = sum_squared_error(points, centroids, assignments);

        std::fill(counts.begin(), counts.end(), 0);
        for (int a : assignments) ++counts[static_cast<std::size_t>(a)];
        repair_empty_clusters(points, centroids, assignments, counts);

        Matrix updated(k, dim);
        for (std::size_t i = 0; i < n; ++i) {
            auto dst = updated.row(static_cast<std::size_t>(assignments[i]));
            const auto src = points.row(i);
            for (std::size_t d = 0; d < dim; ++d) dst[d] += src[d];
        }
        double max_shift = 0;
        for (std::size_t c = 0; c < k; ++c) {
            auto row = updated.row(c);
            if (counts[c] == 0) {
                std::copy(centroids.row(c).begin(), centroids.row(c).end(), row.begin());
            } else {
                for (double& v : row) v /= static_cast<double>(counts[c]);
            }
            max_shift = std::max(max_shift, std::sqrt(squared_distance(row, centroids.row(c))));
        }
        centroids = std::move(updated);
        result.iterations = iter;
        if (observer) observer(LloydStep{iter, assignments, sse, centroids});
        if (max_shift < convergenceEps) {
            result.converged = true;
            break;
        }
    }

    assign_all(points, centroids, assignments, exec);
    result.sse = sum_squared_error(points, centroids, assignments);
    result.assignments = std::move(assignments);
    result.centroids = std::move(centroids);
    return result;
}

ClusteringResult kmeans(const Matrix& points, const IndexParams& params, const LloydObserver& observer,
                        Execution exec) {
    if (params.k < 1) throw ValidationError("k must be at least 1");
    if (params.maxIterations < 1) throw ValidationError("maxIterations must be at least 1");
    if (!(params.convergenceEps > 0)) throw ValidationError("convergenceEps must be positive");
    Matrix init = kmeanspp_init(points, params.k, params.seed);
    return lloyd(points, std::move(init), params.maxIterations, params.convergenceEps, observer, exec);
}

} // namespace cbir
