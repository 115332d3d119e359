#pragma once

#include "cbir/matrix.hpp"
#include "cbir/model.hpp"
#include "cbir/surf.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cbir {

struct ClusteringResult {
    Matrix centroids;
    std::vector<int> assignments;
    double sse = 0;
    int iterations = 0;
    bool converged = false;
};

/// State after one Lloyd iteration: the assignment made against the previous
/// centroids (after empty-cluster repair), its SSE before the means moved, and
/// the updated centroids.
struct LloydStep {
    int iteration = 0;
    std::vector<int> assignments;
    double sse = 0;
    Matrix centroids;
};

using LloydObserver = std::function<void(const LloydStep&)>;

/// Uniform double in [0,1) from the top 53 bits of a 64-bit draw.
double unit_uniform(std::uint64_t bits);

/// k-means++ seeding: first centre uniform, the rest by D^2 sampling.
Matrix kmeanspp_init(const Matrix& points, int k, std::uint64_t seed);

/// Lloyd iterations from the given centroids until the largest centroid move is
/// below `convergenceEps` or `maxIterations` is reached. A cluster that loses
/// all points is reseeded with the point farthest from its assigned centroid.
ClusteringResult lloyd(const Matrix& points, Matrix centroids, int maxIterations, double convergenceEps,
                       const LloydObserver& observer = {}, Execution exec = Execution::Parallel);

/// k-means++ followed by Lloyd. Throws InsufficientDataError when there are fewer points than clusters.
ClusteringResult kmeans(const Matrix& points, const IndexParams& params, const LloydObserver& observer = {},
                        Execution exec = Execution::Parallel);

/// Nearest centroid by squared Euclidean distance; ties go to the lowest index.
int assign_nearest(const Matrix& centroids, std::span<const double> point);

double sum_squared_error(const Matrix& points, const Matrix& centroids, std::span<const int> assignments);

} // namespace cbir
