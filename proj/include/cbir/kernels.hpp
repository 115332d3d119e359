#pragma once

// Data-parallel inner loops of the engine. Every kernel exists twice: an OpenMP
// version used in production and a plain serial reference kept for tests and
// benchmarks. Both produce bit-identical results.

#include "cbir/matrix.hpp"
#include "cbir/surf.hpp"

#include <span>
#include <vector>

namespace cbir::kernels {

/// Hessian responses of one filter size sampled on a regular grid.
struct ResponseLayer {
    int filterSize = 0;
    int step = 0;
    int cols = 0; // grid cells along x
    int rows = 0; // grid cells along y
    std::vector<double> responses;
    std::vector<signed char> signs;

    double response(int cx, int cy) const { return responses[static_cast<std::size_t>(cy) * cols + cx]; }
    int sign(int cx, int cy) const { return signs[static_cast<std::size_t>(cy) * cols + cx]; }
};

namespace serial {
ResponseLayer hessian_layer(const IntegralImage& ii, int filterSize, int step, double dxyWeight);
std::vector<Descriptor> describe(const IntegralImage& ii, std::span<const InterestPoint> points);
/// Index of the nearest centroid per row of `points`, ties to the lowest index.
void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> assignments);
} // namespace serial

namespace omp {
ResponseLayer hessian_layer(const IntegralImage& ii, int filterSize, int step, double dxyWeight);
std::vector<Descriptor> describe(const IntegralImage& ii, std::span<const InterestPoint> points);
void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> assignments);
} // namespace omp

/// Nearest centroid of a single row; shared by both kernel families.
int nearest_centroid(std::span<const double> point, const Matrix& centroids);

} // namespace cbir::kernels
