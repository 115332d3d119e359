#include "cbir/kernels.hpp"

namespace cbir::kernels::omp {

ResponseLayer hessian_layer(const IntegralImage& ii, int filterSize, int step, double dxyWeight) {
    ResponseLayer layer;
    layer.filterSize = filterSize;
    layer.step = step;
    layer.cols = (ii.width() + step - 1) / step;
    layer.rows = (ii.height() + step - 1) / step;
    layer.responses.resize(static_cast<std::size_t>(layer.cols) * layer.rows);
    layer.signs.resize(layer.responses.size());
    const int rows = layer.rows;
    const int cols = layer.cols;
#pragma omp parallel for schedule(static)
    for (int cy = 0; cy < rows; ++cy) {
        for (int cx = 0; cx < cols; ++cx) {
            const auto h = hessian_response(ii, cx * step, cy * step, filterSize, dxyWeight);
            const std::size_t i = static_cast<std::size_t>(cy) * cols + cx;
            layer.responses[i] = h.response;
            layer.signs[i] = static_cast<signed char>(h.laplacianSign);
        }
    }
    return layer;
}

std::vector<Descriptor> describe(const IntegralImage& ii, std::span<const InterestPoint> points) {
    std::vector<Descriptor> out(points.size());
    const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = compute_descriptor(ii, points[static_cast<std::size_t>(i)]);
    return out;
}

void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> assignments) {
    const auto n = static_cast<std::ptrdiff_t>(points.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        assignments[r] = nearest_centroid(points.row(r), centroids);
    }
}

} // namespace cbir::kernels::omp
