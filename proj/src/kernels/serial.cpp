#include "cbir/kernels.hpp"

#include <limits>

namespace cbir::kernels {

int nearest_centroid(std::span<const double> point, const Matrix& centroids) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centroids.rows(); ++c) {
        const double d = squared_distance(point, centroids.row(c));
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

namespace serial {

ResponseLayer hessian_layer(const IntegralImage& ii, int filterSize, int step, double dxyWeight) {
    ResponseLayer layer;
    layer.filterSize = filterSize;
    layer.step = step;
    layer.cols = (ii.width() + step - 1) / step;
    layer.rows = (ii.height() + step - 1) / step;
    layer.responses.resize(static_cast<std::size_t>(layer.cols) * layer.rows);
    layer.signs.resize(layer.responses.size());
    for (int cy = 0; cy < layer.rows; ++cy) {
        for (int cx = 0; cx < layer.cols; ++cx) {
            const auto h = hessian_response(ii, cx * step, cy * step, filterSize, dxyWeight);
            const std::size_t i = static_cast<std::size_t>(cy) * layer.cols + cx;
            layer.responses[i] = h.response;
            layer.signs[i] = static_cast<signed char>(h.laplacianSign);
        }
    }
    return layer;
}

std::vector<Descriptor> describe(const IntegralImage& ii, std::span<const InterestPoint> points) {
    std::vector<Descriptor> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(compute_descriptor(ii, p));
    return out;
}

void assign_nearest(const Matrix& points, const Matrix& centroids, std::span<int> assignments) {
    for (std::size_t i = 0; i < points.rows(); ++i) assignments[i] = nearest_centroid(points.row(i), centroids);
}

} // namespace serial
} // namespace cbir::kernels
