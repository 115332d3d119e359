#include "cbir/surf.hpp"

#include "cbir/errors.hpp"
#include "cbir/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cbir {

IntegralImage::IntegralImage(const GrayImage& image)
    : width_(image.width), height_(image.height),
      table_(static_cast<std::size_t>(image.width) * image.height, 0.0) {
    for (int y = 0; y < height_; ++y) {
        double row_sum = 0;
        for (int x = 0; x < width_; ++x) {
            row_sum += image.at(x, y);
            const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
            table_[i] = row_sum + (y > 0 ? table_[i - width_] : 0.0);
        }
    }
}

double box_sum(const IntegralImage& ii, const Rect& rect) {
    const int x0 = std::max(rect.x, 0);
    const int y0 = std::max(rect.y, 0);
    const int x1 = std::min(rect.x + rect.width, ii.width()) - 1;
    const int y1 = std::min(rect.y + rect.height, ii.height()) - 1;
    if (x0 > x1 || y0 > y1) return 0.0;

    const double a = (x0 > 0 && y0 > 0) ? ii.at(x0 - 1, y0 - 1) : 0.0;
    const double b = (y0 > 0) ? ii.at(x1, y0 - 1) : 0.0;
    const double c = (x0 > 0) ? ii.at(x0 - 1, y1) : 0.0;
    const double d = ii.at(x1, y1);
    return d - b - c + a;
}

void validate(const ExtractorParams& params) {
    if (params.octaves < 1) throw ValidationError("octaves must be at least 1");
    if (params.intervalsPerOctave < 3) throw ValidationError("intervalsPerOctave must be at least 3");
    if (!(params.hessianThreshold >= 0)) throw ValidationError("hessianThreshold must be non-negative");
    if (params.initialSamplingStep < 1) throw ValidationError("initialSamplingStep must be at least 1");
    if (!(params.dxyWeight > 0 && params.dxyWeight <= 1)) throw ValidationError("dxyWeight must lie in (0,1]");
}

int filter_size(int octave, int interval) { return 3 * ((1 << (octave + 1)) * (interval + 1) + 1); }

bool filter_fits(const IntegralImage& ii, int x, int y, int filterSize) {
    const int border = (filterSize - 1) / 2;
    return x - border >= 0 && y - border >= 0 && x + border < ii.width() && y + border < ii.height();
}

HessianResponse hessian_response(const IntegralImage& ii, int x, int y, int filterSize, double dxyWeight) {
    if (!filter_fits(ii, x, y, filterSize)) return {};
    const int lobe = filterSize / 3;
    const int border = (filterSize - 1) / 2;
    const double inv_area = 1.0 / (static_cast<double>(filterSize) * filterSize);

    const double dxx = box_sum(ii, {x - border, y - lobe + 1, filterSize, 2 * lobe - 1}) -
                       3.0 * box_sum(ii, {x - lobe / 2, y - lobe + 1, lobe, 2 * lobe - 1});
    const double dyy = box_sum(ii, {x - lobe + 1, y - border, 2 * lobe - 1, filterSize}) -
                       3.0 * box_sum(ii, {x - lobe + 1, y - lobe / 2, 2 * lobe - 1, lobe});
    const double dxy = box_sum(ii, {x + 1, y - lobe, lobe, lobe}) + box_sum(ii, {x - lobe, y + 1, lobe, lobe}) -
                       box_sum(ii, {x - lobe, y - lobe, lobe, lobe}) - box_sum(ii, {x + 1, y + 1, lobe, lobe});

    const double nxx = dxx * inv_area;
    const double nyy = dyy * inv_area;
    const double nxy = dxy * inv_area * dxyWeight;
    return {nxx * nyy - nxy * nxy, (nxx + nyy) >= 0 ? 1 : -1};
}

std::vector<InterestPoint> detect_interest_points(const IntegralImage& ii, const ExtractorParams& params,
                                                  Execution exec) {
    validate(params);
    std::vector<InterestPoint> points;
    if (ii.width() < filter_size(0, 0) || ii.height() < filter_size(0, 0)) return points;

    for (int octave = 0; octave < params.octaves; ++octave) {
        const int step = params.initialSamplingStep << octave;
        std::vector<kernels::ResponseLayer> layers;
        layers.reserve(static_cast<std::size_t>(params.intervalsPerOctave));
        for (int i = 0; i < params.intervalsPerOctave; ++i) {
            const int size = filter_size(octave, i);
            layers.push_back(exec == Execution::Parallel
                                 ? kernels::omp::hessian_layer(ii, size, step, params.dxyWeight)
                                 : kernels::serial::hessian_layer(ii, size, step, params.dxyWeight));
        }

        for (int i = 1; i + 1 < params.intervalsPerOctave; ++i) {
            const auto& below = layers[static_cast<std::size_t>(i - 1)];
            const auto& mid = layers[static_cast<std::size_t>(i)];
            const auto& above = layers[static_cast<std::size_t>(i + 1)];
            for (int cy = 1; cy + 1 < mid.rows; ++cy) {
                for (int cx = 1; cx + 1 < mid.cols; ++cx) {
                    const double r = mid.response(cx, cy);
                    if (!(r > params.hessianThreshold)) continue;
                    // the largest filter of the neighbourhood must see real pixels
                    if (!filter_fits(ii, cx * step, cy * step, above.filterSize)) continue;
                    bool is_max = true;
                    for (int dy = -1; dy <= 1 && is_max; ++dy) {
                        for (int dx = -1; dx <= 1 && is_max; ++dx) {
                            if (below.response(cx + dx, cy + dy) >= r || above.response(cx + dx, cy + dy) >= r)
                                is_max = false;
                            else if ((dx != 0 || dy != 0) && mid.response(cx + dx, cy + dy) >= r)
                                is_max = false;
                        }
                    }
                    if (!is_max) continue;
                    points.push_back({static_cast<double>(cx * step), static_cast<double>(cy * step),
                                      1.2 * mid.filterSize / 9.0, r, mid.sign(cx, cy)});
                }
            }
        }
    }

    std::sort(points.begin(), points.end(), [](const InterestPoint& a, const InterestPoint& b) {
        if (a.response != b.response) return a.response > b.response;
        if (a.y != b.y) return a.y < b.y;
        if (a.x != b.x) return a.x < b.x;
        return a.scale < b.scale;
    });
    return points;
}

double haar_x(const IntegralImage& ii, int x, int y, int size) {
    const int half = size / 2;
    return box_sum(ii, {x, y - half, half, size}) - box_sum(ii, {x - half, y - half, half, size});
}

double haar_y(const IntegralImage& ii, int x, int y, int size) {
    const int half = size / 2;
    return box_sum(ii, {x - half, y, size, half}) - box_sum(ii, {x - half, y - half, size, half});
}

Descriptor compute_descriptor(const IntegralImage& ii, const InterestPoint& point) {
    const double s = point.scale;
    const int wavelet = std::max(2, 2 * static_cast<int>(std::lround(s)));
    const double sigma = 3.3 * s;
    const double inv_two_sigma_sq = 1.0 / (2.0 * sigma * sigma);

    // 20s x 20s window sampled every s: 4x4 subregions of 5x5 samples each
    Descriptor desc{};
    for (int j = -10; j < 10; ++j) {
        const double oy = (j + 0.5) * s;
        const int sy = static_cast<int>(std::lround(point.y + oy));
        const int sub_row = (j + 10) / 5;
        for (int i = -10; i < 10; ++i) {
            const double ox = (i + 0.5) * s;
            const int sx = static_cast<int>(std::lround(point.x + ox));
            const int sub_col = (i + 10) / 5;
            const double g = std::exp(-(ox * ox + oy * oy) * inv_two_sigma_sq);
            const double dx = g * haar_x(ii, sx, sy, wavelet);
            const double dy = g * haar_y(ii, sx, sy, wavelet);
            auto* bin = &desc[static_cast<std::size_t>((sub_row * 4 + sub_col) * 4)];
            bin[0] += dx;
            bin[1] += std::abs(dx);
            bin[2] += dy;
            bin[3] += std::abs(dy);
        }
    }

    double sq = 0;
    for (double v : desc) sq += v * v;
    // residue of integral-image rounding on a flat window, not a gradient
    if (std::sqrt(sq) < kFlatDescriptorNorm) return Descriptor{};
    const double inv = 1.0 / std::sqrt(sq);
    for (double& v : desc) v *= inv;
    return desc;
}

Features extract_features(const GrayImage& image, const ExtractorParams& params, Execution exec) {
    const IntegralImage ii(image);
    const auto detected = detect_interest_points(ii, params, exec);

    Features f;
    f.width = image.width;
    f.height = image.height;
    f.descriptors = exec == Execution::Parallel ? kernels::omp::describe(ii, detected)
                                                : kernels::serial::describe(ii, detected);
    f.points.reserve(detected.size());
    for (const auto& p : detected) f.points.push_back({p.x, p.y, p.scale, p.laplacianSign});
    return f;
}

} // namespace cbir
