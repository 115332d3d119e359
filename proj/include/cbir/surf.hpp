#pragma once

#include "cbir/image_io.hpp"
#include "cbir/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cbir {

enum class Execution { Serial, Parallel };

/// Summed-area table: at(x,y) is the sum of all pixels in (0,0)..(x,y) inclusive.
class IntegralImage {
  public:
    IntegralImage() = default;
    explicit IntegralImage(const GrayImage& image);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double at(int x, int y) const { return table_[static_cast<std::size_t>(y) * width_ + x]; }
    std::span<const double> table() const noexcept { return table_; }

  private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> table_;
};

struct Rect {
    int x = 0;
    int y = 0;
    int width = 0;
    int height = 0;
};

/// Sum of the pixels inside `rect` after clamping it to the image; 0 when nothing is left.
double box_sum(const IntegralImage& ii, const Rect& rect);

struct HessianResponse {
    double response = 0;
    int laplacianSign = 1;
};

struct ExtractorParams {
    int octaves = 3;
    int intervalsPerOctave = 4;
    double hessianThreshold = 0.0004;
    int initialSamplingStep = 2;
    double dxyWeight = 0.9;

    bool operator==(const ExtractorParams&) const = default;
};

void validate(const ExtractorParams& params);

/// Side length of the box filter for a given octave and interval (9, 15, 21, 27 for the first octave).
int filter_size(int octave, int interval);

/// True when the full footprint of an L x L box filter centred at (x,y) lies inside the image.
bool filter_fits(const IntegralImage& ii, int x, int y, int filterSize);

/// Approximated Hessian determinant Dxx*Dyy - (w*Dxy)^2 with each derivative normalized
/// by the filter area. Positions whose filter footprint leaves the image respond 0.
HessianResponse hessian_response(const IntegralImage& ii, int x, int y, int filterSize, double dxyWeight = 0.9);

struct InterestPoint {
    double x = 0;
    double y = 0;
    double scale = 0;
    double response = 0;
    int laplacianSign = 1;

    bool operator==(const InterestPoint&) const = default;
};

/// Fast-Hessian detector. Points are 3x3x3 scale-space maxima above the threshold,
/// sorted by descending response.
std::vector<InterestPoint> detect_interest_points(const IntegralImage& ii, const ExtractorParams& params,
                                                  Execution exec = Execution::Parallel);

/// Raw descriptor norms below this are treated as a flat region.
inline constexpr double kFlatDescriptorNorm = 1e-9;

/// Upright 64-element SURF descriptor, L2-normalized (zero vector for a flat region).
Descriptor compute_descriptor(const IntegralImage& ii, const InterestPoint& point);

/// Haar wavelet responses (right minus left, bottom minus top) of side `size` centred at (x,y).
double haar_x(const IntegralImage& ii, int x, int y, int size);
double haar_y(const IntegralImage& ii, int x, int y, int size);

struct Features {
    int width = 0;
    int height = 0;
    std::vector<KeyPoint> points;
    std::vector<Descriptor> descriptors;
};

Features extract_features(const GrayImage& image, const ExtractorParams& params,
                          Execution exec = Execution::Parallel);

} // namespace cbir
