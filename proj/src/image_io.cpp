#include "cbir/image_io.hpp"

#include "cbir/errors.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cmath>

namespace cbir {

namespace {

bool looks_like_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t sig[] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return b.size() >= sizeof(sig) && std::equal(std::begin(sig), std::end(sig), b.begin());
}

bool looks_like_jpeg(std::span<const std::uint8_t> b) {
    return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF;
}

std::vector<std::uint8_t> encode(const cv::Mat& mat, const char* ext, const std::vector<int>& flags) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(ext, mat, out, flags)) throw DecodeError(std::string("cannot encode ") + ext);
    return out;
}

cv::Mat to_bgr_mat(const RgbImage& image) {
    cv::Mat bgr(image.height, image.width, CV_8UC3);
    for (int y = 0; y < image.height; ++y) {
        auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < image.width; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * image.width + x) * 3;
            row[x] = cv::Vec3b(image.rgb[i + 2], image.rgb[i + 1], image.rgb[i]);
        }
    }
    return bgr;
}

} // namespace

RgbImage decode_image(std::span<const std::uint8_t> encoded) {
    // Only PNG and JPEG are accepted, whatever else the codec backend could read.
    if (!looks_like_png(encoded) && !looks_like_jpeg(encoded)) throw DecodeError("not a PNG or JPEG image");

    cv::Mat bgr;
    try {
        const cv::Mat raw(1, static_cast<int>(encoded.size()), CV_8UC1, const_cast<std::uint8_t*>(encoded.data()));
        bgr = cv::imdecode(raw, cv::IMREAD_COLOR);
    } catch (const cv::Exception& e) {
        throw DecodeError(std::string("image decoding failed: ") + e.what());
    }
    if (bgr.empty() || bgr.cols < 1 || bgr.rows < 1) throw DecodeError("image bytes could not be decoded");

    RgbImage out;
    out.width = bgr.cols;
    out.height = bgr.rows;
    out.rgb.resize(static_cast<std::size_t>(out.width) * out.height * 3);
    for (int y = 0; y < out.height; ++y) {
        const auto* row = bgr.ptr<cv::Vec3b>(y);
        for (int x = 0; x < out.width; ++x) {
            const std::size_t i = (static_cast<std::size_t>(y) * out.width + x) * 3;
            out.rgb[i] = row[x][2];
            out.rgb[i + 1] = row[x][1];
            out.rgb[i + 2] = row[x][0];
        }
    }
    return out;
}

GrayImage to_grayscale(const RgbImage& image) {
    GrayImage g;
    g.width = image.width;
    g.height = image.height;
    g.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        const double r = image.rgb[3 * i], gr = image.rgb[3 * i + 1], b = image.rgb[3 * i + 2];
        // the weights sum to 1 only up to rounding
        g.pixels[i] = std::clamp((0.299 * r + 0.587 * gr + 0.114 * b) / 255.0, 0.0, 1.0);
    }
    return g;
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) { return encode(to_bgr_mat(image), ".png", {}); }

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
    cv::Mat gray(image.height, image.width, CV_8UC1);
    for (int y = 0; y < image.height; ++y)
        for (int x = 0; x < image.width; ++x)
            gray.at<std::uint8_t>(y, x) =
                static_cast<std::uint8_t>(std::lround(std::clamp(image.at(x, y), 0.0, 1.0) * 255.0));
    return encode(gray, ".png", {});
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality) {
    return encode(to_bgr_mat(image), ".jpg", {cv::IMWRITE_JPEG_QUALITY, quality});
}

} // namespace cbir
