#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <stdlib.h>

namespace cbir::fixtures {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

GrayImage blank(int width, int height, double value) {
    GrayImage g;
    g.width = width;
    g.height = height;
    g.pixels.assign(static_cast<std::size_t>(width) * height, value);
    return g;
}

void add_noise(GrayImage& g, std::mt19937_64& rng, double amplitude) {
    for (double& v : g.pixels) v = std::clamp(v + uniform(rng, -amplitude, amplitude), 0.0, 1.0);
}

} // namespace

GrayImage random_image(int width, int height, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    GrayImage g = blank(width, height, 0);
    for (double& v : g.pixels) v = uniform(rng, lo, hi);
    return g;
}

GrayImage textured_image(int width, int height, std::uint64_t seed, double amplitude) {
    std::mt19937_64 rng(seed);
    GrayImage g = blank(width, height, 0);
    const int blobs = 40;
    for (int b = 0; b < blobs; ++b) {
        const double cx = uniform(rng, 0, width), cy = uniform(rng, 0, height);
        const double sigma = uniform(rng, 2.0, 8.0);
        const double a = uniform(rng, -1.0, 1.0);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                g.at(x, y) += a * std::exp(-d2 / (2 * sigma * sigma));
            }
    }
    const auto [lo, hi] = std::minmax_element(g.pixels.begin(), g.pixels.end());
    const double min = *lo, span = std::max(*hi - *lo, 1e-12);
    for (double& v : g.pixels) v = amplitude * (v - min) / span;
    return g;
}

GrayImage constant_image(int width, int height, double value) { return blank(width, height, value); }

GrayImage checkerboard(int width, int height, int cell) {
    GrayImage g = blank(width, height, 0);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) g.at(x, y) = ((x / cell + y / cell) % 2 == 0) ? 0.9 : 0.1;
    return g;
}

GrayImage blob_image(int width, int height, int cx, int cy, int size) {
    GrayImage g = blank(width, height, 0.1);
    for (int y = cy - size / 2; y < cy - size / 2 + size; ++y)
        for (int x = cx - size / 2; x < cx - size / 2 + size; ++x)
            if (x >= 0 && y >= 0 && x < width && y < height) g.at(x, y) = 0.9;
    return g;
}

GrayImage step_edge(int width, int height) {
    GrayImage g = blank(width, height, 0.1);
    for (int y = 0; y < height; ++y)
        for (int x = width / 2; x < width; ++x) g.at(x, y) = 0.9;
    return g;
}

GrayImage class_texture(TextureClass cls, int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    GrayImage g = blank(width, height, 0.5);
    switch (cls) {
    case TextureClass::Checker: {
        const int cell = static_cast<int>(uniform(rng, 7, 11));
        const int ox = static_cast<int>(uniform(rng, 0, cell)), oy = static_cast<int>(uniform(rng, 0, cell));
        // every cell draws its own level so images of the class differ in detail
        const int cols = width / cell + 2, rows = height / cell + 2;
        std::vector<double> level(static_cast<std::size_t>(cols) * rows);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                level[static_cast<std::size_t>(r) * cols + c] =
                    (r + c) % 2 == 0 ? uniform(rng, 0.65, 0.95) : uniform(rng, 0.05, 0.35);
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                g.at(x, y) = level[static_cast<std::size_t>((y + oy) / cell) * cols + (x + ox) / cell];
        break;
    }
    case TextureClass::Blobs: {
        const double bg = uniform(rng, 0.35, 0.55);
        for (double& v : g.pixels) v = bg;
        const int count = static_cast<int>(uniform(rng, 25, 35));
        for (int b = 0; b < count; ++b) {
            const double cx = uniform(rng, 0, width), cy = uniform(rng, 0, height);
            const double sigma = uniform(rng, 2.5, 4.5);
            const double a = uniform(rng, 0.4, 0.6) * (b % 2 == 0 ? 1 : -1);
            const int r = static_cast<int>(3 * sigma) + 1;
            for (int y = std::max(0, static_cast<int>(cy) - r); y < std::min(height, static_cast<int>(cy) + r); ++y)
                for (int x = std::max(0, static_cast<int>(cx) - r); x < std::min(width, static_cast<int>(cx) + r); ++x) {
                    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    g.at(x, y) += a * std::exp(-d2 / (2 * sigma * sigma));
                }
        }
        for (double& v : g.pixels) v = std::clamp(v, 0.0, 1.0);
        break;
    }
    case TextureClass::Stripes: {
        // crossed gratings: a plain grating has a rank-one Hessian and no blob response
        const double angle = uniform(rng, 0.35, 0.65) * std::numbers::pi / 2;
        const double period = uniform(rng, 18, 24);
        const double pu = uniform(rng, 0, 2 * std::numbers::pi), pv = uniform(rng, 0, 2 * std::numbers::pi);
        const double c = std::cos(angle), s = std::sin(angle);
        // slow phase warp, in periods, so local orientation and spacing drift across the image
        struct Wave {
            double fx, fy, phase, amp;
        };
        std::vector<Wave> warp_u, warp_v;
        for (auto* warp : {&warp_u, &warp_v})
            for (int j = 0; j < 3; ++j)
                warp->push_back({uniform(rng, -1.0 / 50, 1.0 / 50), uniform(rng, -1.0 / 50, 1.0 / 50),
                                 uniform(rng, 0, 2 * std::numbers::pi), uniform(rng, 0.1, 0.25)});
        const auto displacement = [](const std::vector<Wave>& warp, int x, int y) {
            double d = 0;
            for (const auto& w : warp) d += w.amp * std::sin(2 * std::numbers::pi * (w.fx * x + w.fy * y) + w.phase);
            return d;
        };
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                const double u = (x * c + y * s) / period + displacement(warp_u, x, y);
                const double v = (-x * s + y * c) / period + displacement(warp_v, x, y);
                g.at(x, y) = 0.5 + 0.4 * std::sin(2 * std::numbers::pi * u + pu) * std::sin(2 * std::numbers::pi * v + pv);
            }
        break;
    }
    }
    add_noise(g, rng, 0.03);
    return g;
}

std::vector<CorpusImage> three_class_corpus(int perClass, std::uint64_t seed, int size) {
    const std::pair<TextureClass, const char*> classes[] = {
        {TextureClass::Checker, "checker"}, {TextureClass::Blobs, "blobs"}, {TextureClass::Stripes, "stripes"}};
    std::vector<CorpusImage> out;
    std::uint64_t n = 0;
    for (const auto& [cls, label] : classes) {
        for (int i = 1; i <= perClass; ++i) {
            const GrayImage g = class_texture(cls, size, size, seed * 1000003ULL + (++n));
            out.push_back({std::string(label) + " (" + std::to_string(i) + ").png", label, encode_png(g)});
        }
    }
    return out;
}

std::vector<ImageId> insert_corpus(Executor& executor, const std::vector<CorpusImage>& corpus) {
    std::vector<ImageId> ids;
    ids.reserve(corpus.size());
    for (const auto& c : corpus) ids.push_back(executor.insert_image({std::nullopt, c.name, c.label, c.png}));
    return ids;
}

TempDir::TempDir(const std::string& prefix) {
    std::string pattern = (std::filesystem::temp_directory_path() / (prefix + "-XXXXXX")).string();
    if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

} // namespace cbir::fixtures
