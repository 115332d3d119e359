#pragma once

// Synthetic images and corpora used by the tests, the acceptance suite and the
// benchmarks. Everything is a pure function of its seed.

#include "cbir/executor.hpp"
#include "cbir/image_io.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cbir::fixtures {

/// Uniform random grayscale values in [lo, hi].
GrayImage random_image(int width, int height, std::uint64_t seed, double lo = 0.0, double hi = 1.0);

/// Smooth multi-scale texture (sum of random blobs), values in [0, amplitude].
GrayImage textured_image(int width, int height, std::uint64_t seed, double amplitude = 0.5);

GrayImage constant_image(int width, int height, double value);
GrayImage checkerboard(int width, int height, int cell);

/// Dark background with one bright square of side `size` centred at (cx, cy).
GrayImage blob_image(int width, int height, int cx, int cy, int size);

/// Left half dark, right half bright.
GrayImage step_edge(int width, int height);

enum class TextureClass { Checker, Blobs, Stripes };

GrayImage class_texture(TextureClass cls, int width, int height, std::uint64_t seed);

struct CorpusImage {
    std::string name; // "<label> (<n>).png"
    std::string label;
    std::vector<std::uint8_t> png;
};

/// `perClass` PNG images for each of the three texture classes, labelled
/// "checker", "blobs" and "stripes".
std::vector<CorpusImage> three_class_corpus(int perClass, std::uint64_t seed, int size = 128);

/// Inserts the corpus in order, labels taken from the corpus entries.
std::vector<ImageId> insert_corpus(Executor& executor, const std::vector<CorpusImage>& corpus);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& prefix = "cbir");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

  private:
    std::filesystem::path path_;
};

} // namespace cbir::fixtures
