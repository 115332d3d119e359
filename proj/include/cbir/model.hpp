#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cbir {

using EntityId = std::int64_t;
using ImageId = EntityId;
using IndexId = EntityId;

inline constexpr std::size_t kDescriptorSize = 64;
using Descriptor = std::array<double, kDescriptorSize>;

struct ImageRecord {
    ImageId id = 0;
    std::string name;
    std::string classLabel;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bytes; // original encoded image

    bool operator==(const ImageRecord&) const = default;
};

struct KeyPoint {
    double x = 0;
    double y = 0;
    double scale = 0;
    int laplacianSign = 1;

    bool operator==(const KeyPoint&) const = default;
};

struct DescriptorSet {
    EntityId id = 0;
    ImageId imageId = 0;
    std::vector<Descriptor> descriptors;
    std::vector<KeyPoint> points; // aligned 1:1 with descriptors

    bool operator==(const DescriptorSet&) const = default;
};

struct IndexParams {
    int k = 128;
    int maxIterations = 100;
    double convergenceEps = 1e-6;
    std::uint64_t seed = 0;

    bool operator==(const IndexParams&) const = default;
};

// Partition of the labeled corpus an index was trained on; absent means every image.
struct SplitSpec {
    double ratio = 0.9;
    std::uint64_t seed = 0;

    bool operator==(const SplitSpec&) const = default;
};

struct Vocabulary {
    IndexId id = 0;
    int k = 0;
    std::vector<Descriptor> centroids;
    std::int64_t createdAt = 0; // unix milliseconds
    IndexParams params;
    std::optional<SplitSpec> trainingSplit;

    bool operator==(const Vocabulary&) const = default;
};

struct BinRecord {
    int wordIndex = 0;
    double weight = 0;

    bool operator==(const BinRecord&) const = default;
};

struct HistogramRecord {
    EntityId id = 0;
    ImageId imageId = 0;
    IndexId indexId = 0;
    std::vector<BinRecord> bins; // dense, bins[i].wordIndex == i

    bool operator==(const HistogramRecord&) const = default;
};

void validate(const ImageRecord& image);
void validate(const DescriptorSet& set);
void validate(const IndexParams& params);
void validate(const Vocabulary& vocabulary);
void validate(const HistogramRecord& histogram);

} // namespace cbir
