#pragma once

#include "cbir/model.hpp"
#include "cbir/store.hpp"

#include <cstdint>
#include <vector>

namespace cbir {

struct DatasetSplit {
    std::vector<ImageId> indexSet; // ascending
    std::vector<ImageId> querySet; // ascending
    std::uint64_t seed = 0;
    double ratio = 0.9;
};

/// Per class (shared label): shuffle by seed, keep ceil(ratio*n) for the index,
/// the rest as queries, never fewer than one query per class.
DatasetSplit split_dataset(const StoreView& view, double ratio, std::uint64_t seed);
DatasetSplit split_dataset(const Store& store, double ratio, std::uint64_t seed);

} // namespace cbir
