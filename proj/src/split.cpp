#include "cbir/split.hpp"

#include "cbir/errors.hpp"
#include "cbir/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>

namespace cbir {

DatasetSplit split_dataset(const StoreView& view, double ratio, std::uint64_t seed) {
    if (!(ratio > 0 && ratio < 1)) throw ValidationError("split ratio must lie in (0,1)");

    std::map<std::string, std::vector<ImageId>> classes;
    for (const auto& [id, image] : view.all<ImageRecord>()) {
        if (image.classLabel.empty()) throw ValidationError("image " + std::to_string(id) + " has no class label");
        classes[image.classLabel].push_back(id);
    }

    DatasetSplit split;
    split.seed = seed;
    split.ratio = ratio;
    std::mt19937_64 rng(seed);
    for (auto& [label, ids] : classes) {
        const std::size_t n = ids.size();
        if (n < 2) throw ValidationError("class '" + label + "' needs at least 2 images to split");
        for (std::size_t i = n - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(unit_uniform(rng()) * static_cast<double>(i + 1));
            std::swap(ids[i], ids[j]);
        }
        // the epsilon keeps 0.9*10 at 9 despite binary rounding
        auto keep = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n) - 1e-9));
        keep = std::clamp<std::size_t>(keep, 1, n - 1);
        split.indexSet.insert(split.indexSet.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep));
        split.querySet.insert(split.querySet.end(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end());
    }
    std::sort(split.indexSet.begin(), split.indexSet.end());
    std::sort(split.querySet.begin(), split.querySet.end());
    return split;
}

DatasetSplit split_dataset(const Store& store, double ratio, std::uint64_t seed) {
    return store.read([&](const StoreView& view) { return split_dataset(view, ratio, seed); });
}

} // namespace cbir
