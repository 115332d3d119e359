#pragma once

#include "cbir/extractor.hpp"
#include "cbir/indexer.hpp"
#include "cbir/model.hpp"
#include "cbir/store.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbir {

enum class QueryMode { TopK, Threshold };

struct QueryOptions {
    IndexId indexId = 0;
    QueryMode mode = QueryMode::Threshold;
    int topK = 10;
    double minSimilarity = 0.5;

    bool operator==(const QueryOptions&) const = default;
};

void validate(const QueryOptions& options);

struct QueryEntry {
    ImageId imageId = 0;
    std::string name;
    double similarity = 0;

    bool operator==(const QueryEntry&) const = default;
};

struct QueryResult {
    std::vector<QueryEntry> entries; // similarity descending, ties by ascending imageId
    int queryDescriptorCount = 0;

    bool operator==(const QueryResult&) const = default;
};

/// Wire-level image payload.
struct ImageContract {
    std::optional<ImageId> id;
    std::string name;
    std::optional<std::string> classLabel;
    std::vector<std::uint8_t> imageBytes;
};

/// Cosine similarity of the bin weights, clamped to [0,1]; 0 if either histogram is empty.
double similarity(const HistogramRecord& a, const HistogramRecord& b);

/// Index lifecycle, query execution and image insertion over an injected
/// extractor and indexer.
class Executor {
  public:
    Executor(Store& store, std::shared_ptr<const FeatureExtractor> extractor,
             std::shared_ptr<const FeatureIndexer> indexer);

    IndexId create_index(const IndexParams& params, std::optional<SplitSpec> trainingSplit = std::nullopt);
    void delete_index(IndexId index);

    QueryResult execute_query(std::span<const std::uint8_t> queryImage, const QueryOptions& options) const;

    /// Ranks the stored histograms of `options.indexId` against `query`, optionally
    /// restricted to images accepted by `candidate`.
    QueryResult rank(const HistogramRecord& query, const QueryOptions& options,
                     const std::function<bool(ImageId)>& candidate = {}) const;

    ImageId insert_image(const ImageContract& contract);

    std::size_t extract_all();

    Store& store() const noexcept { return *store_; }
    const FeatureExtractor& extractor() const noexcept { return *extractor_; }
    const FeatureIndexer& indexer() const noexcept { return *indexer_; }

  private:
    Store* store_;
    std::shared_ptr<const FeatureExtractor> extractor_;
    std::shared_ptr<const FeatureIndexer> indexer_;
};

} // namespace cbir
