#pragma once

#include "cbir/extractor.hpp"
#include "cbir/kmeans.hpp"
#include "cbir/model.hpp"
#include "cbir/store.hpp"

#include <optional>

namespace cbir {

/// Builds a visual vocabulary from pooled descriptors and quantizes descriptor
/// sets against it.
class FeatureIndexer {
  public:
    virtual ~FeatureIndexer() = default;
    virtual Vocabulary build_vocabulary(const Matrix& pooled, const IndexParams& params) const = 0;
    virtual HistogramRecord build_histogram(const DescriptorSet& descriptors, const Vocabulary& vocabulary) const = 0;
};

class KMeansIndexer final : public FeatureIndexer {
  public:
    explicit KMeansIndexer(Execution exec = Execution::Parallel) : exec_(exec) {}

    Vocabulary build_vocabulary(const Matrix& pooled, const IndexParams& params) const override;
    HistogramRecord build_histogram(const DescriptorSet& descriptors, const Vocabulary& vocabulary) const override;

  private:
    Execution exec_;
};

/// L1-normalized bag-of-words histogram; all zero when there are no descriptors.
HistogramRecord build_histogram(const DescriptorSet& descriptors, const Vocabulary& vocabulary);

Matrix centroid_matrix(const Vocabulary& vocabulary);

/// Pools descriptors of the training images (all images, or the index side of
/// `trainingSplit`), clusters them, and stores the vocabulary with one histogram
/// per stored image. Images without descriptors are extracted first.
IndexId create_index(Store& store, const FeatureExtractor& extractor, const FeatureIndexer& indexer,
                     const IndexParams& params, std::optional<SplitSpec> trainingSplit = std::nullopt);

/// Removes the vocabulary and its histograms; images and descriptors stay.
void delete_index(Store& store, IndexId index);

/// Stores descriptor sets for every image that lacks one. Returns how many were added.
std::size_t extract_missing(Store& store, const FeatureExtractor& extractor);

DescriptorSet to_descriptor_set(const Features& features, ImageId image);

} // namespace cbir
