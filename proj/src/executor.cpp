#include "cbir/executor.hpp"

#include "cbir/errors.hpp"
#include "cbir/labels.hpp"

#include <algorithm>
#include <cmath>

namespace cbir {

void validate(const QueryOptions& options) {
    if (options.mode == QueryMode::TopK && options.topK < 1) throw ValidationError("topK must be at least 1");
    if (options.mode == QueryMode::Threshold && !(options.minSimilarity >= 0 && options.minSimilarity <= 1))
        throw ValidationError("minSimilarity must lie in [0,1]");
}

double similarity(const HistogramRecord& a, const HistogramRecord& b) {
    if (a.bins.size() != b.bins.size())
        throw ValidationError("histograms of different vocabulary sizes cannot be compared");
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        dot += a.bins[i].weight * b.bins[i].weight;
        na += a.bins[i].weight * a.bins[i].weight;
        nb += b.bins[i].weight * b.bins[i].weight;
    }
    if (na == 0 || nb == 0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

Executor::Executor(Store& store, std::shared_ptr<const FeatureExtractor> extractor,
                   std::shared_ptr<const FeatureIndexer> indexer)
    : store_(&store), extractor_(std::move(extractor)), indexer_(std::move(indexer)) {}

IndexId Executor::create_index(const IndexParams& params, std::optional<SplitSpec> trainingSplit) {
    return cbir::create_index(*store_, *extractor_, *indexer_, params, trainingSplit);
}

void Executor::delete_index(IndexId index) { cbir::delete_index(*store_, index); }

std::size_t Executor::extract_all() { return extract_missing(*store_, *extractor_); }

QueryResult Executor::rank(const HistogramRecord& query, const QueryOptions& options,
                           const std::function<bool(ImageId)>& candidate) const {
    validate(options);
    QueryResult result;
    store_->read([&](const StoreView& view) {
        view.get<Vocabulary>(options.indexId);
        for (const auto& [hid, h] : view.all<HistogramRecord>()) {
            if (h.indexId != options.indexId) continue;
            if (candidate && !candidate(h.imageId)) continue;
            const double s = similarity(query, h);
            if (options.mode == QueryMode::Threshold && s < options.minSimilarity) continue;
            result.entries.push_back({h.imageId, view.get<ImageRecord>(h.imageId).name, s});
        }
    });
    std::sort(result.entries.begin(), result.entries.end(), [](const QueryEntry& a, const QueryEntry& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.imageId < b.imageId;
    });
    if (options.mode == QueryMode::TopK && result.entries.size() > static_cast<std::size_t>(options.topK))
        result.entries.resize(static_cast<std::size_t>(options.topK));
    return result;
}

QueryResult Executor::execute_query(std::span<const std::uint8_t> queryImage, const QueryOptions& options) const {
    validate(options);
    Vocabulary vocabulary =
        store_->read([&](const StoreView& view) { return view.get<Vocabulary>(options.indexId); });

    const Features features = extractor_->extract(queryImage);
    if (features.descriptors.empty()) return QueryResult{};

    const HistogramRecord query = indexer_->build_histogram(to_descriptor_set(features, 0), vocabulary);
    QueryResult result = rank(query, options);
    result.queryDescriptorCount = static_cast<int>(features.descriptors.size());
    return result;
}

ImageId Executor::insert_image(const ImageContract& contract) {
    if (contract.name.empty()) throw ValidationError("image name must not be empty");
    if (contract.imageBytes.empty()) throw ValidationError("image bytes must not be empty");

    const Features features = extractor_->extract(contract.imageBytes);
    ImageRecord image;
    image.name = contract.name;
    image.classLabel = contract.classLabel.value_or("");
    if (image.classLabel.empty()) image.classLabel = label_from_filename(contract.name);
    image.width = features.width;
    image.height = features.height;
    image.bytes = contract.imageBytes;

    return store_->write([&](Transaction& txn) {
        const ImageId id = txn.add<ImageRecord>(image);
        DescriptorSet set = to_descriptor_set(features, id);
        txn.add<DescriptorSet>(set);
        std::vector<const Vocabulary*> vocabularies;
        for (const auto& [vid, v] : txn.all<Vocabulary>()) vocabularies.push_back(&v);
        for (const Vocabulary* v : vocabularies) txn.add<HistogramRecord>(indexer_->build_histogram(set, *v));
        return id;
    });
}

} // namespace cbir
