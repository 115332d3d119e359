#include "cbir/indexer.hpp"

#include "cbir/errors.hpp"
#include "cbir/kernels.hpp"
#include "cbir/split.hpp"

#include <chrono>
#include <set>
#include <string>

namespace cbir {

Matrix centroid_matrix(const Vocabulary& vocabulary) {
    Matrix m;
    for (const auto& c : vocabulary.centroids) m.append_row(c);
    return m;
}

HistogramRecord build_histogram(const DescriptorSet& descriptors, const Vocabulary& vocabulary) {
    HistogramRecord h;
    h.imageId = descriptors.imageId;
    h.indexId = vocabulary.id;
    h.bins.resize(static_cast<std::size_t>(vocabulary.k));
    for (int i = 0; i < vocabulary.k; ++i) h.bins[static_cast<std::size_t>(i)].wordIndex = i;
    if (descriptors.descriptors.empty()) return h;

    const Matrix centroids = centroid_matrix(vocabulary);
    std::vector<std::size_t> counts(static_cast<std::size_t>(vocabulary.k), 0);
    for (const auto& d : descriptors.descriptors) ++counts[static_cast<std::size_t>(assign_nearest(centroids, d))];
    const auto total = static_cast<double>(descriptors.descriptors.size());
    for (std::size_t i = 0; i < counts.size(); ++i) h.bins[i].weight = static_cast<double>(counts[i]) / total;
    return h;
}

Vocabulary KMeansIndexer::build_vocabulary(const Matrix& pooled, const IndexParams& params) const {
    validate(params);
    if (pooled.rows() < static_cast<std::size_t>(params.k))
        throw InsufficientDataError("index with k=" + std::to_string(params.k) + " needs at least " +
                                    std::to_string(params.k) + " descriptors, store has " +
                                    std::to_string(pooled.rows()));
    const ClusteringResult clusters = kmeans(pooled, params, {}, exec_);

    Vocabulary v;
    v.k = params.k;
    v.params = params;
    v.createdAt = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::system_clock::now().time_since_epoch())
                      .count();
    v.centroids.resize(static_cast<std::size_t>(params.k));
    for (std::size_t c = 0; c < v.centroids.size(); ++c) {
        const auto row = clusters.centroids.row(c);
        std::copy(row.begin(), row.end(), v.centroids[c].begin());
    }
    return v;
}

HistogramRecord KMeansIndexer::build_histogram(const DescriptorSet& descriptors, const Vocabulary& vocabulary) const {
    return cbir::build_histogram(descriptors, vocabulary);
}

DescriptorSet to_descriptor_set(const Features& features, ImageId image) {
    DescriptorSet set;
    set.imageId = image;
    set.descriptors = features.descriptors;
    set.points = features.points;
    return set;
}

namespace {

std::size_t extract_missing(WriterSession& session, const FeatureExtractor& extractor) {
    struct Pending {
        ImageId id;
        std::vector<std::uint8_t> bytes;
    };
    auto pending = session.read([](const StoreView& view) {
        std::vector<Pending> out;
        for (const auto& [id, image] : view.all<ImageRecord>())
            if (!view.descriptors_of(id)) out.push_back({id, image.bytes});
        return out;
    });
    if (pending.empty()) return 0;

    std::vector<DescriptorSet> sets;
    sets.reserve(pending.size());
    for (const auto& p : pending) sets.push_back(to_descriptor_set(extractor.extract(p.bytes), p.id));
    session.commit([&](Transaction& txn) {
        for (auto& s : sets) txn.add<DescriptorSet>(std::move(s));
    });
    return sets.size();
}

} // namespace

std::size_t extract_missing(Store& store, const FeatureExtractor& extractor) {
    auto session = store.begin_write();
    return extract_missing(session, extractor);
}

IndexId create_index(Store& store, const FeatureExtractor& extractor, const FeatureIndexer& indexer,
                     const IndexParams& params, std::optional<SplitSpec> trainingSplit) {
    validate(params);
    auto session = store.begin_write();
    if (session.read([](const StoreView& v) { return v.count<ImageRecord>(); }) == 0)
        throw InsufficientDataError("cannot build an index over an empty store");
    extract_missing(session, extractor);

    std::vector<DescriptorSet> sets;
    Matrix pooled;
    session.read([&](const StoreView& view) {
        std::set<ImageId> training;
        if (trainingSplit) {
            const auto split = split_dataset(view, trainingSplit->ratio, trainingSplit->seed);
            training.insert(split.indexSet.begin(), split.indexSet.end());
        }
        for (const auto& [id, image] : view.all<ImageRecord>()) {
            const DescriptorSet* set = view.descriptors_of(id);
            sets.push_back(*set);
            if (trainingSplit && !training.contains(id)) continue;
            for (const auto& d : set->descriptors) pooled.append_row(d);
        }
    });

    Vocabulary vocabulary = indexer.build_vocabulary(pooled, params);
    vocabulary.trainingSplit = trainingSplit;
    std::vector<HistogramRecord> histograms;
    histograms.reserve(sets.size());
    for (const auto& s : sets) histograms.push_back(indexer.build_histogram(s, vocabulary));

    return session.commit([&](Transaction& txn) {
        const IndexId id = txn.add<Vocabulary>(vocabulary);
        for (auto& h : histograms) {
            h.indexId = id;
            txn.add<HistogramRecord>(std::move(h));
        }
        return id;
    });
}

void delete_index(Store& store, IndexId index) {
    store.write([&](Transaction& txn) { txn.remove<Vocabulary>(index); });
}

} // namespace cbir
