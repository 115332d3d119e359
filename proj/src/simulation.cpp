#include "cbir/simulation.hpp"

#include "cbir/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <iterator>
#include <sstream>

namespace cbir {

RetrievalFactors compute_factors(const std::set<ImageId>& returned, const std::set<ImageId>& relevant,
                                 int corpusSize) {
    std::vector<ImageId> both;
    std::set_intersection(returned.begin(), returned.end(), relevant.begin(), relevant.end(),
                          std::back_inserter(both));
    RetrievalFactors f;
    f.rai = static_cast<int>(both.size());
    f.iri = static_cast<int>(returned.size()) - f.rai;
    f.anr = static_cast<int>(relevant.size()) - f.rai;
    f.RI = f.rai + f.iri;
    f.AI = f.rai + f.anr;
    f.inr = corpusSize - f.rai - f.iri - f.anr;
    if (f.inr < 0) throw ValidationError("corpus size is smaller than the returned and relevant sets combined");
    f.precision = f.RI > 0 ? static_cast<double>(f.rai) / f.RI : 0.0;
    f.recall = f.AI > 0 ? static_cast<double>(f.rai) / f.AI : 0.0;
    return f;
}

std::optional<DatasetSplit> SimulationEvaluator::training_split(IndexId index) const {
    return executor_->store().read([&](const StoreView& view) -> std::optional<DatasetSplit> {
        const auto& v = view.get<Vocabulary>(index);
        if (!v.trainingSplit) return std::nullopt;
        return split_dataset(view, v.trainingSplit->ratio, v.trainingSplit->seed);
    });
}

RetrievalFactors SimulationEvaluator::simulate_single_query(ImageId query, const QueryOptions& options,
                                                            const std::optional<DatasetSplit>& split) const {
    validate(options);
    const std::optional<DatasetSplit> effective = split ? split : training_split(options.indexId);

    struct Snapshot {
        std::string name;
        std::set<ImageId> universe;
        std::set<ImageId> relevant;
        HistogramRecord histogram;
    };
    const Snapshot snap = executor_->store().read([&](const StoreView& view) {
        const auto& image = view.get<ImageRecord>(query);
        const auto& vocabulary = view.get<Vocabulary>(options.indexId);
        const DescriptorSet* descriptors = view.descriptors_of(query);
        if (!descriptors) throw NotFoundError("image " + std::to_string(query) + " has no descriptor set");

        Snapshot s;
        s.name = image.name;
        if (effective) {
            s.universe.insert(effective->indexSet.begin(), effective->indexSet.end());
        } else {
            for (const auto& [id, img] : view.all<ImageRecord>()) s.universe.insert(id);
        }
        s.universe.erase(query);
        for (ImageId id : s.universe) {
            const auto* other = view.find<ImageRecord>(id);
            if (!other) throw NotFoundError("index-set image " + std::to_string(id) + " does not exist");
            if (other->classLabel == image.classLabel) s.relevant.insert(id);
        }
        s.histogram = executor_->indexer().build_histogram(*descriptors, vocabulary);
        return s;
    });

    const QueryResult result =
        executor_->rank(snap.histogram, options, [&](ImageId id) { return snap.universe.contains(id); });
    std::set<ImageId> returned;
    for (const auto& e : result.entries) returned.insert(e.imageId);

    RetrievalFactors f = compute_factors(returned, snap.relevant, static_cast<int>(snap.universe.size()));
    f.queryName = snap.name;
    return f;
}

MultiQueryReport SimulationEvaluator::simulate_multi_query(std::span<const ImageId> querySet,
                                                           const QueryOptions& options,
                                                           const std::optional<DatasetSplit>& split) const {
    const std::optional<DatasetSplit> effective = split ? split : training_split(options.indexId);
    MultiQueryReport report;
    report.rows.reserve(querySet.size());
    for (ImageId q : querySet) {
        try {
            report.rows.push_back(simulate_single_query(q, options, effective));
        } catch (const CbirError& e) {
            throw CbirError(e.code(), "query image " + std::to_string(q) + ": " + e.what());
        }
    }
    if (!report.rows.empty()) {
        double p = 0, r = 0;
        for (const auto& row : report.rows) {
            p += row.precision;
            r += row.recall;
        }
        report.meanPrecision = p / static_cast<double>(report.rows.size());
        report.meanRecall = r / static_cast<double>(report.rows.size());
    }
    return report;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

std::string report_csv(const MultiQueryReport& report) {
    std::ostringstream os;
    os << "name,RI,AI,rai,iri,anr,inr,precision,recall\n";
    for (const auto& f : report.rows) {
        os << csv_field(f.queryName) << ',' << f.RI << ',' << f.AI << ',' << f.rai << ',' << f.iri << ',' << f.anr
           << ',' << f.inr << ',' << number(f.precision) << ',' << number(f.recall) << '\n';
    }
    // aggregate footer: means over the rows above
    os << "(mean),,,,,,,";
    if (report.meanPrecision) os << number(*report.meanPrecision);
    os << ',';
    if (report.meanRecall) os << number(*report.meanRecall);
    os << '\n';
    return os.str();
}

} // namespace cbir
