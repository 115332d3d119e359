#pragma once

#include "cbir/executor.hpp"
#include "cbir/split.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace cbir {

/// Outcome of one query against a labeled index.
///   RI  returned images            AI  appropriate (same-class) images
///   rai returned and appropriate   iri returned but inappropriate
///   anr appropriate, not returned  inr inappropriate, not returned
struct RetrievalFactors {
    std::string queryName;
    int RI = 0;
    int AI = 0;
    int rai = 0;
    int iri = 0;
    int anr = 0;
    int inr = 0;
    double precision = 0; // rai / (rai + iri), 0 when nothing was returned
    double recall = 0;    // rai / (rai + anr), 0 when nothing was appropriate

    bool operator==(const RetrievalFactors&) const = default;
};

RetrievalFactors compute_factors(const std::set<ImageId>& returned, const std::set<ImageId>& relevant,
                                 int corpusSize);

struct MultiQueryReport {
    std::vector<RetrievalFactors> rows;
    std::optional<double> meanPrecision; // absent for an empty query set
    std::optional<double> meanRecall;
};

/// Replays labeled queries against an index and scores them.
class SimulationEvaluator {
  public:
    explicit SimulationEvaluator(const Executor& executor) : executor_(&executor) {}

    /// Index set = the given split, else the split the index was trained with,
    /// else every stored image. The query image never counts as returned or appropriate.
    RetrievalFactors simulate_single_query(ImageId query, const QueryOptions& options,
                                           const std::optional<DatasetSplit>& split = std::nullopt) const;

    MultiQueryReport simulate_multi_query(std::span<const ImageId> querySet, const QueryOptions& options,
                                          const std::optional<DatasetSplit>& split = std::nullopt) const;

    /// Split recorded on the index, if any.
    std::optional<DatasetSplit> training_split(IndexId index) const;

  private:
    const Executor* executor_;
};

std::string report_csv(const MultiQueryReport& report);

} // namespace cbir
