#pragma once

#include "cbir/executor.hpp"
#include "cbir/labels.hpp"
#include "cbir/surf.hpp"

#include <json.hpp>

#include <filesystem>

namespace cbir {

/// Engine configuration document. Every section is optional; unknown keys are rejected.
///
///   {
///     "extractor": {"octaves": 3, "intervalsPerOctave": 4, "hessianThreshold": 0.0004,
///                   "initialSamplingStep": 2, "dxyWeight": 0.9},
///     "indexer":   {"k": 128, "maxIterations": 100, "convergenceEps": 1e-6, "seed": 0},
///     "query":     {"mode": "threshold", "topK": 10, "minSimilarity": 0.5},
///     "labeling":  "directory"
///   }
struct EngineConfig {
    ExtractorParams extractor;
    IndexParams indexer;
    QueryOptions query;
    Labeling labeling = Labeling::Directory;
};

EngineConfig parse_config(const nlohmann::json& doc);
EngineConfig load_config(const std::filesystem::path& file);
nlohmann::json to_json(const EngineConfig& config);

} // namespace cbir
