#include "cbir/config.hpp"

#include "cbir/errors.hpp"
#include "cbir/wire.hpp"

#include <fstream>

namespace cbir {

namespace {

void reject_unknown(const nlohmann::json& doc, std::initializer_list<const char*> allowed, const std::string& what) {
    if (!doc.is_object()) throw ValidationError(what + " must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ValidationError("unknown key '" + key + "' in " + what);
    }
}

template <class T> void read(const nlohmann::json& doc, const char* key, T& out) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("config field '") + key + "' has the wrong type");
    }
}

} // namespace

EngineConfig parse_config(const nlohmann::json& doc) {
    reject_unknown(doc, {"extractor", "indexer", "query", "labeling"}, "config");
    EngineConfig c;
    if (auto it = doc.find("extractor"); it != doc.end()) {
        reject_unknown(*it, {"octaves", "intervalsPerOctave", "hessianThreshold", "initialSamplingStep", "dxyWeight"},
                       "config.extractor");
        read(*it, "octaves", c.extractor.octaves);
        read(*it, "intervalsPerOctave", c.extractor.intervalsPerOctave);
        read(*it, "hessianThreshold", c.extractor.hessianThreshold);
        read(*it, "initialSamplingStep", c.extractor.initialSamplingStep);
        read(*it, "dxyWeight", c.extractor.dxyWeight);
    }
    if (auto it = doc.find("indexer"); it != doc.end()) {
        reject_unknown(*it, {"k", "maxIterations", "convergenceEps", "seed"}, "config.indexer");
        read(*it, "k", c.indexer.k);
        read(*it, "maxIterations", c.indexer.maxIterations);
        read(*it, "convergenceEps", c.indexer.convergenceEps);
        read(*it, "seed", c.indexer.seed);
    }
    if (auto it = doc.find("query"); it != doc.end()) {
        reject_unknown(*it, {"mode", "topK", "minSimilarity"}, "config.query");
        std::string mode = to_string(c.query.mode);
        read(*it, "mode", mode);
        c.query.mode = parse_query_mode(mode);
        read(*it, "topK", c.query.topK);
        read(*it, "minSimilarity", c.query.minSimilarity);
    }
    if (auto it = doc.find("labeling"); it != doc.end()) {
        std::string labeling;
        read(doc, "labeling", labeling);
        c.labeling = parse_labeling(labeling);
    }
    validate(c.extractor);
    validate(c.indexer);
    validate(c.query);
    return c;
}

EngineConfig load_config(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw ValidationError("cannot read config file " + file.string());
    nlohmann::json doc;
    try {
        is >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("config file " + file.string() + " is not valid JSON: " + e.what());
    }
    return parse_config(doc);
}

nlohmann::json to_json(const EngineConfig& c) {
    return {{"extractor",
             {{"octaves", c.extractor.octaves},
              {"intervalsPerOctave", c.extractor.intervalsPerOctave},
              {"hessianThreshold", c.extractor.hessianThreshold},
              {"initialSamplingStep", c.extractor.initialSamplingStep},
              {"dxyWeight", c.extractor.dxyWeight}}},
            {"indexer", to_json(c.indexer)},
            {"query", {{"mode", to_string(c.query.mode)}, {"topK", c.query.topK}, {"minSimilarity", c.query.minSimilarity}}},
            {"labeling", to_string(c.labeling)}};
}

} // namespace cbir
