#include "cbir/wire.hpp"

#include "cbir/errors.hpp"

#include <boost/beast/core/detail/base64.hpp>

#include <cstdio>
#include <cstdlib>

namespace cbir {

namespace base64 = boost::beast::detail::base64;

double wire_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return std::strtod(buf, nullptr);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
    std::string out(base64::encoded_size(bytes.size()), '\0');
    out.resize(base64::encode(out.data(), bytes.data(), bytes.size()));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    std::size_t body = text.size();
    while (body > 0 && text[body - 1] == '=') --body;
    if (text.size() % 4 != 0 || text.size() - body > 2) throw ValidationError("malformed base64 payload");
    std::vector<std::uint8_t> out(base64::decoded_size(text.size()));
    const auto [written, consumed] = base64::decode(out.data(), text.data(), text.size());
    if (consumed < body) throw ValidationError("malformed base64 payload");
    out.resize(written);
    return out;
}

std::string to_string(QueryMode mode) { return mode == QueryMode::TopK ? "topK" : "threshold"; }

QueryMode parse_query_mode(const std::string& text) {
    if (text == "topK") return QueryMode::TopK;
    if (text == "threshold") return QueryMode::Threshold;
    throw ValidationError("query mode must be 'topK' or 'threshold', got '" + text + "'");
}

nlohmann::json to_json(const QueryResult& result) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : result.entries)
        entries.push_back({{"imageId", e.imageId}, {"name", e.name}, {"similarity", wire_number(e.similarity)}});
    return {{"entries", std::move(entries)}, {"queryDescriptorCount", result.queryDescriptorCount}};
}

nlohmann::json to_json(const RetrievalFactors& f) {
    return {{"name", f.queryName}, {"RI", f.RI},   {"AI", f.AI},
            {"rai", f.rai},        {"iri", f.iri}, {"anr", f.anr},
            {"inr", f.inr},        {"precision", wire_number(f.precision)},
            {"recall", wire_number(f.recall)}};
}

nlohmann::json to_json(const MultiQueryReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) rows.push_back(to_json(r));
    nlohmann::json aggregate;
    aggregate["meanPrecision"] = report.meanPrecision ? nlohmann::json(wire_number(*report.meanPrecision)) : nullptr;
    aggregate["meanRecall"] = report.meanRecall ? nlohmann::json(wire_number(*report.meanRecall)) : nullptr;
    return {{"rows", std::move(rows)}, {"aggregate", std::move(aggregate)}};
}

nlohmann::json to_json(const IndexParams& p) {
    return {{"k", p.k}, {"maxIterations", p.maxIterations}, {"convergenceEps", p.convergenceEps}, {"seed", p.seed}};
}

nlohmann::json image_metadata_json(const ImageRecord& image) {
    return {{"id", image.id},
            {"name", image.name},
            {"classLabel", image.classLabel},
            {"width", image.width},
            {"height", image.height},
            {"byteSize", image.bytes.size()}};
}

nlohmann::json image_contract_json(const ImageRecord& image) {
    return {{"id", image.id},
            {"name", image.name},
            {"classLabel", image.classLabel},
            {"width", image.width},
            {"height", image.height},
            {"imageBytes", base64_encode(image.bytes)}};
}

namespace {

void reject_unknown(const nlohmann::json& doc, std::initializer_list<const char*> allowed, const char* what) {
    if (!doc.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ValidationError(std::string("unknown key '") + key + "' in " + what);
    }
}

template <class T> T field(const nlohmann::json& doc, const char* key, T fallback) {
    auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ValidationError(std::string("field '") + key + "' has the wrong type");
    }
}

} // namespace

QueryOptions query_options_from_json(const nlohmann::json& doc, QueryOptions defaults) {
    if (doc.is_null()) return defaults;
    reject_unknown(doc, {"indexId", "mode", "topK", "minSimilarity"}, "query options");
    QueryOptions o = defaults;
    o.indexId = field<IndexId>(doc, "indexId", o.indexId);
    o.mode = parse_query_mode(field<std::string>(doc, "mode", to_string(o.mode)));
    o.topK = field<int>(doc, "topK", o.topK);
    o.minSimilarity = field<double>(doc, "minSimilarity", o.minSimilarity);
    validate(o);
    return o;
}

IndexParams index_params_from_json(const nlohmann::json& doc, IndexParams defaults) {
    if (doc.is_null()) return defaults;
    reject_unknown(doc, {"k", "seed", "maxIterations", "convergenceEps"}, "index parameters");
    IndexParams p = defaults;
    p.k = field<int>(doc, "k", p.k);
    p.seed = field<std::uint64_t>(doc, "seed", p.seed);
    p.maxIterations = field<int>(doc, "maxIterations", p.maxIterations);
    p.convergenceEps = field<double>(doc, "convergenceEps", p.convergenceEps);
    validate(p);
    return p;
}

} // namespace cbir
