#pragma once

// JSON shapes shared by the HTTP service and the CLI's --format json output.

#include "cbir/executor.hpp"
#include "cbir/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbir {

/// Rounds to 9 significant decimal digits, the precision numbers carry on the wire.
double wire_number(double value);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ValidationError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

nlohmann::json to_json(const QueryResult& result);
nlohmann::json to_json(const RetrievalFactors& factors);
nlohmann::json to_json(const MultiQueryReport& report);
nlohmann::json to_json(const IndexParams& params);
nlohmann::json image_metadata_json(const ImageRecord& image);
/// ImageContract view of a stored image, bytes base64-encoded under "imageBytes".
nlohmann::json image_contract_json(const ImageRecord& image);

/// Reads {"mode","topK","minSimilarity","indexId"} over the given defaults.
QueryOptions query_options_from_json(const nlohmann::json& doc, QueryOptions defaults);
IndexParams index_params_from_json(const nlohmann::json& doc, IndexParams defaults);

std::string to_string(QueryMode mode);
QueryMode parse_query_mode(const std::string& text);

} // namespace cbir
