#pragma once

#include <filesystem>
#include <string>

namespace cbir {

enum class Labeling { Directory, FilenamePrefix };

/// "1 (20).jpg" -> "1"; a name without a space yields its stem.
std::string label_from_filename(const std::string& filename);

/// Class label of a file found under an ingestion root.
std::string derive_label(const std::filesystem::path& file, Labeling labeling);

Labeling parse_labeling(const std::string& text);
std::string to_string(Labeling labeling);

} // namespace cbir
