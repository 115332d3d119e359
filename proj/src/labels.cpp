#include "cbir/labels.hpp"

#include "cbir/errors.hpp"

namespace cbir {

std::string label_from_filename(const std::string& filename) {
    const std::string base = std::filesystem::path(filename).filename().string();
    const auto space = base.find(' ');
    if (space != std::string::npos && space > 0) return base.substr(0, space);
    return std::filesystem::path(base).stem().string();
}

std::string derive_label(const std::filesystem::path& file, Labeling labeling) {
    if (labeling == Labeling::FilenamePrefix) return label_from_filename(file.filename().string());
    return file.parent_path().filename().string();
}

Labeling parse_labeling(const std::string& text) {
    if (text == "directory") return Labeling::Directory;
    if (text == "filenamePrefix") return Labeling::FilenamePrefix;
    throw ValidationError("labeling must be 'directory' or 'filenamePrefix', got '" + text + "'");
}

std::string to_string(Labeling labeling) {
    return labeling == Labeling::Directory ? "directory" : "filenamePrefix";
}

} // namespace cbir
