#include "cbir/extractor.hpp"

namespace cbir {

SurfExtractor::SurfExtractor(ExtractorParams params, Execution exec) : params_(params), exec_(exec) {
    validate(params_);
}

Features SurfExtractor::extract(std::span<const std::uint8_t> encoded) const {
    return extract_features(to_grayscale(decode_image(encoded)), params_, exec_);
}

} // namespace cbir
