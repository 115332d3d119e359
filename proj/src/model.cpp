#include "cbir/model.hpp"

#include "cbir/errors.hpp"

#include <cmath>
#include <string>

namespace cbir {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::NotFound: return "NOT_FOUND";
    case ErrorCode::Validation: return "VALIDATION";
    case ErrorCode::Decode: return "DECODE";
    case ErrorCode::InsufficientData: return "INSUFFICIENT_DATA";
    case ErrorCode::Storage: return "STORAGE";
    case ErrorCode::Internal: return "INTERNAL";
    }
    return "INTERNAL";
}

namespace {

bool all_finite(const Descriptor& d) {
    for (double v : d)
        if (!std::isfinite(v)) return false;
    return true;
}

} // namespace

void validate(const ImageRecord& image) {
    if (image.name.empty()) throw ValidationError("image name must not be empty");
    if (image.classLabel.empty()) throw ValidationError("image '" + image.name + "' has no class label");
    if (image.width < 1 || image.height < 1) throw ValidationError("image dimensions must be at least 1x1");
    if (image.bytes.empty()) throw ValidationError("image '" + image.name + "' has no bytes");
}

void validate(const DescriptorSet& set) {
    if (set.points.size() != set.descriptors.size())
        throw ValidationError("descriptor set has " + std::to_string(set.descriptors.size()) + " descriptors but " +
                              std::to_string(set.points.size()) + " points");
    for (const auto& d : set.descriptors) {
        if (!all_finite(d)) throw ValidationError("descriptor has non-finite entries");
        double sq = 0;
        for (double v : d) sq += v * v;
        // zero vectors come from featureless regions and are exempt
        if (sq != 0.0 && std::abs(std::sqrt(sq) - 1.0) > 1e-6) throw ValidationError("descriptor is not unit-norm");
    }
    for (const auto& p : set.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !(p.scale > 0))
            throw ValidationError("interest point has invalid position or scale");
        if (p.laplacianSign != 1 && p.laplacianSign != -1)
            throw ValidationError("laplacian sign must be +1 or -1");
    }
}

void validate(const IndexParams& params) {
    if (params.k < 2) throw ValidationError("k must be at least 2");
    if (params.maxIterations < 1) throw ValidationError("maxIterations must be at least 1");
    if (!(params.convergenceEps > 0)) throw ValidationError("convergenceEps must be positive");
}

void validate(const Vocabulary& vocabulary) {
    validate(vocabulary.params);
    if (vocabulary.k < 2) throw ValidationError("vocabulary k must be at least 2");
    if (vocabulary.centroids.size() != static_cast<std::size_t>(vocabulary.k))
        throw ValidationError("vocabulary must hold exactly k centroids");
    for (const auto& c : vocabulary.centroids)
        if (!all_finite(c)) throw ValidationError("vocabulary centroid has non-finite entries");
    if (vocabulary.trainingSplit) {
        const double r = vocabulary.trainingSplit->ratio;
        if (!(r > 0 && r < 1)) throw ValidationError("split ratio must lie in (0,1)");
    }
}

void validate(const HistogramRecord& histogram) {
    double sum = 0;
    for (std::size_t i = 0; i < histogram.bins.size(); ++i) {
        const auto& b = histogram.bins[i];
        if (b.wordIndex != static_cast<int>(i)) throw ValidationError("histogram bins must be dense and ordered");
        if (!std::isfinite(b.weight) || b.weight < 0) throw ValidationError("bin weight must be finite and >= 0");
        sum += b.weight;
    }
    if (sum != 0.0 && std::abs(sum - 1.0) > 1e-9) throw ValidationError("histogram weights must sum to 1");
}

} // namespace cbir
