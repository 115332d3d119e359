#pragma once

#include "cbir/surf.hpp"

#include <cstdint>
#include <span>

namespace cbir {

/// Turns encoded image bytes into local features. Implementations must be
/// deterministic and safe to call concurrently.
class FeatureExtractor {
  public:
    virtual ~FeatureExtractor() = default;
    virtual Features extract(std::span<const std::uint8_t> encoded) const = 0;
};

class SurfExtractor final : public FeatureExtractor {
  public:
    explicit SurfExtractor(ExtractorParams params = {}, Execution exec = Execution::Parallel);

    Features extract(std::span<const std::uint8_t> encoded) const override;
    const ExtractorParams& params() const noexcept { return params_; }

  private:
    ExtractorParams params_;
    Execution exec_;
};

} // namespace cbir
