#pragma once

#include <array>

#include "aquarender/params.hpp"
#include "aquarender/physics.hpp"
#include "aquarender/raster.hpp"

namespace aquarender::restore {

struct DepthSearchOptions {
  // Coarse samples over [0, max_altitude], endpoints included.
  int grid_samples = 64;
  // Golden-section refinement around the best grid sample.
  bool refine = true;
  // Refinement stops once the bracket is narrower than this times max_altitude.
  double tolerance_fraction = 1e-4;
  // One 3x3 median pass over the range map.
  bool median = true;
};

struct RestorationResult {
  LinearImage restored;
  DepthMap depth_rel;        // range / max_altitude, in [0,1]
  PixelMask saturation;      // clamped or unrecoverable pixels
  ScalarMap residual;        // gray-prior fit error at the returned range
};

// Per-pixel range estimate with the gray albedo that goes with it.
struct RangeEstimate {
  DepthMap range;      // meters, in [0, max_altitude]
  ScalarMap albedo;    // closed-form gray level at `range`
  ScalarMap residual;  // sqrt(sum_c (G2_c - model_c)^2) at (albedo, range)
  PixelMask saturated;
};

// Undoes gain, vignetting and backscatter, then attenuation:
//   I = clamp(((uw / k) V - beta (1 - e^{-eta r})) e^{eta r}).
// Saturated input pixels are flagged (and still inverted); pixels with
// missing depth are flagged and copied through.
LinearImage invert_render(const LinearImage& uw, const DepthMap& depth, const RenderModel& model,
                          physics::ZeroDepth zero = physics::ZeroDepth::kRange,
                          PixelMask* flagged = nullptr);

// uw / k * V: the backscattered image before vignetting and gain.
LinearImage devignette(const LinearImage& uw, const RenderModel& model);

// Best gray albedo at range r for one pixel of the devignetted image, and
// the squared misfit it leaves. Albedo is clamped to [0,1].
struct GrayFit {
  double albedo = 0.0;
  double misfit = 0.0;
};
GrayFit gray_fit(const std::array<double, 3>& g2, double range, const WaterParams& water);

// Monocular range under a per-pixel gray-albedo prior. Throws AmbiguityError
// when all three attenuation coefficients are equal.
RangeEstimate estimate_range(const LinearImage& uw, const RenderModel& model,
                             const DepthSearchOptions& options = {});

// estimate_range normalized by max_altitude.
DepthMap estimate_depth(const LinearImage& uw, const RenderModel& model,
                        const DepthSearchOptions& options = {});

RestorationResult restore_monocular(const LinearImage& uw, const RenderModel& model,
                                    const DepthSearchOptions& options = {});

// clamp(uw * e^{eta r}): attenuation-only inversion with no backscatter,
// vignetting or gain terms.
LinearImage baseline_attenuation_only(const LinearImage& uw, const DepthMap& depth,
                                      const std::array<double, 3>& eta);

}  // namespace aquarender::restore
