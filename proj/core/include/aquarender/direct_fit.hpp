#pragma once

#include <cstddef>
#include <span>

#include "aquarender/params.hpp"
#include "aquarender/physics.hpp"
#include "aquarender/raster.hpp"

namespace aquarender::fit {

// In-air RGB-D sample together with the matching underwater observation.
struct Pair {
  LinearImage in_air;
  DepthMap depth;
  LinearImage underwater;
};

struct DirectFitOptions {
  // Starting point; noise_sigma and max_altitude are carried through unchanged.
  RenderModel initial;
  int max_iterations = 200;
  // Stop once an accepted step lowers the cost by less than this fraction.
  double relative_tolerance = 1e-14;
  physics::ZeroDepth zero_depth = physics::ZeroDepth::kRange;
  // Minimum number of usable (pixel, channel) samples.
  std::size_t min_samples = 32;
};

struct DirectFitResult {
  RenderModel model;
  double rms_residual = 0.0;
  std::size_t samples = 0;
  int iterations = 0;
};

// Nonlinear least squares of render(pair) against the observed underwater
// image, over all ten physical parameters. Observed values at 0 or 1
// (saturated) and pixels with missing depth are excluded.
//
// Throws UnderConstrainedError when fewer than `min_samples` usable samples
// remain or when a parameter has no influence on any usable sample (for
// instance attenuation with every range equal to zero).
DirectFitResult fit_direct(std::span<const Pair> pairs, const DirectFitOptions& options = {});

}  // namespace aquarender::fit
