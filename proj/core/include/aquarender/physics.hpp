#pragma once

#include <array>
#include <cstdint>

#include "aquarender/params.hpp"
#include "aquarender/raster.hpp"

// Forward underwater image formation:
//   G1  = I_air * exp(-eta * r)                 (attenuation)
//   G2  = clamp(G1 + beta * (1 - exp(-eta r)))  (backscatter)
//   G3  = G2 / V(radius)                        (vignetting)
//   out = clamp(k * G3)                         (linear sensor)
namespace aquarender::physics {

// How a stored depth of exactly 0 is read.
enum class ZeroDepth {
  kRange,    // range zero (synthetic data)
  kMissing,  // no measurement (sensor holes)
};

// Marks pixels whose depth is missing under `zero`.
PixelMask missing_depth_mask(const DepthMap& depth, ZeroDepth zero);

// Replaces missing (zero) pixels by the value of the nearest valid pixel,
// breadth-first over 4-neighbours with a fixed visiting order.
DepthMap fill_missing_depth(const DepthMap& depth);

LinearImage attenuate(const LinearImage& img, const DepthMap& depth, const WaterParams& water,
                      ZeroDepth zero = ZeroDepth::kRange, PixelMask* missing = nullptr);

LinearImage backscatter_mask(const DepthMap& depth, const WaterParams& water);

// clamp(g1 + mask + n), n ~ N(0, noise_sigma^2) per pixel and channel from a
// generator seeded with `seed`. noise_sigma == 0 draws nothing.
LinearImage compose_scatter(const LinearImage& g1, const LinearImage& mask, double noise_sigma,
                            std::uint64_t seed);

// Radius from the image center, 1 at the corner pixel centers.
double normalized_radius(int x, int y, int width, int height);
double vignette_factor(double r, const CameraParams& cam);
ScalarMap vignette_mask(int width, int height, const CameraParams& cam);

LinearImage apply_vignette(const LinearImage& g2, const ScalarMap& vmask);
LinearImage sensor_gain(const LinearImage& g3, double k);

// Full chain. With `zero == kMissing`, holes are filled by nearest neighbour
// before rendering.
LinearImage render(const LinearImage& scene, const DepthMap& depth, const RenderModel& model,
                   std::uint64_t seed, ZeroDepth zero = ZeroDepth::kRange);

// Noiseless render together with d(out)/d(theta) for every natural-domain
// parameter, ordered as in Param. Entries are 0 wherever a clamp is active.
struct RenderGradients {
  LinearImage output;
  std::array<GradientImage, kParamCount> d;
};

RenderGradients render_gradients(const LinearImage& scene, const DepthMap& depth,
                                 const RenderModel& model, ZeroDepth zero = ZeroDepth::kRange);

// min(depth / max_altitude, 1); zeros stay zero.
DepthMap normalize_depth(const DepthMap& depth, double max_altitude);

}  // namespace aquarender::physics
