#include "aquarender/physics.hpp"

#include <cmath>
#include <deque>
#include <random>
#include <string>

namespace aquarender::physics {
namespace {

void require_finite_nonnegative(const DepthMap& depth) {
  for (double v : depth.values()) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ContractError("depth values must be finite and non-negative");
    }
  }
}

// Depth with missing pixels resolved for rendering.
DepthMap prepared_depth(const DepthMap& depth, ZeroDepth zero) {
  require_finite_nonnegative(depth);
  return zero == ZeroDepth::kMissing ? fill_missing_depth(depth) : depth;
}

}  // namespace

PixelMask missing_depth_mask(const DepthMap& depth, ZeroDepth zero) {
  PixelMask mask(depth.width(), depth.height(), 0);
  if (zero == ZeroDepth::kMissing) {
    for (std::size_t p = 0; p < depth.pixel_count(); ++p) mask(p) = depth(p) == 0.0 ? 1 : 0;
  }
  return mask;
}

DepthMap fill_missing_depth(const DepthMap& depth) {
  DepthMap out = depth;
  const int w = depth.width();
  const int h = depth.height();
  std::vector<std::uint8_t> known(depth.pixel_count(), 0);
  std::deque<std::size_t> frontier;
  for (std::size_t p = 0; p < depth.pixel_count(); ++p) {
    if (depth(p) != 0.0) {
      known[p] = 1;
      frontier.push_back(p);
    }
  }
  if (frontier.empty()) throw ContractError("depth map has no valid pixels to fill from");
  if (frontier.size() == depth.pixel_count()) return out;

  while (!frontier.empty()) {
    const std::size_t p = frontier.front();
    frontier.pop_front();
    const int x = static_cast<int>(p % w);
    const int y = static_cast<int>(p / w);
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int i = 0; i < 4; ++i) {
      if (nx[i] < 0 || ny[i] < 0 || nx[i] >= w || ny[i] >= h) continue;
      const std::size_t q = static_cast<std::size_t>(ny[i]) * w + nx[i];
      if (known[q]) continue;
      known[q] = 1;
      out(q) = out(p);
      frontier.push_back(q);
    }
  }
  return out;
}

LinearImage attenuate(const LinearImage& img, const DepthMap& depth, const WaterParams& water,
                      ZeroDepth zero, PixelMask* missing) {
  require_same_shape(img, depth, "attenuate");
  water.validate();
  require_finite_nonnegative(depth);
  LinearImage out = img;
  const PixelMask holes = missing_depth_mask(depth, zero);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    if (holes(p)) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      out(p, c) = img(p, c) * std::exp(-water.eta[c] * depth(p));
    }
  }
  if (missing != nullptr) *missing = holes;
  return out;
}

LinearImage backscatter_mask(const DepthMap& depth, const WaterParams& water) {
  water.validate();
  require_finite_nonnegative(depth);
  LinearImage mask(depth.width(), depth.height());
  for (std::size_t p = 0; p < depth.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      mask(p, c) = water.beta[c] * -std::expm1(-water.eta[c] * depth(p));
    }
  }
  return mask;
}

LinearImage compose_scatter(const LinearImage& g1, const LinearImage& mask, double noise_sigma,
                            std::uint64_t seed) {
  require_same_shape(g1, mask, "compose_scatter");
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) {
    throw InvalidParameterError("noise_sigma must be >= 0");
  }
  LinearImage out(g1.width(), g1.height());
  auto in1 = g1.values();
  auto in2 = mask.values();
  auto dst = out.values();
  if (noise_sigma == 0.0) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = clamp_unit(in1[i] + in2[i]);
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = clamp_unit(in1[i] + in2[i] + noise(rng));
  return out;
}

double normalized_radius(int x, int y, int width, int height) {
  const double cx = 0.5 * (width - 1);
  const double cy = 0.5 * (height - 1);
  const double rmax = std::hypot(cx, cy);
  if (rmax == 0.0) return 0.0;
  return std::hypot(x - cx, y - cy) / rmax;
}

double vignette_factor(double r, const CameraParams& cam) {
  const double r2 = r * r;
  return 1.0 + r2 * (cam.a + r2 * (cam.b + r2 * cam.c));
}

ScalarMap vignette_mask(int width, int height, const CameraParams& cam) {
  cam.validate();
  ScalarMap v(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      v.at(x, y) = vignette_factor(normalized_radius(x, y, width, height), cam);
    }
  }
  return v;
}

LinearImage apply_vignette(const LinearImage& g2, const ScalarMap& vmask) {
  require_same_shape(g2, vmask, "apply_vignette");
  LinearImage out(g2.width(), g2.height());
  for (std::size_t p = 0; p < g2.pixel_count(); ++p) {
    const double v = vmask(p);
    if (!(v >= 1.0)) throw ContractError("vignette mask must be >= 1 everywhere");
    for (std::size_t c = 0; c < 3; ++c) out(p, c) = g2(p, c) / v;
  }
  return out;
}

LinearImage sensor_gain(const LinearImage& g3, double k) {
  if (!std::isfinite(k) || !(k > 0.0)) {
    throw InvalidParameterError("sensor gain k must be > 0");
  }
  LinearImage out(g3.width(), g3.height());
  auto src = g3.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = clamp_unit(k * src[i]);
  return out;
}

LinearImage render(const LinearImage& scene, const DepthMap& depth, const RenderModel& model,
                   std::uint64_t seed, ZeroDepth zero) {
  require_same_shape(scene, depth, "render");
  model.validate();
  const DepthMap range = prepared_depth(depth, zero);
  const LinearImage g1 = attenuate(scene, range, model.water);
  const LinearImage g2 =
      compose_scatter(g1, backscatter_mask(range, model.water), model.noise_sigma, seed);
  const LinearImage g3 =
      apply_vignette(g2, vignette_mask(scene.width(), scene.height(), model.camera));
  return sensor_gain(g3, model.camera.k);
}

RenderGradients render_gradients(const LinearImage& scene, const DepthMap& depth,
                                 const RenderModel& model, ZeroDepth zero) {
  require_same_shape(scene, depth, "render_gradients");
  model.validate();
  const DepthMap range = prepared_depth(depth, zero);
  const int w = scene.width();
  const int h = scene.height();
  const auto& water = model.water;
  const auto& cam = model.camera;

  RenderGradients out;
  out.output = LinearImage(w, h);
  for (auto& g : out.d) g = GradientImage(w, h);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      const double r = range(p);
      const double rad = normalized_radius(x, y, w, h);
      const double r2 = rad * rad;
      const double v = vignette_factor(rad, cam);
      for (std::size_t c = 0; c < 3; ++c) {
        const double e = std::exp(-water.eta[c] * r);
        const double g1 = scene(p, c) * e;
        const double haze = water.beta[c] * -std::expm1(-water.eta[c] * r);
        const double g2_raw = g1 + haze;
        const double g2 = clamp_unit(g2_raw);
        const double g3 = g2 / v;
        const double out_raw = cam.k * g3;
        out.output(p, c) = clamp_unit(out_raw);
        if (g2_raw > 1.0 || g2_raw < 0.0 || out_raw > 1.0 || out_raw < 0.0) continue;

        const double scale = cam.k / v;
        // d(G1 + B)/d(eta) = -r*I*e + beta*r*e
        out.d[idx(Param::kEtaR) + c](p, c) = scale * r * e * (water.beta[c] - scene(p, c));
        out.d[idx(Param::kBetaR) + c](p, c) = scale * (1.0 - e);
        const double dv = -cam.k * g2 / (v * v);
        out.d[idx(Param::kA)](p, c) = dv * r2;
        out.d[idx(Param::kB)](p, c) = dv * r2 * r2;
        out.d[idx(Param::kC)](p, c) = dv * r2 * r2 * r2;
        out.d[idx(Param::kK)](p, c) = g3;
      }
    }
  }
  return out;
}

DepthMap normalize_depth(const DepthMap& depth, double max_altitude) {
  if (!std::isfinite(max_altitude) || !(max_altitude > 0.0)) {
    throw InvalidParameterError("max_altitude must be > 0");
  }
  require_finite_nonnegative(depth);
  DepthMap out(depth.width(), depth.height());
  for (std::size_t p = 0; p < depth.pixel_count(); ++p) {
    out(p) = std::min(depth(p) / max_altitude, 1.0);
  }
  return out;
}

}  // namespace aquarender::physics
