#include "aquarender/restoration.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aquarender/error.hpp"

namespace aquarender::restore {
namespace {

bool saturated(const LinearImage& img, std::size_t p) {
  for (std::size_t c = 0; c < 3; ++c) {
    if (img(p, c) >= 1.0 || img(p, c) <= 0.0) return true;
  }
  return false;
}

void require_distinct_eta(const WaterParams& water) {
  const auto [lo, hi] = std::minmax_element(water.eta.begin(), water.eta.end());
  if (!(*hi - *lo > 1e-6 * *hi)) {
    throw AmbiguityError(
        "monocular depth is not identifiable: attenuation is equal in all channels");
  }
}

double search_range(const std::array<double, 3>& g2, const WaterParams& water, double max_range,
                    const DepthSearchOptions& opt) {
  const int n = opt.grid_samples;
  const double step = max_range / (n - 1);
  int best = 0;
  double best_misfit = gray_fit(g2, 0.0, water).misfit;
  for (int i = 1; i < n; ++i) {
    const double m = gray_fit(g2, i * step, water).misfit;
    if (m < best_misfit) {
      best_misfit = m;
      best = i;
    }
  }
  double best_r = best * step;
  if (!opt.refine) return best_r;

  // Golden-section search on the bracket around the best sample.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(0.0, best_r - step);
  double hi = std::min(max_range, best_r + step);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = gray_fit(g2, x1, water).misfit;
  double f2 = gray_fit(g2, x2, water).misfit;
  const double tol = opt.tolerance_fraction * max_range;
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = gray_fit(g2, x1, water).misfit;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = gray_fit(g2, x2, water).misfit;
    }
  }
  const double mid = 0.5 * (lo + hi);
  return gray_fit(g2, mid, water).misfit <= best_misfit ? mid : best_r;
}

DepthMap median3x3(const DepthMap& range, const PixelMask& excluded) {
  DepthMap out = range;
  const int w = range.width();
  const int h = range.height();
  std::vector<double> window;
  window.reserve(9);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      window.clear();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h || excluded.at(nx, ny)) continue;
          window.push_back(range.at(nx, ny));
        }
      }
      if (window.empty()) continue;
      std::sort(window.begin(), window.end());
      const std::size_t m = window.size() / 2;
      out.at(x, y) = window.size() % 2 == 1 ? window[m] : 0.5 * (window[m - 1] + window[m]);
    }
  }
  return out;
}

}  // namespace

LinearImage devignette(const LinearImage& uw, const RenderModel& model) {
  model.validate();
  const ScalarMap v = physics::vignette_mask(uw.width(), uw.height(), model.camera);
  LinearImage g2(uw.width(), uw.height());
  for (std::size_t p = 0; p < uw.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) g2(p, c) = uw(p, c) / model.camera.k * v(p);
  }
  return g2;
}

GrayFit gray_fit(const std::array<double, 3>& g2, double range, const WaterParams& water) {
  std::array<double, 3> e{};
  std::array<double, 3> y{};
  double num = 0.0;
  double den = 0.0;
  for (std::size_t c = 0; c < 3; ++c) {
    e[c] = std::exp(-water.eta[c] * range);
    y[c] = g2[c] - water.beta[c] * -std::expm1(-water.eta[c] * range);
    num += y[c] * e[c];
    den += e[c] * e[c];
  }
  GrayFit fit;
  fit.albedo = std::clamp(num / den, 0.0, 1.0);
  for (std::size_t c = 0; c < 3; ++c) {
    const double d = y[c] - fit.albedo * e[c];
    fit.misfit += d * d;
  }
  return fit;
}

LinearImage invert_render(const LinearImage& uw, const DepthMap& depth, const RenderModel& model,
                          physics::ZeroDepth zero, PixelMask* flagged) {
  require_same_shape(uw, depth, "invert_render");
  const LinearImage g2 = devignette(uw, model);
  const PixelMask holes = physics::missing_depth_mask(depth, zero);
  LinearImage out(uw.width(), uw.height());
  PixelMask flags(uw.width(), uw.height(), 0);
  for (std::size_t p = 0; p < uw.pixel_count(); ++p) {
    const double r = depth(p);
    if (!std::isfinite(r) || r < 0.0) throw ContractError("depth values must be finite and >= 0");
    if (holes(p)) {
      flags(p) = 1;
      for (std::size_t c = 0; c < 3; ++c) out(p, c) = uw(p, c);
      continue;
    }
    if (saturated(uw, p)) flags(p) = 1;
    for (std::size_t c = 0; c < 3; ++c) {
      const double eta = model.water.eta[c];
      const double haze = model.water.beta[c] * -std::expm1(-eta * r);
      out(p, c) = clamp_unit((g2(p, c) - haze) * std::exp(eta * r));
    }
  }
  if (flagged != nullptr) *flagged = std::move(flags);
  return out;
}

RangeEstimate estimate_range(const LinearImage& uw, const RenderModel& model,
                             const DepthSearchOptions& options) {
  model.validate();
  require_distinct_eta(model.water);
  if (options.grid_samples < 2) throw InvalidParameterError("grid_samples must be >= 2");
  if (!(options.tolerance_fraction > 0.0)) {
    throw InvalidParameterError("tolerance_fraction must be > 0");
  }

  const LinearImage g2 = devignette(uw, model);
  const int w = uw.width();
  const int h = uw.height();
  RangeEstimate est{DepthMap(w, h), ScalarMap(w, h), ScalarMap(w, h), PixelMask(w, h, 0)};
  for (std::size_t p = 0; p < uw.pixel_count(); ++p) {
    est.saturated(p) = saturated(uw, p) ? 1 : 0;
    const std::array<double, 3> px = {g2(p, 0), g2(p, 1), g2(p, 2)};
    est.range(p) = search_range(px, model.water, model.max_altitude, options);
  }
  if (options.median) est.range = median3x3(est.range, est.saturated);

  for (std::size_t p = 0; p < uw.pixel_count(); ++p) {
    const std::array<double, 3> px = {g2(p, 0), g2(p, 1), g2(p, 2)};
    const GrayFit fit = gray_fit(px, est.range(p), model.water);
    est.albedo(p) = fit.albedo;
    est.residual(p) = std::sqrt(fit.misfit);
  }
  return est;
}

DepthMap estimate_depth(const LinearImage& uw, const RenderModel& model,
                        const DepthSearchOptions& options) {
  return physics::normalize_depth(estimate_range(uw, model, options).range, model.max_altitude);
}

RestorationResult restore_monocular(const LinearImage& uw, const RenderModel& model,
                                    const DepthSearchOptions& options) {
  RangeEstimate est = estimate_range(uw, model, options);
  RestorationResult result;
  result.restored = invert_render(uw, est.range, model, physics::ZeroDepth::kRange,
                                  &result.saturation);
  result.depth_rel = physics::normalize_depth(est.range, model.max_altitude);
  result.residual = std::move(est.residual);
  return result;
}

LinearImage baseline_attenuation_only(const LinearImage& uw, const DepthMap& depth,
                                      const std::array<double, 3>& eta) {
  require_same_shape(uw, depth, "baseline_attenuation_only");
  LinearImage out(uw.width(), uw.height());
  for (std::size_t p = 0; p < uw.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) out(p, c) = clamp_unit(uw(p, c) * std::exp(eta[c] * depth(p)));
  }
  return out;
}

}  // namespace aquarender::restore
