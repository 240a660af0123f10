#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "aquarender/params.hpp"
#include "aquarender/raster.hpp"

namespace aquarender::testing {

inline LinearImage random_image(std::mt19937_64& rng, int w, int h, double lo = 0.05,
                                double hi = 0.95) {
  std::uniform_real_distribution<double> u(lo, hi);
  LinearImage img(w, h);
  for (double& v : img.values()) v = u(rng);
  return img;
}

inline DepthMap random_depth(std::mt19937_64& rng, int w, int h, double lo = 0.2,
                             double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  DepthMap d(w, h);
  for (double& v : d.values()) v = u(rng);
  return d;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// |a - b| <= rel * max(|a|, |b|), with an absolute floor for values near 0.
inline bool close_rel(double a, double b, double rel, double floor) {
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), floor);
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

}  // namespace aquarender::testing
