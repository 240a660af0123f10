#include "aquarender/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace aquarender::synthetic {
namespace {

struct Wave {
  double fx, fy, phase, amp;
};

// Band-limited random field with values roughly in [-1, 1].
class Field {
 public:
  Field(std::mt19937_64& rng, int terms, double max_freq) {
    std::uniform_real_distribution<double> freq(-max_freq, max_freq);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    double total = 0.0;
    for (int i = 0; i < terms; ++i) {
      const double amp = 1.0 / (1.0 + i);
      waves_.push_back({freq(rng), freq(rng), phase(rng), amp});
      total += amp;
    }
    for (Wave& w : waves_) w.amp /= total;
  }

  double operator()(double u, double v) const {
    double s = 0.0;
    for (const Wave& w : waves_) s += w.amp * std::cos(2.0 * std::numbers::pi * (w.fx * u + w.fy * v) + w.phase);
    return s;
  }

 private:
  std::vector<Wave> waves_;
};

DepthMap surface(int width, int height, std::mt19937_64& rng, RangeSpan span) {
  std::uniform_real_distribution<double> tilt(-1.0, 1.0);
  const double tx = tilt(rng);
  const double ty = tilt(rng);
  const Field bumps(rng, 3, 1.5);
  DepthMap depth(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width - 0.5;
      const double v = (y + 0.5) / height - 0.5;
      const double t = std::clamp(0.5 + 0.6 * (tx * u + ty * v) + 0.2 * bumps(u, v), 0.0, 1.0);
      depth.at(x, y) = span.near + (span.far - span.near) * t;
    }
  }
  return depth;
}

}  // namespace

fit::Scene textured_scene(int width, int height, std::uint64_t seed, RangeSpan span) {
  std::mt19937_64 rng(seed);
  const DepthMap depth = surface(width, height, rng, span);
  std::array<Field, 3> chroma = {Field(rng, 4, 3.0), Field(rng, 4, 3.0), Field(rng, 4, 3.0)};
  const Field shade(rng, 5, 6.0);
  LinearImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / width;
      const double v = (y + 0.5) / height;
      const double lum = 0.5 + 0.2 * shade(u, v);
      for (std::size_t c = 0; c < 3; ++c) {
        img.at(x, y, c) = std::clamp(lum + 0.25 * chroma[c](u, v), 0.05, 0.95);
      }
    }
  }
  return {std::move(img), depth};
}

fit::Scene gray_scene(int width, int height, std::uint64_t seed, RangeSpan span) {
  std::mt19937_64 rng(seed);
  const DepthMap depth = surface(width, height, rng, span);
  const Field shade(rng, 5, 4.0);
  LinearImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double g = std::clamp(0.55 + 0.3 * shade((x + 0.5) / width, (y + 0.5) / height), 0.2, 0.9);
      for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = g;
    }
  }
  return {std::move(img), depth};
}

fit::Scene flat_gray_scene(int width, int height, double albedo, double range) {
  return {LinearImage(width, height, albedo), DepthMap(width, height, range)};
}

ColorBoard color_board(int width, int height, double range) {
  ColorBoard board;
  board.scene = flat_gray_scene(width, height, 0.5, range);
  static const std::array<std::pair<const char*, eval::Color>, 6> kPatches = {{
      {"blue", {0.15, 0.25, 0.70}},
      {"red", {0.70, 0.15, 0.15}},
      {"magenta", {0.65, 0.20, 0.60}},
      {"green", {0.20, 0.60, 0.25}},
      {"cyan", {0.20, 0.60, 0.65}},
      {"yellow", {0.75, 0.70, 0.15}},
  }};
  // 3 x 2 grid of patches with a one-cell gray margin.
  const int cell_w = width / 4;
  const int cell_h = height / 3;
  for (std::size_t i = 0; i < kPatches.size(); ++i) {
    const int col = static_cast<int>(i % 3);
    const int row = static_cast<int>(i / 3);
    const int x0 = cell_w / 2 + col * cell_w + cell_w / 8;
    const int y0 = cell_h / 2 + row * cell_h + cell_h / 8;
    const int x1 = x0 + cell_w * 3 / 4;
    const int y1 = y0 + cell_h * 3 / 4;
    board.patches.push_back({kPatches[i].first, kPatches[i].second, x0, y0, x1, y1});
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        for (std::size_t c = 0; c < 3; ++c) board.scene.image.at(x, y, c) = kPatches[i].second[c];
      }
    }
  }
  return board;
}

RenderModel random_model(std::mt19937_64& rng, double max_altitude) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RenderModel m;
  // Strictly decreasing attenuation R > G > B, typical of clear water.
  m.water.eta[2] = 0.05 + 0.15 * u(rng);
  m.water.eta[1] = m.water.eta[2] + 0.05 + 0.2 * u(rng);
  m.water.eta[0] = m.water.eta[1] + 0.05 + 0.3 * u(rng);
  for (double& b : m.water.beta) b = 0.02 + 0.25 * u(rng);
  m.camera.a = 0.05 + 0.4 * u(rng);
  m.camera.c = 0.01 + 0.2 * u(rng);
  const double bound = std::sqrt(3.0 * m.camera.a * m.camera.c);
  m.camera.b = (2.0 * u(rng) - 1.0) * 0.9 * bound;
  m.camera.k = 0.8 + 0.5 * u(rng);
  m.max_altitude = max_altitude;
  return m;
}

}  // namespace aquarender::synthetic
