#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "aquarender/adversarial.hpp"
#include "aquarender/evaluation.hpp"
#include "aquarender/params.hpp"

// Procedural in-air RGB-D scenes with known ground truth.
namespace aquarender::synthetic {

struct RangeSpan {
  double near = 0.5;
  double far = 2.0;
};

// Smooth colored texture over a tilted, gently undulating surface.
fit::Scene textured_scene(int width, int height, std::uint64_t seed, RangeSpan span);

// Same geometry with achromatic albedo (R = G = B) varying over the image.
fit::Scene gray_scene(int width, int height, std::uint64_t seed, RangeSpan span);

// Gray albedo at a constant range.
fit::Scene flat_gray_scene(int width, int height, double albedo, double range);

struct BoardPatch {
  std::string name;
  eval::Color reference;
  int x0, y0, x1, y1;  // half-open pixel rectangle
};

// Six reference patches (blue, red, magenta, green, cyan, yellow) on a gray
// platform, all at `range`.
struct ColorBoard {
  fit::Scene scene;
  std::vector<BoardPatch> patches;
};
ColorBoard color_board(int width, int height, double range);

// Random valid model with channel-distinct attenuation, for property tests.
RenderModel random_model(std::mt19937_64& rng, double max_altitude = 2.0);

}  // namespace aquarender::synthetic
