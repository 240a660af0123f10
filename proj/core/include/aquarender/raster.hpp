#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aquarender/error.hpp"

namespace aquarender {

// Row-major, channel-interleaved pixel grid. `Tag` keeps semantically
// different grids (radiance, range, masks) from mixing silently.
template <typename T, std::size_t Channels, typename Tag>
class Raster {
 public:
  using value_type = T;
  static constexpr std::size_t kChannels = Channels;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw ContractError("raster dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
    }
    data_.assign(static_cast<std::size_t>(width) * height * Channels, fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int x, int y, std::size_t c = 0) noexcept { return data_[index(x, y, c)]; }
  const T& at(int x, int y, std::size_t c = 0) const noexcept { return data_[index(x, y, c)]; }

  // Pixel-linear access: p in [0, pixel_count()).
  T& operator()(std::size_t p, std::size_t c = 0) noexcept { return data_[p * Channels + c]; }
  const T& operator()(std::size_t p, std::size_t c = 0) const noexcept {
    return data_[p * Channels + c];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  template <typename U, std::size_t C2, typename Tag2>
  bool same_shape(const Raster<U, C2, Tag2>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y, std::size_t c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * Channels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct RadianceTag;
struct RangeTag;
struct ScalarTag;
struct GradientTag;
struct MaskTag;

// Linear radiance, R,G,B in [0,1].
using LinearImage = Raster<double, 3, RadianceTag>;
// Camera-to-scene range in meters; 0 is either range zero or "missing".
using DepthMap = Raster<double, 1, RangeTag>;
// Single-channel real field (vignetting factor, residuals).
using ScalarMap = Raster<double, 1, ScalarTag>;
// Unconstrained three-channel field (derivative images).
using GradientImage = Raster<double, 3, GradientTag>;
// Per-pixel boolean flags.
using PixelMask = Raster<std::uint8_t, 1, MaskTag>;

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ContractError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                        "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                        "x" + std::to_string(b.height()) + ")");
  }
}

inline double clamp_unit(double v) noexcept { return std::clamp(v, 0.0, 1.0); }

}  // namespace aquarender
