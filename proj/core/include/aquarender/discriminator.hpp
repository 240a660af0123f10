#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aquarender/adam.hpp"
#include "aquarender/raster.hpp"

namespace aquarender {

// Fixed convolutional classifier for 48x64x3 images: four 5x5 stride-2
// convolutions (3 -> 8 -> 16 -> 32 -> 64 channels, zero padding 2) each
// followed by a leaky ReLU (slope 0.2), then an affine map to one logit and
// a sigmoid. Output 1 means "real", 0 means "synthetic".
class Discriminator {
 public:
  static constexpr int kInputHeight = 48;
  static constexpr int kInputWidth = 64;
  static constexpr int kKernel = 5;
  static constexpr int kStride = 2;
  static constexpr int kPad = 2;
  static constexpr double kLeak = 0.2;
  static constexpr std::array<int, 5> kChannels = {3, 8, 16, 32, 64};
  static constexpr std::size_t kConvLayers = 4;

  // Activations recorded by a forward pass, in channel-major layout.
  struct Tape {
    std::array<std::vector<double>, kConvLayers + 1> act;  // act[0] is the input
    std::array<std::vector<double>, kConvLayers> pre;
    double logit = 0.0;
  };

  // All weights and biases zero.
  Discriminator();
  // Zero biases, weights uniform in +-sqrt(1/fan_in).
  static Discriminator initialized(std::uint64_t seed);

  double logit(const LinearImage& img) const;
  double logit(const LinearImage& img, Tape& tape) const;
  // sigmoid(logit), kept strictly inside (0,1).
  double forward(const LinearImage& img) const;

  // Adds dlogit * d(logit)/d(weights) into `weight_grad` (skipped when the
  // span is empty) and, when requested,
  // writes dlogit * d(logit)/d(input) into `input_grad`.
  void backward(const Tape& tape, double dlogit, std::span<double> weight_grad,
                GradientImage* input_grad = nullptr) const;

  std::span<double> weights() noexcept { return weights_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::size_t weight_count() const noexcept { return weights_.size(); }

  Adam& optimizer() noexcept { return optimizer_; }

  // Throws DivergenceError when any weight is NaN or infinite.
  void check_finite() const;

 private:
  struct LayerShape {
    int in_c, in_h, in_w, out_c, out_h, out_w;
    std::size_t weight_offset, bias_offset;
  };

  static std::array<LayerShape, kConvLayers> layer_shapes();
  static void require_input_shape(const LinearImage& img);

  std::array<LayerShape, kConvLayers> layers_;
  std::size_t dense_weight_offset_ = 0;
  std::size_t dense_bias_offset_ = 0;
  std::size_t dense_inputs_ = 0;
  std::vector<double> weights_;
  Adam optimizer_;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace aquarender
