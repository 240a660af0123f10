#include "aquarender/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "aquarender/error.hpp"

namespace aquarender {

std::array<Discriminator::LayerShape, Discriminator::kConvLayers> Discriminator::layer_shapes() {
  std::array<LayerShape, kConvLayers> shapes{};
  int h = kInputHeight;
  int w = kInputWidth;
  std::size_t offset = 0;
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    LayerShape& s = shapes[l];
    s.in_c = kChannels[l];
    s.out_c = kChannels[l + 1];
    s.in_h = h;
    s.in_w = w;
    s.out_h = (h + 2 * kPad - kKernel) / kStride + 1;
    s.out_w = (w + 2 * kPad - kKernel) / kStride + 1;
    s.weight_offset = offset;
    offset += static_cast<std::size_t>(s.out_c) * s.in_c * kKernel * kKernel;
    s.bias_offset = offset;
    offset += static_cast<std::size_t>(s.out_c);
    h = s.out_h;
    w = s.out_w;
  }
  return shapes;
}

Discriminator::Discriminator() : layers_(layer_shapes()) {
  const LayerShape& last = layers_.back();
  dense_weight_offset_ = last.bias_offset + static_cast<std::size_t>(last.out_c);
  dense_inputs_ = static_cast<std::size_t>(last.out_c) * last.out_h * last.out_w;
  dense_bias_offset_ = dense_weight_offset_ + dense_inputs_;
  weights_.assign(dense_bias_offset_ + 1, 0.0);
  optimizer_ = Adam(weights_.size());
}

Discriminator Discriminator::initialized(std::uint64_t seed) {
  Discriminator d;
  std::mt19937_64 rng(seed);
  for (const LayerShape& s : d.layers_) {
    const double bound = std::sqrt(1.0 / (s.in_c * kKernel * kKernel));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t i = s.weight_offset; i < s.bias_offset; ++i) d.weights_[i] = u(rng);
  }
  const double bound = std::sqrt(1.0 / static_cast<double>(d.dense_inputs_));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (std::size_t i = d.dense_weight_offset_; i < d.dense_bias_offset_; ++i) d.weights_[i] = u(rng);
  return d;
}

void Discriminator::require_input_shape(const LinearImage& img) {
  if (img.width() != kInputWidth || img.height() != kInputHeight) {
    throw ContractError("discriminator expects a 64x48 (WxH) image, got " +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
}

double Discriminator::logit(const LinearImage& img) const {
  Tape tape;
  return logit(img, tape);
}

double Discriminator::logit(const LinearImage& img, Tape& tape) const {
  require_input_shape(img);
  const std::size_t plane = static_cast<std::size_t>(kInputWidth) * kInputHeight;
  auto& input = tape.act[0];
  input.assign(3 * plane, 0.0);
  for (std::size_t p = 0; p < plane; ++p) {
    for (std::size_t c = 0; c < 3; ++c) input[c * plane + p] = img(p, c);
  }

  for (std::size_t l = 0; l < kConvLayers; ++l) {
    const LayerShape& s = layers_[l];
    const auto& in = tape.act[l];
    auto& pre = tape.pre[l];
    auto& out = tape.act[l + 1];
    const std::size_t out_plane = static_cast<std::size_t>(s.out_h) * s.out_w;
    const std::size_t in_plane = static_cast<std::size_t>(s.in_h) * s.in_w;
    pre.assign(static_cast<std::size_t>(s.out_c) * out_plane, 0.0);
    out.resize(pre.size());
    for (int oc = 0; oc < s.out_c; ++oc) {
      const double bias = weights_[s.bias_offset + oc];
      for (int oy = 0; oy < s.out_h; ++oy) {
        for (int ox = 0; ox < s.out_w; ++ox) {
          double sum = bias;
          for (int ic = 0; ic < s.in_c; ++ic) {
            const double* wk =
                &weights_[s.weight_offset + (static_cast<std::size_t>(oc) * s.in_c + ic) * 25];
            const double* src = &in[ic * in_plane];
            for (int ky = 0; ky < kKernel; ++ky) {
              const int iy = oy * kStride + ky - kPad;
              if (iy < 0 || iy >= s.in_h) continue;
              for (int kx = 0; kx < kKernel; ++kx) {
                const int ix = ox * kStride + kx - kPad;
                if (ix < 0 || ix >= s.in_w) continue;
                sum += wk[ky * kKernel + kx] * src[iy * s.in_w + ix];
              }
            }
          }
          const std::size_t o = oc * out_plane + static_cast<std::size_t>(oy) * s.out_w + ox;
          pre[o] = sum;
          out[o] = sum > 0.0 ? sum : kLeak * sum;
        }
      }
    }
  }

  const auto& features = tape.act[kConvLayers];
  double z = weights_[dense_bias_offset_];
  for (std::size_t i = 0; i < dense_inputs_; ++i) z += weights_[dense_weight_offset_ + i] * features[i];
  tape.logit = z;
  return z;
}

double Discriminator::forward(const LinearImage& img) const {
  constexpr double kTiny = std::numeric_limits<double>::epsilon();
  return std::clamp(sigmoid(logit(img)), kTiny, 1.0 - kTiny);
}

void Discriminator::backward(const Tape& tape, double dlogit, std::span<double> weight_grad,
                             GradientImage* input_grad) const {
  const bool want_weights = !weight_grad.empty();
  if (want_weights && weight_grad.size() != weights_.size()) {
    throw ContractError("Discriminator::backward: gradient buffer has wrong size");
  }
  const auto& features = tape.act[kConvLayers];
  std::vector<double> upstream(dense_inputs_);
  if (want_weights) weight_grad[dense_bias_offset_] += dlogit;
  for (std::size_t i = 0; i < dense_inputs_; ++i) {
    if (want_weights) weight_grad[dense_weight_offset_ + i] += dlogit * features[i];
    upstream[i] = dlogit * weights_[dense_weight_offset_ + i];
  }

  for (std::size_t l = kConvLayers; l-- > 0;) {
    const LayerShape& s = layers_[l];
    const auto& in = tape.act[l];
    const auto& pre = tape.pre[l];
    const std::size_t out_plane = static_cast<std::size_t>(s.out_h) * s.out_w;
    const std::size_t in_plane = static_cast<std::size_t>(s.in_h) * s.in_w;
    const bool need_input = l > 0 || input_grad != nullptr;
    if (!need_input && !want_weights) break;
    std::vector<double> down(need_input ? static_cast<std::size_t>(s.in_c) * in_plane : 0, 0.0);

    for (int oc = 0; oc < s.out_c; ++oc) {
      for (int oy = 0; oy < s.out_h; ++oy) {
        for (int ox = 0; ox < s.out_w; ++ox) {
          const std::size_t o = oc * out_plane + static_cast<std::size_t>(oy) * s.out_w + ox;
          const double g = upstream[o] * (pre[o] > 0.0 ? 1.0 : kLeak);
          if (g == 0.0) continue;
          if (want_weights) weight_grad[s.bias_offset + oc] += g;
          for (int ic = 0; ic < s.in_c; ++ic) {
            const std::size_t wbase =
                s.weight_offset + (static_cast<std::size_t>(oc) * s.in_c + ic) * 25;
            const double* src = &in[ic * in_plane];
            double* dst = need_input ? &down[ic * in_plane] : nullptr;
            for (int ky = 0; ky < kKernel; ++ky) {
              const int iy = oy * kStride + ky - kPad;
              if (iy < 0 || iy >= s.in_h) continue;
              for (int kx = 0; kx < kKernel; ++kx) {
                const int ix = ox * kStride + kx - kPad;
                if (ix < 0 || ix >= s.in_w) continue;
                const std::size_t k = static_cast<std::size_t>(ky) * kKernel + kx;
                if (want_weights) weight_grad[wbase + k] += g * src[iy * s.in_w + ix];
                if (dst != nullptr) dst[iy * s.in_w + ix] += g * weights_[wbase + k];
              }
            }
          }
        }
      }
    }
    upstream = std::move(down);
  }

  if (input_grad != nullptr) {
    *input_grad = GradientImage(kInputWidth, kInputHeight);
    const std::size_t plane = static_cast<std::size_t>(kInputWidth) * kInputHeight;
    for (std::size_t p = 0; p < plane; ++p) {
      for (std::size_t c = 0; c < 3; ++c) (*input_grad)(p, c) = upstream[c * plane + p];
    }
  }
}

void Discriminator::check_finite() const {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i])) {
      throw DivergenceError("discriminator weight " + std::to_string(i) + " is not finite");
    }
  }
}

}  // namespace aquarender
