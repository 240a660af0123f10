#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace aquarender {

// Water column: per-channel attenuation (1/m) and backscatter asymptote.
struct WaterParams {
  std::array<double, 3> eta{0.3, 0.2, 0.1};
  std::array<double, 3> beta{0.05, 0.1, 0.15};

  // Throws InvalidParameterError unless eta > 0 and 0 <= beta <= 1.
  void validate() const;
};

// Vignetting polynomial V = 1 + a r^2 + b r^4 + c r^6 and linear sensor gain k.
struct CameraParams {
  double a = 0.1;
  double b = 0.0;
  double c = 0.01;
  double k = 1.0;

  // Throws InvalidParameterError naming the violated inequality among
  // a > 0, c >= 0, 4b^2 - 12ac < 0, k > 0.
  void validate() const;
};

struct RenderModel {
  WaterParams water;
  CameraParams camera;
  double noise_sigma = 0.0;
  double max_altitude = 1.0;

  void validate() const;
};

// Index of each fitted parameter in a ParamVector.
enum class Param : std::size_t {
  kEtaR = 0,
  kEtaG,
  kEtaB,
  kBetaR,
  kBetaG,
  kBetaB,
  kA,
  kB,
  kC,
  kK,
};

inline constexpr std::size_t kParamCount = 10;
using ParamVector = std::array<double, kParamCount>;

constexpr std::size_t idx(Param p) { return static_cast<std::size_t>(p); }
std::string_view param_name(std::size_t i);

// Natural-domain values (eta, beta, a, b, c, k) of the fitted parameters.
ParamVector natural_params(const RenderModel& model);
// Copies natural-domain values into `base`, leaving noise_sigma/max_altitude.
RenderModel with_natural_params(const RenderModel& base, const ParamVector& natural);

// Unconstrained coordinates used by the optimizers:
//   eta = exp(u), beta = logistic(u), a = exp(u), c = exp(u), k = exp(u),
//   b = (1 - kVignetteMargin) * tanh(u) * sqrt(3ac).
// Every finite vector maps to a model that satisfies all invariants.
inline constexpr double kVignetteMargin = 1e-3;

ParamVector to_unconstrained(const RenderModel& model);
RenderModel from_unconstrained(const RenderModel& base, const ParamVector& u);

// Converts a natural-domain gradient into the gradient w.r.t. unconstrained
// coordinates at `model`.
ParamVector chain_to_unconstrained(const RenderModel& model, const ParamVector& natural_grad);

}  // namespace aquarender
