#include "aquarender/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "aquarender/error.hpp"

namespace aquarender {
namespace {

constexpr std::array<std::string_view, kParamCount> kNames = {
    "eta_r", "eta_g", "eta_b", "beta_r", "beta_g", "beta_b", "a", "b", "c", "k"};

// Keeps logit/atanh finite for boundary values such as beta = 0.
constexpr double kOpenIntervalGuard = 1e-12;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

}  // namespace

std::string_view param_name(std::size_t i) { return kNames.at(i); }

void WaterParams::validate() const {
  static constexpr std::array<char, 3> kChannel = {'R', 'G', 'B'};
  for (std::size_t c = 0; c < 3; ++c) {
    if (!std::isfinite(eta[c]) || !(eta[c] > 0.0)) {
      throw InvalidParameterError(std::string("eta[") + kChannel[c] + "] must be > 0, got " +
                                  fmt(eta[c]));
    }
    if (!std::isfinite(beta[c]) || beta[c] < 0.0 || beta[c] > 1.0) {
      throw InvalidParameterError(std::string("beta[") + kChannel[c] +
                                  "] must lie in [0,1], got " + fmt(beta[c]));
    }
  }
}

void CameraParams::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(k)) {
    throw InvalidParameterError("camera parameters must be finite");
  }
  if (!(a > 0.0)) {
    throw InvalidParameterError("vignetting constraint a > 0 violated (a = " + fmt(a) + ")");
  }
  if (!(c >= 0.0)) {
    throw InvalidParameterError("vignetting constraint c >= 0 violated (c = " + fmt(c) + ")");
  }
  const double disc = 4.0 * b * b - 12.0 * a * c;
  if (!(disc < 0.0)) {
    throw InvalidParameterError("vignetting constraint 4b^2 - 12ac < 0 violated (4b^2 = " +
                                fmt(4.0 * b * b) + ", 12ac = " + fmt(12.0 * a * c) + ")");
  }
  if (!(k > 0.0)) {
    throw InvalidParameterError("sensor gain k must be > 0, got " + fmt(k));
  }
}

void RenderModel::validate() const {
  water.validate();
  camera.validate();
  if (!std::isfinite(noise_sigma) || noise_sigma < 0.0) {
    throw InvalidParameterError("noise_sigma must be >= 0, got " + fmt(noise_sigma));
  }
  if (!std::isfinite(max_altitude) || !(max_altitude > 0.0)) {
    throw InvalidParameterError("max_altitude must be > 0, got " + fmt(max_altitude));
  }
}

ParamVector natural_params(const RenderModel& m) {
  return {m.water.eta[0],  m.water.eta[1],  m.water.eta[2], m.water.beta[0], m.water.beta[1],
          m.water.beta[2], m.camera.a,      m.camera.b,     m.camera.c,      m.camera.k};
}

RenderModel with_natural_params(const RenderModel& base, const ParamVector& v) {
  RenderModel m = base;
  for (std::size_t c = 0; c < 3; ++c) {
    m.water.eta[c] = v[idx(Param::kEtaR) + c];
    m.water.beta[c] = v[idx(Param::kBetaR) + c];
  }
  m.camera.a = v[idx(Param::kA)];
  m.camera.b = v[idx(Param::kB)];
  m.camera.c = v[idx(Param::kC)];
  m.camera.k = v[idx(Param::kK)];
  return m;
}

ParamVector to_unconstrained(const RenderModel& m) {
  ParamVector u{};
  for (std::size_t c = 0; c < 3; ++c) {
    u[idx(Param::kEtaR) + c] = std::log(m.water.eta[c]);
    const double beta = std::clamp(m.water.beta[c], kOpenIntervalGuard, 1.0 - kOpenIntervalGuard);
    u[idx(Param::kBetaR) + c] = std::log(beta / (1.0 - beta));
  }
  const double a = m.camera.a;
  const double c = std::max(m.camera.c, kOpenIntervalGuard);
  u[idx(Param::kA)] = std::log(a);
  u[idx(Param::kC)] = std::log(c);
  const double bound = (1.0 - kVignetteMargin) * std::sqrt(3.0 * a * c);
  const double ratio = std::clamp(m.camera.b / bound, -1.0 + kOpenIntervalGuard,
                                  1.0 - kOpenIntervalGuard);
  u[idx(Param::kB)] = std::atanh(ratio);
  u[idx(Param::kK)] = std::log(m.camera.k);
  return u;
}

RenderModel from_unconstrained(const RenderModel& base, const ParamVector& u) {
  RenderModel m = base;
  for (std::size_t c = 0; c < 3; ++c) {
    m.water.eta[c] = std::exp(u[idx(Param::kEtaR) + c]);
    m.water.beta[c] = logistic(u[idx(Param::kBetaR) + c]);
  }
  m.camera.a = std::exp(u[idx(Param::kA)]);
  m.camera.c = std::exp(u[idx(Param::kC)]);
  m.camera.b = (1.0 - kVignetteMargin) * std::tanh(u[idx(Param::kB)]) *
               std::sqrt(3.0 * m.camera.a * m.camera.c);
  m.camera.k = std::exp(u[idx(Param::kK)]);
  return m;
}

ParamVector chain_to_unconstrained(const RenderModel& m, const ParamVector& g) {
  ParamVector out{};
  for (std::size_t c = 0; c < 3; ++c) {
    const double eta = m.water.eta[c];
    const double beta = m.water.beta[c];
    out[idx(Param::kEtaR) + c] = g[idx(Param::kEtaR) + c] * eta;
    out[idx(Param::kBetaR) + c] = g[idx(Param::kBetaR) + c] * beta * (1.0 - beta);
  }
  const double a = m.camera.a;
  const double b = m.camera.b;
  const double c = m.camera.c;
  const double gb = g[idx(Param::kB)];
  // b scales with sqrt(ac), so db/d(log a) = db/d(log c) = b/2.
  out[idx(Param::kA)] = g[idx(Param::kA)] * a + gb * 0.5 * b;
  out[idx(Param::kC)] = g[idx(Param::kC)] * c + gb * 0.5 * b;
  const double bound = (1.0 - kVignetteMargin) * std::sqrt(3.0 * a * c);
  const double t = b / bound;
  out[idx(Param::kB)] = gb * bound * (1.0 - t * t);
  out[idx(Param::kK)] = g[idx(Param::kK)] * m.camera.k;
  return out;
}

}  // namespace aquarender
