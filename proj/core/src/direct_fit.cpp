#include "aquarender/direct_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "aquarender/error.hpp"

namespace aquarender::fit {
namespace {

using Matrix = Eigen::Matrix<double, kParamCount, kParamCount>;
using Vector = Eigen::Matrix<double, kParamCount, 1>;

struct NormalEquations {
  Matrix jtj = Matrix::Zero();  // natural domain
  Vector jtr = Vector::Zero();
  double cost = 0.0;
  std::size_t samples = 0;
};

bool usable(double observed) { return observed > 0.0 && observed < 1.0; }

NormalEquations accumulate(std::span<const Pair> pairs, const RenderModel& model,
                           physics::ZeroDepth zero, bool with_jacobian) {
  NormalEquations ne;
  for (const Pair& pair : pairs) {
    const PixelMask holes = physics::missing_depth_mask(pair.depth, zero);
    // A map with no valid range contributes nothing (and cannot be hole-filled).
    if (std::all_of(holes.values().begin(), holes.values().end(), [](auto h) { return h != 0; })) {
      continue;
    }
    if (!with_jacobian) {
      const LinearImage out = physics::render(pair.in_air, pair.depth, model, 0, zero);
      for (std::size_t p = 0; p < out.pixel_count(); ++p) {
        if (holes(p)) continue;
        for (std::size_t c = 0; c < 3; ++c) {
          if (!usable(pair.underwater(p, c))) continue;
          const double r = out(p, c) - pair.underwater(p, c);
          ne.cost += r * r;
          ++ne.samples;
        }
      }
      continue;
    }
    const physics::RenderGradients rg =
        physics::render_gradients(pair.in_air, pair.depth, model, zero);
    Vector row;
    for (std::size_t p = 0; p < rg.output.pixel_count(); ++p) {
      if (holes(p)) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        if (!usable(pair.underwater(p, c))) continue;
        const double r = rg.output(p, c) - pair.underwater(p, c);
        for (std::size_t i = 0; i < kParamCount; ++i) row[i] = rg.d[i](p, c);
        ne.jtj.selfadjointView<Eigen::Lower>().rankUpdate(row);
        ne.jtr += row * r;
        ne.cost += r * r;
        ++ne.samples;
      }
    }
  }
  ne.jtj = ne.jtj.selfadjointView<Eigen::Lower>();
  return ne;
}

// Jacobian of the natural parameters w.r.t. the unconstrained ones.
Matrix reparam_jacobian(const RenderModel& model) {
  Matrix t_transpose;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    ParamVector e{};
    e[i] = 1.0;
    const ParamVector col = chain_to_unconstrained(model, e);
    for (std::size_t j = 0; j < kParamCount; ++j) t_transpose(j, i) = col[j];
  }
  return t_transpose.transpose();
}

}  // namespace

DirectFitResult fit_direct(std::span<const Pair> pairs, const DirectFitOptions& options) {
  if (pairs.empty()) throw ContractError("fit_direct: at least one pair is required");
  for (const Pair& p : pairs) {
    require_same_shape(p.in_air, p.depth, "fit_direct (depth)");
    require_same_shape(p.in_air, p.underwater, "fit_direct (underwater)");
  }
  options.initial.validate();
  const physics::ZeroDepth zero = options.zero_depth;

  RenderModel model = options.initial;
  NormalEquations ne = accumulate(pairs, model, zero, true);
  if (ne.samples < options.min_samples) {
    throw UnderConstrainedError("fit_direct: only " + std::to_string(ne.samples) +
                                " unsaturated samples available, need " +
                                std::to_string(options.min_samples));
  }
  const double max_diag = ne.jtj.diagonal().maxCoeff();
  std::string unobservable;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (!(ne.jtj(i, i) > 1e-12 * max_diag)) {
      if (!unobservable.empty()) unobservable += ", ";
      unobservable += param_name(i);
    }
  }
  if (!unobservable.empty()) {
    throw UnderConstrainedError("fit_direct: data carries no information about " + unobservable);
  }

  ParamVector u = to_unconstrained(model);
  double lambda = 1e-3;  // relative to diag(J^T J)
  int iterations = 0;
  bool done = false;
  while (!done && iterations < options.max_iterations) {
    ++iterations;
    const Matrix t = reparam_jacobian(model);
    const Matrix a = t.transpose() * ne.jtj * t;
    const Vector g = t.transpose() * ne.jtr;
    if (ne.cost == 0.0 || g.norm() == 0.0) break;

    bool accepted = false;
    for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
      Matrix damped = a;
      damped.diagonal() += lambda * a.diagonal().cwiseMax(1e-300);
      const Vector delta = damped.ldlt().solve(-g);
      ParamVector trial_u = u;
      for (std::size_t i = 0; i < kParamCount; ++i) trial_u[i] += delta[i];
      const RenderModel trial = from_unconstrained(model, trial_u);
      const NormalEquations trial_ne = accumulate(pairs, trial, zero, false);
      if (std::isfinite(trial_ne.cost) && trial_ne.cost < ne.cost) {
        const double gain = (ne.cost - trial_ne.cost) / ne.cost;
        u = trial_u;
        model = trial;
        lambda = std::max(lambda / 3.0, 1e-15);
        ne = accumulate(pairs, model, zero, true);
        accepted = true;
        done = gain < options.relative_tolerance;
      } else {
        lambda *= 4.0;
      }
    }
    if (!accepted) break;
  }

  DirectFitResult result;
  result.model = model;
  result.samples = ne.samples;
  result.rms_residual = std::sqrt(ne.cost / static_cast<double>(ne.samples));
  result.iterations = iterations;
  return result;
}

}  // namespace aquarender::fit
