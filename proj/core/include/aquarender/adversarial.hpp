#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aquarender/adam.hpp"
#include "aquarender/discriminator.hpp"
#include "aquarender/params.hpp"
#include "aquarender/physics.hpp"
#include "aquarender/raster.hpp"

namespace aquarender::fit {

// In-air RGB-D sample fed to the generator.
struct Scene {
  LinearImage image;
  DepthMap depth;
};

struct TrainConfig {
  int batch_size = 64;
  // Discriminator step size.
  double learning_rate = 2e-4;
  // Step size for the ten physical parameters, in unconstrained coordinates.
  double generator_learning_rate = 1e-2;
  int epochs = 10;
  std::uint64_t seed = 0;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Fraction of each dataset held out for the per-epoch accuracy estimate.
  double holdout_fraction = 0.1;
  physics::ZeroDepth zero_depth = physics::ZeroDepth::kRange;

  void validate() const;
  AdamSettings disc_settings() const;
  AdamSettings gen_settings() const;
};

struct EpochRecord {
  int epoch = 0;
  int steps = 0;
  double disc_loss = 0.0;  // mean over the epoch's steps
  double gen_loss = 0.0;
  double real_accuracy = 0.0;  // held-out reals classified real
  double fake_accuracy = 0.0;  // held-out renders classified synthetic
  double disc_accuracy = 0.0;  // over both held-out sets
  ParamVector params{};        // natural domain, end of epoch
};

struct TrainReport {
  std::vector<EpochRecord> epochs;

  // One header row, then one row per epoch.
  std::string to_csv() const;
};

// Generator parameters plus their optimizer moments.
struct GeneratorState {
  RenderModel model;
  Adam optimizer{kParamCount};
};

// -[mean log D(real) + mean log(1 - D(fake))]; when `grad` is non-empty it
// receives d(loss)/d(weights).
double disc_loss(std::span<const LinearImage> reals, std::span<const LinearImage> fakes,
                 const Discriminator& d, std::span<double> grad = {});

// One optimizer step on disc_loss. Returns the pre-step loss.
double disc_update(std::span<const LinearImage> reals, std::span<const LinearImage> fakes,
                   Discriminator& d, const TrainConfig& cfg);

struct GeneratorObjective {
  double loss = 0.0;      // -mean log D(render(scene))
  ParamVector natural{};  // d(loss)/d(natural params)
};

// Generator loss and its gradient through the noiseless render.
GeneratorObjective gen_objective(const RenderModel& model, std::span<const Scene> scenes,
                                 const Discriminator& d,
                                 physics::ZeroDepth zero = physics::ZeroDepth::kRange);

// One optimizer step ascending mean log D(G). Updates state.model in the
// unconstrained coordinates. Returns the pre-step loss.
double gen_update(GeneratorState& state, std::span<const Scene> scenes, const Discriminator& d,
                  const TrainConfig& cfg);

struct TrainResult {
  RenderModel model;
  Discriminator discriminator;
  TrainReport report;
};

// Alternates disc_update and gen_update over shuffled batches. All images must
// be 48x64.
TrainResult train(const TrainConfig& cfg, std::span<const LinearImage> real_images,
                  std::span<const Scene> scenes, const RenderModel& initial);

}  // namespace aquarender::fit
