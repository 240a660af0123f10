#include "aquarender/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "aquarender/error.hpp"

namespace aquarender::fit {
namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void require_training_shape(const LinearImage& img, const char* what) {
  if (img.width() != Discriminator::kInputWidth || img.height() != Discriminator::kInputHeight) {
    throw ContractError(std::string(what) + " must be 64x48 (WxH), got " +
                        std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
}

void require_finite_loss(double loss, const char* what, const ParamVector& params) {
  if (std::isfinite(loss)) return;
  std::ostringstream os;
  os << what << " loss is not finite; generator parameters:";
  for (std::size_t i = 0; i < kParamCount; ++i) os << ' ' << param_name(i) << '=' << params[i];
  throw DivergenceError(os.str());
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidParameterError("batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !(generator_learning_rate >= 0.0)) {
    throw InvalidParameterError("learning rates must be >= 0");
  }
  if (epochs < 1) throw InvalidParameterError("epochs must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw InvalidParameterError("optimizer decay rates must lie in [0,1) and epsilon > 0");
  }
  if (!(holdout_fraction >= 0.0 && holdout_fraction <= 0.5)) {
    throw InvalidParameterError("holdout_fraction must lie in [0, 0.5]");
  }
}

AdamSettings TrainConfig::disc_settings() const {
  return {learning_rate, beta1, beta2, epsilon};
}

AdamSettings TrainConfig::gen_settings() const {
  return {generator_learning_rate, beta1, beta2, epsilon};
}

std::string TrainReport::to_csv() const {
  std::string out =
      "epoch,steps,disc_loss,gen_loss,disc_accuracy,real_accuracy,fake_accuracy";
  for (std::size_t i = 0; i < kParamCount; ++i) {
    out += ',';
    out += param_name(i);
  }
  out += '\n';
  char buf[64];
  for (const EpochRecord& e : epochs) {
    std::snprintf(buf, sizeof buf, "%d,%d", e.epoch, e.steps);
    out += buf;
    for (double v : {e.disc_loss, e.gen_loss, e.disc_accuracy, e.real_accuracy, e.fake_accuracy}) {
      std::snprintf(buf, sizeof buf, ",%.9g", v);
      out += buf;
    }
    for (double v : e.params) {
      std::snprintf(buf, sizeof buf, ",%.9g", v);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

double disc_loss(std::span<const LinearImage> reals, std::span<const LinearImage> fakes,
                 const Discriminator& d, std::span<double> grad) {
  if (reals.empty() || fakes.empty()) throw ContractError("disc_loss: empty batch");
  const double nr = static_cast<double>(reals.size());
  const double nf = static_cast<double>(fakes.size());
  Discriminator::Tape tape;
  double loss = 0.0;
  for (const LinearImage& x : reals) {
    const double z = d.logit(x, tape);
    loss += softplus(-z) / nr;
    if (!grad.empty()) d.backward(tape, -sigmoid(-z) / nr, grad);
  }
  for (const LinearImage& x : fakes) {
    const double z = d.logit(x, tape);
    loss += softplus(z) / nf;
    if (!grad.empty()) d.backward(tape, sigmoid(z) / nf, grad);
  }
  return loss;
}

double disc_update(std::span<const LinearImage> reals, std::span<const LinearImage> fakes,
                   Discriminator& d, const TrainConfig& cfg) {
  std::vector<double> grad(d.weight_count(), 0.0);
  const double loss = disc_loss(reals, fakes, d, grad);
  if (!std::isfinite(loss)) {
    throw DivergenceError("discriminator loss is not finite (batch of " +
                          std::to_string(reals.size()) + " real, " +
                          std::to_string(fakes.size()) + " synthetic)");
  }
  d.optimizer().step(d.weights(), grad, cfg.disc_settings());
  d.check_finite();
  return loss;
}

GeneratorObjective gen_objective(const RenderModel& model, std::span<const Scene> scenes,
                                 const Discriminator& d, physics::ZeroDepth zero) {
  if (scenes.empty()) throw ContractError("gen_objective: empty batch");
  const double n = static_cast<double>(scenes.size());
  GeneratorObjective obj;
  Discriminator::Tape tape;
  GradientImage input_grad;
  for (const Scene& s : scenes) {
    const physics::RenderGradients rg = physics::render_gradients(s.image, s.depth, model, zero);
    const double z = d.logit(rg.output, tape);
    obj.loss += softplus(-z) / n;
    d.backward(tape, -sigmoid(-z) / n, {}, &input_grad);
    const auto gin = input_grad.values();
    for (std::size_t i = 0; i < kParamCount; ++i) {
      const auto di = rg.d[i].values();
      double acc = 0.0;
      for (std::size_t j = 0; j < gin.size(); ++j) acc += gin[j] * di[j];
      obj.natural[i] += acc;
    }
  }
  return obj;
}

double gen_update(GeneratorState& state, std::span<const Scene> scenes, const Discriminator& d,
                  const TrainConfig& cfg) {
  const GeneratorObjective obj = gen_objective(state.model, scenes, d, cfg.zero_depth);
  require_finite_loss(obj.loss, "generator", natural_params(state.model));
  const ParamVector g = chain_to_unconstrained(state.model, obj.natural);
  ParamVector u = to_unconstrained(state.model);
  state.optimizer.step(u, g, cfg.gen_settings());
  for (double v : u) {
    if (!std::isfinite(v)) throw DivergenceError("generator parameter became non-finite");
  }
  state.model = from_unconstrained(state.model, u);
  state.model.validate();
  return obj.loss;
}

TrainResult train(const TrainConfig& cfg, std::span<const LinearImage> real_images,
                  std::span<const Scene> scenes, const RenderModel& initial) {
  cfg.validate();
  initial.validate();
  if (real_images.empty() || scenes.empty()) {
    throw ContractError("train: both the real-image set and the scene set must be non-empty");
  }
  for (const LinearImage& x : real_images) require_training_shape(x, "real image");
  for (const Scene& s : scenes) {
    require_training_shape(s.image, "scene image");
    require_same_shape(s.image, s.depth, "scene depth");
  }

  std::mt19937_64 rng(cfg.seed);
  auto split = [&](std::size_t n) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto hold = static_cast<std::size_t>(std::floor(cfg.holdout_fraction * n));
    std::vector<std::size_t> held(order.begin(), order.begin() + hold);
    std::vector<std::size_t> kept(order.begin() + hold, order.end());
    return std::pair{kept, held};
  };
  auto [real_train, real_held] = split(real_images.size());
  auto [scene_train, scene_held] = split(scenes.size());
  if (real_held.empty()) real_held = real_train;
  if (scene_held.empty()) scene_held = scene_train;

  const std::size_t pairs = std::min(real_train.size(), scene_train.size());
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps_per_epoch = pairs / batch;

  GeneratorState gen{initial, Adam(kParamCount)};
  Discriminator disc = Discriminator::initialized(mix_seed(cfg.seed, 0xd15c));
  TrainReport report;

  std::vector<LinearImage> real_batch;
  std::vector<LinearImage> fake_batch;
  std::vector<Scene> scene_batch;
  std::uint64_t step_counter = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(real_train.begin(), real_train.end(), rng);
    std::shuffle(scene_train.begin(), scene_train.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch + 1;

    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step_counter) {
      real_batch.clear();
      fake_batch.clear();
      scene_batch.clear();
      for (std::size_t i = 0; i < batch; ++i) {
        real_batch.push_back(real_images[real_train[s * batch + i]]);
        const Scene& sc = scenes[scene_train[s * batch + i]];
        scene_batch.push_back(sc);
        fake_batch.push_back(physics::render(sc.image, sc.depth, gen.model,
                                             mix_seed(cfg.seed, step_counter * batch + i),
                                             cfg.zero_depth));
      }
      rec.disc_loss += disc_update(real_batch, fake_batch, disc, cfg);
      rec.gen_loss += gen_update(gen, scene_batch, disc, cfg);
      ++rec.steps;
    }
    if (rec.steps > 0) {
      rec.disc_loss /= rec.steps;
      rec.gen_loss /= rec.steps;
    }

    std::size_t real_hits = 0;
    for (std::size_t i : real_held) real_hits += disc.logit(real_images[i]) > 0.0 ? 1 : 0;
    std::size_t fake_hits = 0;
    for (std::size_t n = 0; n < scene_held.size(); ++n) {
      const Scene& sc = scenes[scene_held[n]];
      const LinearImage fake = physics::render(sc.image, sc.depth, gen.model,
                                               mix_seed(cfg.seed ^ 0x4e1d, n), cfg.zero_depth);
      fake_hits += disc.logit(fake) <= 0.0 ? 1 : 0;
    }
    rec.real_accuracy = static_cast<double>(real_hits) / real_held.size();
    rec.fake_accuracy = static_cast<double>(fake_hits) / scene_held.size();
    rec.disc_accuracy =
        static_cast<double>(real_hits + fake_hits) / (real_held.size() + scene_held.size());
    rec.params = natural_params(gen.model);
    report.epochs.push_back(rec);
  }

  return {gen.model, std::move(disc), std::move(report)};
}

}  // namespace aquarender::fit
