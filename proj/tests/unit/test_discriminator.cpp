#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aquarender/adam.hpp"
#include "aquarender/adversarial.hpp"
#include "aquarender/discriminator.hpp"
#include "aquarender/error.hpp"
#include "support.hpp"

using namespace aquarender;
using aquarender::testing::random_image;

namespace {

constexpr int kW = Discriminator::kInputWidth;
constexpr int kH = Discriminator::kInputHeight;

// Flat offsets of the parameter blocks, in storage order.
struct Layout {
  std::size_t conv_w[4];
  std::size_t conv_b[4];
  std::size_t dense_w;
  std::size_t dense_b;
};

Layout layout() {
  Layout l{};
  std::size_t off = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto in_c = Discriminator::kChannels[i];
    const auto out_c = Discriminator::kChannels[i + 1];
    l.conv_w[i] = off;
    off += static_cast<std::size_t>(in_c * out_c * 25);
    l.conv_b[i] = off;
    off += static_cast<std::size_t>(out_c);
  }
  l.dense_w = off;
  l.dense_b = off + 64 * 3 * 4;
  return l;
}

}  // namespace

TEST_CASE("weight layout has the expected size") {
  const Layout l = layout();
  CHECK(Discriminator().weight_count() == l.dense_b + 1);
  CHECK(Discriminator().weight_count() == 68689);
}

TEST_CASE("zero network outputs one half") {
  std::mt19937_64 rng(31);
  const Discriminator d;
  CHECK(d.forward(random_image(rng, kW, kH)) == 0.5);
  CHECK(d.forward(LinearImage(kW, kH)) == 0.5);
}

TEST_CASE("forward is deterministic and strictly inside (0,1)") {
  std::mt19937_64 rng(32);
  const Discriminator d = Discriminator::initialized(5);
  const LinearImage img = random_image(rng, kW, kH);
  CHECK(d.forward(img) == d.forward(img));
  CHECK(d.forward(img) > 0.0);
  CHECK(d.forward(img) < 1.0);
  CHECK(Discriminator::initialized(5).weights()[100] == d.weights()[100]);
}

TEST_CASE("wrong input shape is rejected") {
  CHECK_THROWS_AS(Discriminator().logit(LinearImage(48, 64)), ContractError);
}

TEST_CASE("single-path network reduces to a scalar chain") {
  // Only the centre tap of channel 0 in every layer is live, so dense input
  // (c=0, y=1, x=2) sees input red pixel (32, 16) through four LReLUs.
  const Layout l = layout();
  Discriminator d;
  auto w = d.weights();
  const double conv_w[4] = {0.8, -1.5, 2.0, 0.7};
  const double conv_b[4] = {-0.1, 0.2, 0.05, -0.3};
  for (std::size_t i = 0; i < 4; ++i) {
    w[l.conv_w[i] + 12] = conv_w[i];
    w[l.conv_b[i]] = conv_b[i];
  }
  w[l.dense_w + 1 * 4 + 2] = 1.3;
  w[l.dense_b] = 0.25;

  LinearImage img(kW, kH);
  img.at(32, 16, 0) = 0.6;
  // 0.8*0.6-0.1 = 0.38; -1.5*0.38+0.2 = -0.37 -> -0.074; 2*-0.074+0.05 = -0.098
  // -> -0.0196; 0.7*-0.0196-0.3 = -0.31372 -> -0.062744; 1.3*-0.062744+0.25.
  CHECK(d.logit(img) == doctest::Approx(0.1684328).epsilon(1e-12));
}

TEST_CASE("loss gradient matches finite differences") {
  std::mt19937_64 rng(33);
  const Layout l = layout();
  const Discriminator base = Discriminator::initialized(7);
  const std::vector<LinearImage> reals = {random_image(rng, kW, kH)};
  const std::vector<LinearImage> fakes = {random_image(rng, kW, kH)};

  std::vector<double> grad(base.weight_count(), 0.0);
  fit::disc_loss(reals, fakes, base, grad);

  std::vector<std::size_t> probe = {l.dense_b, l.dense_w, l.dense_w + 700, l.conv_b[3], l.conv_b[0]};
  std::uniform_int_distribution<std::size_t> pick(0, base.weight_count() - 1);
  for (int i = 0; i < 40; ++i) probe.push_back(pick(rng));

  const double h = 1e-5;
  for (std::size_t k : probe) {
    Discriminator up = base;
    Discriminator down = base;
    up.weights()[k] += h;
    down.weights()[k] -= h;
    const double fd = (fit::disc_loss(reals, fakes, up) - fit::disc_loss(reals, fakes, down)) / (2 * h);
    INFO("weight ", k);
    CHECK(aquarender::testing::close_rel(grad[k], fd, 1e-3, 1e-8));
  }
}

TEST_CASE("input gradient matches finite differences") {
  std::mt19937_64 rng(34);
  const Discriminator d = Discriminator::initialized(8);
  const LinearImage img = random_image(rng, kW, kH);
  Discriminator::Tape tape;
  d.logit(img, tape);
  GradientImage g;
  d.backward(tape, 1.0, {}, &g);

  std::uniform_int_distribution<std::size_t> pick(0, img.values().size() - 1);
  const double h = 1e-5;
  for (int i = 0; i < 40; ++i) {
    const std::size_t k = pick(rng);
    LinearImage up = img;
    LinearImage down = img;
    up.values()[k] += h;
    down.values()[k] -= h;
    const double fd = (d.logit(up) - d.logit(down)) / (2 * h);
    CHECK(aquarender::testing::close_rel(g.values()[k], fd, 1e-3, 1e-9));
  }
}

TEST_CASE("identical real and fake batches give at least 2 log 2") {
  std::mt19937_64 rng(35);
  const std::vector<LinearImage> batch = {random_image(rng, kW, kH), random_image(rng, kW, kH)};
  CHECK(fit::disc_loss(batch, batch, Discriminator()) == doctest::Approx(2 * std::log(2.0)));
  CHECK(fit::disc_loss(batch, batch, Discriminator::initialized(3)) >= 2 * std::log(2.0) - 1e-12);
}

TEST_CASE("zero learning rate leaves weights unchanged") {
  std::mt19937_64 rng(36);
  const std::vector<LinearImage> reals = {random_image(rng, kW, kH)};
  const std::vector<LinearImage> fakes = {random_image(rng, kW, kH)};
  Discriminator d = Discriminator::initialized(9);
  const std::vector<double> before(d.weights().begin(), d.weights().end());
  fit::TrainConfig cfg;
  cfg.learning_rate = 0.0;
  fit::disc_update(reals, fakes, d, cfg);
  CHECK(std::equal(before.begin(), before.end(), d.weights().begin()));
}

TEST_CASE("an update lowers the loss on its batch") {
  std::mt19937_64 rng(37);
  const std::vector<LinearImage> reals = {random_image(rng, kW, kH, 0.4, 0.9)};
  const std::vector<LinearImage> fakes = {random_image(rng, kW, kH, 0.0, 0.5)};
  Discriminator d = Discriminator::initialized(10);
  fit::TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  const double before = fit::disc_update(reals, fakes, d, cfg);
  CHECK(fit::disc_loss(reals, fakes, d) < before);
}

TEST_CASE("non-finite weights raise a divergence error") {
  Discriminator d;
  d.weights()[0] = std::nan("");
  CHECK_THROWS_AS(d.check_finite(), DivergenceError);
}

TEST_CASE("adam step follows the bias-corrected formula") {
  Adam opt(2);
  std::vector<double> p = {1.0, -2.0};
  const std::vector<double> g = {0.5, -4.0};
  opt.step(p, g, {0.1, 0.9, 0.999, 1e-8});
  // First step: mhat = g, vhat = g^2, so each parameter moves by lr * sign(g).
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-7));
  CHECK(p[1] == doctest::Approx(-1.9).epsilon(1e-7));
  CHECK(opt.steps() == 1);
  CHECK_THROWS_AS(opt.step(p, std::vector<double>(3), {}), ContractError);
}
