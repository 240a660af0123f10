#include <doctest.h>

#include <cmath>
#include <random>

#include "aquarender/error.hpp"
#include "aquarender/physics.hpp"
#include "aquarender/synthetic.hpp"
#include "support.hpp"

using namespace aquarender;
using namespace aquarender::physics;
using aquarender::testing::random_depth;
using aquarender::testing::random_image;

namespace {

LinearImage filled(int w, int h, double r, double g, double b) {
  LinearImage img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = r;
      img.at(x, y, 1) = g;
      img.at(x, y, 2) = b;
    }
  }
  return img;
}

RenderModel near_identity() {
  RenderModel m;
  m.water.eta = {1e-12, 1e-12, 1e-12};
  m.water.beta = {0.0, 0.0, 0.0};
  m.camera = {1e-12, 0.0, 1e-12, 1.0};
  return m;
}

// Camera with V == 1 to within rounding.
CameraParams flat_camera() { return {1e-150, 0.0, 1e-150, 1.0}; }

}  // namespace

TEST_CASE("attenuate matches the scalar oracle") {
  LinearImage img = filled(1, 1, 0.8, 0.5, 0.5);
  DepthMap depth(1, 1, 2.0);
  WaterParams w;
  w.eta = {0.35, 0.2, 0.1};
  const LinearImage out = attenuate(img, depth, w);
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.39726824303312763).epsilon(1e-14));
}

TEST_CASE("attenuate with zero range or vanishing eta is the identity") {
  std::mt19937_64 rng(1);
  const LinearImage img = random_image(rng, 5, 4);
  WaterParams w;
  CHECK(attenuate(img, DepthMap(5, 4, 0.0), w) == img);

  w.eta = {1e-12, 1e-12, 1e-12};
  const LinearImage out = attenuate(img, random_depth(rng, 5, 4), w);
  CHECK(aquarender::testing::max_abs_diff(out.values(), img.values()) < 1e-9);
}

TEST_CASE("attenuate never brightens") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearImage img = random_image(rng, 6, 5, 0.0, 1.0);
    const DepthMap depth = random_depth(rng, 6, 5, 0.0, 10.0);
    const RenderModel m = synthetic::random_model(rng);
    const LinearImage out = attenuate(img, depth, m.water);
    for (std::size_t i = 0; i < out.values().size(); ++i) {
      CHECK(out.values()[i] <= img.values()[i]);
    }
  }
}

TEST_CASE("attenuate rejects bad input") {
  LinearImage img(3, 2);
  WaterParams w;
  CHECK_THROWS_AS(attenuate(img, DepthMap(2, 3), w), ContractError);
  w.eta[1] = 0.0;
  CHECK_THROWS_AS(attenuate(img, DepthMap(3, 2), w), InvalidParameterError);
}

TEST_CASE("missing depth passes through and is flagged") {
  LinearImage img = filled(2, 1, 0.6, 0.6, 0.6);
  DepthMap depth(2, 1);
  depth.at(1, 0) = 1.0;
  PixelMask missing;
  const LinearImage out = attenuate(img, depth, WaterParams{}, ZeroDepth::kMissing, &missing);
  CHECK(missing.at(0, 0) == 1);
  CHECK(missing.at(1, 0) == 0);
  CHECK(out.at(0, 0, 0) == 0.6);
  CHECK(out.at(1, 0, 0) < 0.6);
}

TEST_CASE("fill_missing_depth copies the nearest valid value") {
  DepthMap depth(4, 1);
  depth.at(3, 0) = 2.5;
  const DepthMap filled_depth = fill_missing_depth(depth);
  for (int x = 0; x < 4; ++x) CHECK(filled_depth.at(x, 0) == 2.5);
  CHECK_THROWS_AS(fill_missing_depth(DepthMap(3, 3)), ContractError);
}

TEST_CASE("backscatter mask examples") {
  WaterParams w;
  w.eta = {0.5, 0.2, 0.1};
  w.beta = {0.2, 0.1, 0.3};
  const LinearImage at_zero = backscatter_mask(DepthMap(2, 2, 0.0), w);
  for (double v : at_zero.values()) CHECK(v == 0.0);

  const LinearImage far = backscatter_mask(DepthMap(1, 1, 20.0), w);
  CHECK(far.at(0, 0, 0) == doctest::Approx(0.1999909200140475).epsilon(1e-14));

  w.beta = {0.0, 0.0, 0.0};
  const LinearImage none = backscatter_mask(DepthMap(2, 2, 7.0), w);
  for (double v : none.values()) CHECK(v == 0.0);
}

TEST_CASE("backscatter is bounded and increasing in range") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const RenderModel m = synthetic::random_model(rng);
    DepthMap depth(50, 1);
    for (int x = 0; x < 50; ++x) depth.at(x, 0) = 0.01 + 0.2 * x;
    const LinearImage mask = backscatter_mask(depth, m.water);
    for (int c = 0; c < 3; ++c) {
      for (int x = 0; x < 50; ++x) {
        CHECK(mask.at(x, 0, c) >= 0.0);
        CHECK(mask.at(x, 0, c) < m.water.beta[c]);
        if (x > 0) CHECK(mask.at(x, 0, c) > mask.at(x - 1, 0, c));
      }
    }
  }
}

TEST_CASE("compose_scatter adds, clamps and is seeded") {
  std::mt19937_64 rng(4);
  const LinearImage g1 = random_image(rng, 4, 3);
  CHECK(compose_scatter(g1, LinearImage(4, 3), 0.0, 9) == g1);

  const LinearImage hi = compose_scatter(filled(1, 1, 0.9, 0.9, 0.9), filled(1, 1, 0.3, 0.3, 0.3),
                                         0.0, 0);
  CHECK(hi.at(0, 0, 0) == 1.0);

  const LinearImage mask = random_image(rng, 4, 3, 0.0, 0.1);
  const LinearImage a = compose_scatter(g1, mask, 0.01, 42);
  const LinearImage b = compose_scatter(g1, mask, 0.01, 42);
  const LinearImage c = compose_scatter(g1, mask, 0.01, 43);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK_THROWS_AS(compose_scatter(g1, mask, -1.0, 0), InvalidParameterError);
  CHECK_THROWS_AS(compose_scatter(g1, LinearImage(3, 3), 0.0, 0), ContractError);
}

TEST_CASE("vignette polynomial examples") {
  const CameraParams cam{0.1, 0.01, 0.001, 1.0};
  CHECK(vignette_factor(1.0, cam) == doctest::Approx(1.111).epsilon(1e-15));
  CHECK(vignette_factor(0.0, cam) == 1.0);

  const ScalarMap v = vignette_mask(5, 3, cam);
  CHECK(v.at(2, 1) == 1.0);
  CHECK(normalized_radius(0, 0, 5, 3) == doctest::Approx(1.0));
  CHECK(normalized_radius(4, 2, 5, 3) == doctest::Approx(1.0));
  CHECK(v.at(0, 0) == doctest::Approx(1.111));

  const CameraParams bad{0.1, 0.02, 0.001, 1.0};
  try {
    vignette_mask(4, 4, bad);
    FAIL("expected rejection");
  } catch (const InvalidParameterError& e) {
    CHECK(std::string(e.what()).find("4b^2 - 12ac < 0") != std::string::npos);
  }
  CHECK_THROWS_AS(vignette_mask(4, 4, CameraParams{-0.1, 0.0, 0.0, 1.0}), InvalidParameterError);
  CHECK_THROWS_AS(vignette_mask(4, 4, CameraParams{0.1, 0.0, -0.1, 1.0}), InvalidParameterError);
}

TEST_CASE("valid vignette is increasing and at least one") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const CameraParams cam = synthetic::random_model(rng).camera;
    double prev = vignette_factor(0.0, cam);
    CHECK(prev == 1.0);
    for (int i = 1; i <= 1000; ++i) {
      const double v = vignette_factor(i / 1000.0, cam);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("apply_vignette and sensor_gain examples") {
  LinearImage g2 = filled(1, 1, 0.5, 0.5, 0.5);
  CHECK(apply_vignette(g2, ScalarMap(1, 1, 1.0)) == g2);
  CHECK(apply_vignette(g2, ScalarMap(1, 1, 1.25)).at(0, 0, 0) == doctest::Approx(0.4));
  CHECK_THROWS_AS(apply_vignette(g2, ScalarMap(1, 1, 0.5)), ContractError);

  const ScalarMap v = vignette_mask(9, 7, CameraParams{0.2, 0.0, 0.01, 1.0});
  const LinearImage out = apply_vignette(filled(9, 7, 0.5, 0.5, 0.5), v);
  CHECK(out.at(0, 0, 1) < out.at(4, 3, 1));

  const LinearImage g3 = filled(1, 1, 0.3, 0.7, 0.2);
  CHECK(sensor_gain(g3, 1.0) == g3);
  const LinearImage doubled = sensor_gain(g3, 2.0);
  CHECK(doubled.at(0, 0, 0) == doctest::Approx(0.6));
  CHECK(doubled.at(0, 0, 1) == 1.0);
  CHECK_THROWS_AS(sensor_gain(g3, 0.0), InvalidParameterError);
}

TEST_CASE("render matches the hand-evaluated gray pixel") {
  RenderModel m;
  m.water.eta = {0.40, 0.20, 0.10};
  m.water.beta = {0.05, 0.10, 0.15};
  m.camera = flat_camera();
  const LinearImage out = render(filled(1, 1, 0.5, 0.5, 0.5), DepthMap(1, 1, 2.0), m, 0);
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.2521980338527497).epsilon(1e-13));
  CHECK(out.at(0, 0, 1) == doctest::Approx(0.36812801841425574).epsilon(1e-13));
  CHECK(out.at(0, 0, 2) == doctest::Approx(0.43655576357729364).epsilon(1e-13));
}

TEST_CASE("near-identity model leaves the image unchanged") {
  std::mt19937_64 rng(6);
  const LinearImage img = random_image(rng, 8, 6, 0.0, 1.0);
  const LinearImage out = render(img, random_depth(rng, 8, 6), near_identity(), 0);
  CHECK(aquarender::testing::max_abs_diff(out.values(), img.values()) < 1e-6);
}

TEST_CASE("render equals the manual stage chain bit for bit") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearImage img = random_image(rng, 7, 5, 0.0, 1.0);
    const DepthMap depth = random_depth(rng, 7, 5, 0.0, 4.0);
    RenderModel m = synthetic::random_model(rng);
    const LinearImage g1 = attenuate(img, depth, m.water);
    const LinearImage g2 = compose_scatter(g1, backscatter_mask(depth, m.water), 0.0, 0);
    const LinearImage g3 = apply_vignette(g2, vignette_mask(7, 5, m.camera));
    CHECK(render(img, depth, m, 0) == sensor_gain(g3, m.camera.k));

    m.noise_sigma = 0.02;
    CHECK(render(img, depth, m, 11) == render(img, depth, m, 11));
  }
}

TEST_CASE("render with missing depth fills holes first") {
  std::mt19937_64 rng(8);
  const LinearImage img = random_image(rng, 4, 4);
  DepthMap depth = random_depth(rng, 4, 4);
  depth.at(1, 2) = 0.0;
  const RenderModel m = synthetic::random_model(rng);
  CHECK(render(img, depth, m, 0, ZeroDepth::kMissing) ==
        render(img, fill_missing_depth(depth), m, 0));
}

TEST_CASE("render_gradients hand-computed entries") {
  RenderModel m;
  m.water.eta = {0.40, 0.20, 0.10};
  m.water.beta = {0.05, 0.10, 0.15};
  m.camera = flat_camera();
  const RenderGradients g = render_gradients(filled(1, 1, 0.5, 0.5, 0.5), DepthMap(1, 1, 2.0), m);
  CHECK(g.d[idx(Param::kEtaR)].at(0, 0, 0) == doctest::Approx(-0.4043960677054994).epsilon(1e-12));
  CHECK(g.d[idx(Param::kEtaR)].at(0, 0, 1) == 0.0);
  CHECK(g.d[idx(Param::kK)].at(0, 0, 2) == doctest::Approx(g.output.at(0, 0, 2)));
}

TEST_CASE("render_gradients match central finite differences") {
  std::mt19937_64 rng(9);
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const LinearImage img = random_image(rng, 9, 7, 0.0, 1.0);
    const DepthMap depth = random_depth(rng, 9, 7, 0.0, 3.0);
    const RenderModel m = synthetic::random_model(rng);
    const RenderGradients g = render_gradients(img, depth, m);
    CHECK(g.output == render(img, depth, m, 0));

    const ParamVector theta = natural_params(m);
    for (std::size_t p = 0; p < kParamCount; ++p) {
      ParamVector up = theta;
      ParamVector down = theta;
      up[p] += h;
      down[p] -= h;
      const LinearImage plus = render(img, depth, with_natural_params(m, up), 0);
      const LinearImage minus = render(img, depth, with_natural_params(m, down), 0);
      for (std::size_t i = 0; i < plus.values().size(); ++i) {
        const double out = g.output.values()[i];
        if (out < 1e-3 || out > 1.0 - 1e-3) continue;
        const double fd = (plus.values()[i] - minus.values()[i]) / (2 * h);
        const double an = g.d[p].values()[i];
        INFO("param ", param_name(p), " sample ", i);
        CHECK(aquarender::testing::close_rel(an, fd, 1e-4, 1e-7));
      }
    }
  }
}

TEST_CASE("gradients are zero where the output clamps") {
  RenderModel m;
  m.camera.k = 5.0;
  const RenderGradients g = render_gradients(filled(2, 2, 0.9, 0.9, 0.9), DepthMap(2, 2, 0.5), m);
  for (const auto& d : g.d) {
    for (double v : d.values()) CHECK(v == 0.0);
  }
}

TEST_CASE("normalize_depth examples") {
  DepthMap d(4, 1);
  d.at(0, 0) = 1.5;
  d.at(1, 0) = 0.75;
  d.at(2, 0) = 3.0;
  d.at(3, 0) = 0.0;
  const DepthMap n = normalize_depth(d, 1.5);
  CHECK(n.at(0, 0) == 1.0);
  CHECK(n.at(1, 0) == 0.5);
  CHECK(n.at(2, 0) == 1.0);
  CHECK(n.at(3, 0) == 0.0);
  CHECK_THROWS_AS(normalize_depth(d, 0.0), InvalidParameterError);
}

TEST_CASE("raster rejects empty dimensions") {
  CHECK_THROWS_AS(LinearImage(0, 3), ContractError);
  CHECK_THROWS_AS(DepthMap(3, -1), ContractError);
}
