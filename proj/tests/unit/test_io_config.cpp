#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "aquarender/checkpoint.hpp"
#include "aquarender/config.hpp"
#include "aquarender/error.hpp"
#include "aquarender/io.hpp"
#include "aquarender/manifest.hpp"
#include "aquarender/synthetic.hpp"
#include "support.hpp"
#include "temp_dir.hpp"

using namespace aquarender;
using namespace aquarender::pipeline;
namespace fs = std::filesystem;

TEST_CASE("png color round trip stays within half a code") {
  aquarender::testing::TempDir dir("io_color");
  std::mt19937_64 rng(81);
  const LinearImage img = aquarender::testing::random_image(rng, 17, 11);
  io::save_image(img, dir / "a.png");
  const LinearImage back = io::load_image(dir / "a.png");
  REQUIRE(back.same_shape(img));
  CHECK(aquarender::testing::max_abs_diff(back.values(), img.values()) <= 1.0 / 510 + 1e-12);
}

TEST_CASE("depth png stores range over scale") {
  aquarender::testing::TempDir dir("io_depth");
  DepthMap d(3, 2, 1.5);
  d.at(0, 0) = 0.0;
  d.at(1, 0) = 100.0;
  io::save_depth(d, dir / "d.png", 0.001);
  const DepthMap back = io::load_depth(dir / "d.png", 0.001);
  CHECK(back.at(2, 1) == doctest::Approx(1.5));
  CHECK(back.at(0, 0) == 0.0);
  CHECK(back.at(1, 0) == doctest::Approx(65.535));
}

TEST_CASE("missing files name the path") {
  try {
    io::load_image("/nonexistent/dir/x.png");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/dir/x.png") != std::string::npos);
  }
  CHECK_THROWS_AS(io::load_depth("/nonexistent/d.png", 0.001), DataError);
}

TEST_CASE("resampling") {
  const LinearImage flat(40, 30, 0.3);
  const LinearImage small = io::resample(flat, 20, 15);
  CHECK(small.width() == 20);
  for (double v : small.values()) CHECK(v == doctest::Approx(0.3));

  DepthMap d(4, 2, 2.0);
  d.at(0, 0) = 0.0;
  d.at(0, 1) = 0.0;
  d.at(1, 0) = 0.0;
  d.at(1, 1) = 0.0;
  const DepthMap r = io::resample_depth(d, 2, 1);
  CHECK(r.at(0, 0) == 0.0);
  CHECK(r.at(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("config parsing") {
  const RunConfig cfg = RunConfig::parse("# comment\nseed = 7\n\nname = a b  # trailing\nflag = yes\n");
  CHECK(cfg.seed() == 7);
  CHECK(cfg.get_string("name") == "a b");
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_int("missing", 4) == 4);
  CHECK_THROWS_AS(RunConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(cfg.get_double("name", 0.0), ConfigError);

  RunConfig o = cfg;
  o.set_override("seed=9");
  CHECK(o.seed() == 9);
  CHECK_THROWS_AS(o.set_override("novalue"), ConfigError);

  const std::string_view allowed[] = {"seed", "name"};
  try {
    cfg.require_known(allowed);
    FAIL("expected an unknown-key error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("flag") != std::string::npos);
  }
}

TEST_CASE("config paths resolve against the file directory") {
  aquarender::testing::TempDir dir("config_paths");
  aquarender::testing::write_text(dir / "run.cfg", "out = results\nmodel = m.ckpt\n");
  const RunConfig cfg = RunConfig::load(dir / "run.cfg");
  CHECK(cfg.out_dir() == dir.path() / "results");
  CHECK(cfg.get_path("model") == dir.path() / "m.ckpt");
  CHECK_THROWS_AS(RunConfig::load(dir / "missing.cfg"), ConfigError);
}

TEST_CASE("manifest parsing and serialization") {
  aquarender::testing::TempDir dir("manifest");
  io::save_image(LinearImage(4, 3, 0.5), dir / "c.png");
  io::save_depth(DepthMap(4, 3, 1.0), dir / "d.png", 0.001);
  io::save_image(LinearImage(4, 3, 0.2), dir / "u.png");
  aquarender::testing::write_text(dir / "tracks.csv", "track,image_index,x,y\n0,0,1,1\n0,1,2,2\n");
  const std::string text =
      "depth_scale = 0.0005\nmax_altitude = 3\nzero_depth = missing\nresolution = 64x48\n"
      "entry = c.png d.png\nimage = u.png d.png\nimage = u.png\npair = c.png d.png u.png\n"
      "compare = one u.png c.png\ntrack_image = u.png\ntrack_image = u.png d.png\ntracks = tracks.csv\n";
  const DatasetManifest m = DatasetManifest::parse(text, dir.path());
  CHECK(m.depth_scale == 0.0005);
  CHECK(m.max_altitude == 3.0);
  CHECK(m.zero_depth == physics::ZeroDepth::kMissing);
  CHECK_FALSE(m.resolution.source);
  CHECK(m.resolution.width == 64);
  CHECK(m.images.size() == 2);
  CHECK_FALSE(m.images[1].depth.has_value());
  CHECK(m.tracks.size() == 2);
  CHECK(m.tracks[1].x == 2);

  const DatasetManifest again = DatasetManifest::parse(m.to_text(), dir.path());
  CHECK(again.to_text() == m.to_text());

  CHECK_THROWS_AS(DatasetManifest::parse("entry = c.png nothere.png\n", dir.path()), DataError);
  CHECK_THROWS_AS(DatasetManifest::parse("bogus = 1\n", dir.path()), ConfigError);
  CHECK_THROWS_AS(DatasetManifest::parse("depth_scale = 1\ndepth_scale = 2\n", dir.path()), ConfigError);
  aquarender::testing::write_text(dir / "bad.csv", "track,image_index,x,y\n0,5,1,1\n");
  CHECK_THROWS_AS(DatasetManifest::parse("track_image = u.png\ntracks = bad.csv\n", dir.path()), DataError);
}

TEST_CASE("checkpoint round trip") {
  aquarender::testing::TempDir dir("checkpoint");
  std::mt19937_64 rng(82);
  Checkpoint ck;
  ck.model = synthetic::random_model(rng, 2.5);
  ck.model.noise_sigma = 0.01;
  ck.set_discriminator(Discriminator::initialized(3));
  ck.save(dir / "m.ckpt");
  const Checkpoint back = Checkpoint::load(dir / "m.ckpt");
  CHECK(natural_params(back.model) == natural_params(ck.model));
  CHECK(back.model.noise_sigma == 0.01);
  CHECK(back.model.max_altitude == 2.5);
  CHECK(back.weights == ck.weights);
  CHECK(back.discriminator().weight_count() == Discriminator().weight_count());
  CHECK(back.serialize() == ck.serialize());

  const std::string bytes = ck.serialize();
  CHECK_THROWS_AS(Checkpoint::deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  CHECK_THROWS_AS(Checkpoint::deserialize("not a checkpoint"), DataError);
  Checkpoint empty;
  CHECK(Checkpoint::deserialize(empty.serialize()).weights.empty());
  CHECK_THROWS_AS(empty.discriminator(), DataError);
}
