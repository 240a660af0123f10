#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "aquarender/checkpoint.hpp"
#include "aquarender/config.hpp"
#include "aquarender/error.hpp"
#include "aquarender/io.hpp"
#include "aquarender/pipeline.hpp"
#include "aquarender/synthetic.hpp"
#include "support.hpp"
#include "temp_dir.hpp"

using namespace aquarender;
using namespace aquarender::pipeline;
namespace fs = std::filesystem;
using aquarender::testing::read_text;
using aquarender::testing::TempDir;
using aquarender::testing::write_text;

namespace {

const char* const kTruth =
    "eta_r = 0.7\neta_g = 0.18\neta_b = 0.35\nbeta_r = 0.04\nbeta_g = 0.3\nbeta_b = 0.22\n"
    "a = 0.35\nb = -0.08\nc = 0.12\nk = 1.1\nmax_altitude = 2.5\n";

const char* const kIdentity =
    "eta_r = 1e-12\neta_g = 1e-12\neta_b = 1e-12\nbeta_r = 0\nbeta_g = 0\nbeta_b = 0\n"
    "a = 1e-12\nb = 0\nc = 1e-12\nk = 1\n";

void run(std::string_view command, const fs::path& dir, const std::string& text) {
  RunConfig cfg = RunConfig::parse(text);
  cfg.set_base_dir(dir);
  run_command(command, cfg);
}

int exit_code_of(std::string_view command, const fs::path& dir, const std::string& text) {
  try {
    run(command, dir, text);
  } catch (const std::exception& e) {
    return exit_code_for(e);
  }
  return 0;
}

std::vector<std::string> listed_outputs(const fs::path& out) {
  std::vector<std::string> files;
  std::istringstream in(read_text(out / "outputs.txt"));
  for (std::string line; std::getline(in, line);) files.push_back(line);
  return files;
}

void check_same_outputs(const fs::path& a, const fs::path& b) {
  const auto files = listed_outputs(a);
  REQUIRE_FALSE(files.empty());
  CHECK(files == listed_outputs(b));
  for (const std::string& f : files) {
    INFO(f);
    CHECK(read_text(a / f) == read_text(b / f));
  }
  CHECK(read_text(a / "summary.txt") == read_text(b / "summary.txt"));
}

void write_scene(const fs::path& dir, std::uint64_t seed) {
  const fit::Scene s = synthetic::textured_scene(40, 30, seed, {0.3, 2.5});
  io::save_image(s.image, dir / "c.png");
  io::save_depth(s.depth, dir / "d.png", 0.001);
}

}  // namespace

TEST_CASE("render with an identity model reproduces the input") {
  TempDir dir("render_identity");
  write_scene(dir.path(), 1);
  run("render", dir.path(), std::string(kIdentity) + "color = c.png\ndepth = d.png\nout = o\n");
  const LinearImage in = io::load_image(dir / "c.png");
  const LinearImage out = io::load_image(dir / "o/underwater/c.png");
  CHECK(aquarender::testing::max_abs_diff(in.values(), out.values()) == 0.0);
  CHECK(read_text(dir / "o/outputs.txt") == "summary.txt\nunderwater/c.png\n");
  CHECK(read_text(dir / "o/summary.txt").rfind("command = render\nstatus = ok\n", 0) == 0);
}

TEST_CASE("generated pairs fit directly and the checkpoint restores") {
  TempDir dir("gen_fit_restore");
  run("gen-dataset", dir.path(),
      std::string(kTruth) + "count = 200\nnear = 0.3\nfar = 2.5\nseed = 5\nout = gen\n");
  CHECK(fs::exists(dir / "gen/truth.ckpt"));
  run("fit", dir.path(), "mode = direct\nmanifest = gen/dataset.manifest\nout = fit\n");
  const Checkpoint fitted = Checkpoint::load(dir / "fit/model.ckpt");
  const Checkpoint truth = Checkpoint::load(dir / "gen/truth.ckpt");
  const ParamVector got = natural_params(fitted.model);
  const ParamVector want = natural_params(truth.model);
  for (std::size_t p = 0; p < kParamCount; ++p) {
    INFO(param_name(p));
    CHECK(aquarender::testing::rel_err(got[p], want[p]) < 0.01);
  }
  CHECK(fitted.model.max_altitude == 2.5);

  run("restore", dir.path(),
      "mode = known-depth\nmanifest = gen/dataset.manifest\nmodel = fit/model.ckpt\nout = rest\n");
  const std::string report = read_text(dir / "rest/restore_report.csv");
  CHECK(report.rfind("image,flagged_fraction\n", 0) == 0);
  const LinearImage restored = io::load_image(dir / "rest/restored/00000.png");
  const LinearImage original = io::load_image(dir / "gen/inair/00000.png");
  for (double e : eval::rmse_rgb(restored, original)) CHECK(e < 0.02);
}

TEST_CASE("eval on identical images reports zeros") {
  TempDir dir("eval_identical");
  write_scene(dir.path(), 2);
  write_text(dir / "m.manifest", "max_altitude = 2.5\ncompare = same c.png c.png\ncompare_depth = flat d.png d.png\n");
  run("eval", dir.path(), "manifest = m.manifest\nout = e\n");
  const std::string t = read_text(dir / "e/table3_validation.csv");
  CHECK(t.find("same,0.000000,0.000000,0.000000,\n") != std::string::npos);
  CHECK(fs::exists(dir / "e/summary.txt"));
}

TEST_CASE("reruns with the same seed are byte-identical") {
  TempDir dir("rerun");
  const std::string gen = std::string(kTruth) + "count = 12\nnoise_sigma = 0.01\nseed = 3\n";
  run("gen-dataset", dir.path(), gen + "out = g1\n");
  run("gen-dataset", dir.path(), gen + "out = g2\n");
  check_same_outputs(dir / "g1", dir / "g2");

  const std::string render = std::string(kTruth) + "noise_sigma = 0.02\nmanifest = g1/dataset.manifest\nseed = 8\n";
  run("render", dir.path(), render + "out = r1\n");
  run("render", dir.path(), render + "out = r2\n");
  check_same_outputs(dir / "r1", dir / "r2");

  const std::string fit = "manifest = g1/dataset.manifest\nepochs = 2\nbatch_size = 4\nseed = 4\n";
  run("fit", dir.path(), fit + "out = f1\n");
  run("fit", dir.path(), fit + "out = f2\n");
  check_same_outputs(dir / "f1", dir / "f2");

  const std::string restore = "manifest = g1/dataset.manifest\nmodel = g1/truth.ckpt\n";
  run("restore", dir.path(), restore + "out = s1\n");
  run("restore", dir.path(), restore + "out = s2\n");
  check_same_outputs(dir / "s1", dir / "s2");

  write_text(dir / "e.manifest",
             "compare = a s1/restored/00000.png g1/inair/00000.png\n"
             "track_image = g1/underwater/00000.png g1/depth/00000.png\n"
             "track_image = g1/underwater/00001.png g1/depth/00001.png\n"
             "tracks = tracks.csv\n");
  write_text(dir / "tracks.csv", "track,image_index,x,y\n0,0,10,10\n0,1,12,11\n1,0,30,20\n1,1,31,22\n");
  const std::string eval = "manifest = e.manifest\nmodel = g1/truth.ckpt\n";
  run("eval", dir.path(), eval + "out = e1\n");
  run("eval", dir.path(), eval + "out = e2\n");
  check_same_outputs(dir / "e1", dir / "e2");
  CHECK(read_text(dir / "e1/table2_consistency.csv").rfind("channel,input,histeq,grayworld,mod-JM,proposed\n", 0) == 0);

  run("render", dir.path(), std::string(kTruth) + "noise_sigma = 0.02\nmanifest = g1/dataset.manifest\nseed = 9\nout = r3\n");
  CHECK(read_text(dir / "r1/underwater/00000.png") != read_text(dir / "r3/underwater/00000.png"));
}

TEST_CASE("errors map to exit codes") {
  TempDir dir("exit_codes");
  write_scene(dir.path(), 3);
  CHECK(exit_code_of("render", dir.path(), "color = c.png\ndepth = d.png\nbogus = 1\n") == 1);
  CHECK(exit_code_of("render", dir.path(), "color = c.png\ndepth = d.png\neta_r = -1\n") == 1);
  CHECK(exit_code_of("render", dir.path(), "color = missing.png\ndepth = d.png\n") == 2);
  CHECK(exit_code_of("fit", dir.path(), "manifest = nothere.manifest\n") == 2);
  CHECK(exit_code_of("eval", dir.path(), "mode = x\n") == 1);
  CHECK(exit_code_for(DivergenceError("loss")) == 3);
  CHECK_THROWS_AS(run("explode", dir.path(), ""), ConfigError);
}

TEST_CASE("command-line tool") {
  TempDir dir("cli");
  write_scene(dir.path(), 4);
  write_text(dir / "ok.cfg", std::string(kTruth) + "color = c.png\ndepth = d.png\n");
  write_text(dir / "bad.cfg", "color = c.png\ndepth = d.png\nbogus = 1\n");
  write_text(dir / "data.cfg", "color = absent.png\ndepth = d.png\n");
  const std::string exe = AQUARENDER_CLI;
  const auto code = [&](const std::string& args) {
    const int status = std::system((exe + " " + args + " 2>/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const std::string d = dir.path().string();
  CHECK(code("render --config " + d + "/ok.cfg --out " + d + "/o --seed 2") == 0);
  CHECK(fs::exists(dir / "o/underwater/c.png"));
  CHECK(code("render --config " + d + "/ok.cfg --out " + d + "/o2 noise_sigma=0.5") == 0);
  CHECK(read_text(dir / "o2/summary.txt").find("noise_sigma = 0.5") != std::string::npos);
  CHECK(code("render --config " + d + "/bad.cfg") == 1);
  CHECK(code("render --config " + d + "/data.cfg") == 2);
  CHECK(code("frobnicate --config " + d + "/ok.cfg") == 1);
  CHECK(code("render") == 1);
}
