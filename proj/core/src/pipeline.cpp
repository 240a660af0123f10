#include "aquarender/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "aquarender/adversarial.hpp"
#include "aquarender/checkpoint.hpp"
#include "aquarender/direct_fit.hpp"
#include "aquarender/error.hpp"
#include "aquarender/evaluation.hpp"
#include "aquarender/io.hpp"
#include "aquarender/manifest.hpp"
#include "aquarender/physics.hpp"
#include "aquarender/restoration.hpp"
#include "aquarender/synthetic.hpp"

namespace aquarender::pipeline {
namespace {

constexpr int kFitWidth = 64;
constexpr int kFitHeight = 48;
constexpr double kRelativeDepthScale = 1.0 / 65535.0;

const std::vector<std::string_view> kCommonKeys = {
    "seed", "out", "manifest", "model", "noise_sigma", "max_altitude", "zero_depth",
    "eta_r", "eta_g", "eta_b", "beta_r", "beta_g", "beta_b", "a", "b", "c", "k"};

void require_keys(const RunConfig& cfg, std::initializer_list<std::string_view> extra) {
  std::vector<std::string_view> allowed = kCommonKeys;
  allowed.insert(allowed.end(), extra.begin(), extra.end());
  cfg.require_known(allowed);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::optional<DatasetManifest> optional_manifest(const RunConfig& cfg) {
  if (!cfg.has("manifest")) return std::nullopt;
  return DatasetManifest::load(cfg.get_path("manifest"));
}

DatasetManifest required_manifest(const RunConfig& cfg) {
  if (!cfg.has("manifest")) throw ConfigError("manifest", "missing required path");
  return DatasetManifest::load(cfg.get_path("manifest"));
}

physics::ZeroDepth zero_depth(const RunConfig& cfg, const DatasetManifest* m) {
  if (cfg.has("zero_depth")) return parse_zero_depth("zero_depth", cfg.get_string("zero_depth"));
  return m ? m->zero_depth : physics::ZeroDepth::kRange;
}

double fallback_altitude(const DatasetManifest* m) {
  return m && m->max_altitude ? *m->max_altitude : 1.0;
}

LinearImage load_color(const fs::path& path, const Resolution& res) {
  LinearImage img = io::load_image(path);
  return res.source ? img : io::resample(img, res.width, res.height);
}

DepthMap load_range(const fs::path& path, double scale, const Resolution& res) {
  DepthMap d = io::load_depth(path, scale);
  return res.source ? d : io::resample_depth(d, res.width, res.height);
}

void require_aligned(const LinearImage& img, const DepthMap& depth, const fs::path& depth_path) {
  if (img.width() != depth.width() || img.height() != depth.height()) {
    throw DataError(depth_path.string() + " is " + std::to_string(depth.width()) + "x" +
                    std::to_string(depth.height()) + " but its image is " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
}

// Output names are <stem>.png; two inputs with the same stem would collide.
std::string unique_stem(std::set<std::string>& used, const fs::path& path) {
  std::string stem = path.stem().string();
  if (!used.insert(stem).second) {
    throw DataError("two inputs share the file name stem '" + stem + "' (" + path.string() + ")");
  }
  return stem;
}

std::string model_lines(const RenderModel& model) {
  std::string out;
  const ParamVector nat = natural_params(model);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    out += std::string(param_name(i)) + " = " + fmt(nat[i]) + "\n";
  }
  return out;
}

void note_model(RunOutputs& outputs, const RenderModel& model) {
  const ParamVector nat = natural_params(model);
  for (std::size_t i = 0; i < kParamCount; ++i) outputs.note(std::string(param_name(i)), nat[i]);
  outputs.note("noise_sigma", model.noise_sigma);
  outputs.note("max_altitude", model.max_altitude);
}

LinearImage quantize_color(const LinearImage& img) {
  LinearImage out = img;
  for (double& v : out.values()) v = std::round(clamp_unit(v) * 255.0) / 255.0;
  return out;
}

DepthMap quantize_depth(const DepthMap& depth, double scale) {
  DepthMap out = depth;
  for (double& v : out.values()) v = std::clamp(std::round(v / scale), 0.0, 65535.0) * scale;
  return out;
}

// An underwater observation with optional range, loaded for restore / eval.
struct Observation {
  std::string stem;
  LinearImage image;
  std::optional<DepthMap> depth;
};

Observation load_observation(const ObservationEntry& e, const DatasetManifest& m) {
  Observation o{e.image.stem().string(), load_color(e.image, m.resolution), std::nullopt};
  if (e.depth) {
    o.depth = load_range(*e.depth, m.depth_scale, m.resolution);
    require_aligned(o.image, *o.depth, *e.depth);
  }
  return o;
}

std::vector<ObservationEntry> observations(const DatasetManifest& m) {
  std::vector<ObservationEntry> out = m.images;
  for (const auto& p : m.pairs) out.push_back({p.underwater, p.depth});
  return out;
}

std::vector<SceneEntry> scenes(const DatasetManifest& m) {
  std::vector<SceneEntry> out = m.entries;
  for (const auto& p : m.pairs) out.push_back({p.color, p.depth});
  return out;
}

bool has_inline_model(const RunConfig& cfg) {
  if (cfg.has("model")) return true;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (cfg.has(std::string(param_name(i)))) return true;
  }
  return false;
}

// ---- render ----------------------------------------------------------------

void render_scenes(const std::vector<SceneEntry>& inputs, double depth_scale,
                   const Resolution& res, physics::ZeroDepth zero, const RenderModel& model,
                   std::uint64_t seed, RunOutputs& outputs) {
  std::set<std::string> used;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string stem = unique_stem(used, inputs[i].color);
    const LinearImage color = load_color(inputs[i].color, res);
    const DepthMap depth = load_range(inputs[i].depth, depth_scale, res);
    require_aligned(color, depth, inputs[i].depth);
    const LinearImage uw = physics::render(color, depth, model, mix_seed(seed, i), zero);
    const std::string rel = "underwater/" + stem + ".png";
    io::save_image(uw, outputs.path(rel));
    outputs.add(rel);
  }
  outputs.note("images", static_cast<double>(inputs.size()));
}

// ---- eval helpers ------------------------------------------------------------

struct Method {
  std::string name;
  std::function<LinearImage(const Observation&)> apply;
};

std::vector<Method> eval_methods(const std::vector<Observation>& obs,
                                 const std::optional<RenderModel>& model, physics::ZeroDepth zero) {
  std::vector<Method> methods = {
      {"input", [](const Observation& o) { return o.image; }},
      {"histeq", [](const Observation& o) { return eval::baseline_histeq(o.image); }},
      {"grayworld", [](const Observation& o) { return eval::baseline_grayworld(o.image); }},
  };
  if (!model) return methods;
  const bool all_depth =
      std::all_of(obs.begin(), obs.end(), [](const Observation& o) { return o.depth.has_value(); });
  const RenderModel m = *model;
  if (all_depth) {
    methods.push_back({"mod-JM", [m](const Observation& o) {
                         return restore::baseline_attenuation_only(o.image, *o.depth, m.water.eta);
                       }});
  }
  methods.push_back({"proposed", [m, zero](const Observation& o) {
                       if (o.depth) return restore::invert_render(o.image, *o.depth, m, zero);
                       return restore::restore_monocular(o.image, m).restored;
                     }});
  return methods;
}

eval::Normalization normalization(const RunConfig& cfg) {
  const std::string v = cfg.get_string("normalization", "euclidean");
  if (v == "euclidean") return eval::Normalization::kEuclidean;
  if (v == "chromaticity") return eval::Normalization::kChromaticity;
  throw ConfigError("normalization", "expected 'euclidean' or 'chromaticity', got '" + v + "'");
}

std::vector<Observation> load_all(const std::vector<ObservationEntry>& entries,
                                  const DatasetManifest& m) {
  std::vector<Observation> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(load_observation(e, m));
  return out;
}

std::string table1(const DatasetManifest& m, const std::vector<Observation>& boards,
                   const std::vector<Method>& methods, eval::Normalization norm) {
  if (m.patches.empty()) throw ConfigError("patches", "board images need a patches file");
  for (const auto& b : boards) {
    for (const auto& p : m.patches) {
      if (p.x0 < 0 || p.y0 < 0 || p.x1 > b.image.width() || p.y1 > b.image.height()) {
        throw DataError("patch " + p.name + " lies outside board image " + b.stem);
      }
    }
  }
  std::vector<std::string> names;
  for (const auto& p : m.patches) names.push_back(p.name);
  std::vector<eval::MethodColumn> columns;
  for (const auto& method : methods) {
    eval::ColorPatchSet set;
    for (const auto& p : m.patches) set.patches.push_back({p.name, {}, p.reference});
    for (const auto& b : boards) {
      const LinearImage img = method.apply(b);
      for (std::size_t i = 0; i < m.patches.size(); ++i) {
        const auto& p = m.patches[i];
        for (int y = p.y0; y < p.y1; ++y) {
          for (int x = p.x0; x < p.x1; ++x) {
            set.patches[i].pixels.push_back({img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2)});
          }
        }
      }
    }
    eval::MethodColumn col{method.name, {}};
    for (const auto& d : eval::color_accuracy(set, norm)) col.values.push_back(d.distance);
    columns.push_back(std::move(col));
  }
  return eval::accuracy_table_csv(names, columns);
}

std::string table2(const DatasetManifest& m, const std::vector<Observation>& images,
                   const std::vector<Method>& methods, eval::Normalization norm) {
  if (m.tracks.empty()) throw ConfigError("tracks", "track images need a tracks file");
  for (const auto& t : m.tracks) {
    const auto& img = images[static_cast<std::size_t>(t.image_index)].image;
    if (t.x < 0 || t.y < 0 || t.x >= img.width() || t.y >= img.height()) {
      throw DataError("track " + std::to_string(t.track) + " point lies outside its image");
    }
  }
  std::vector<eval::MethodColumn> columns;
  for (const auto& method : methods) {
    std::vector<LinearImage> processed;
    for (const auto& o : images) processed.push_back(method.apply(o));
    std::map<int, eval::Track> by_id;
    for (const auto& t : m.tracks) {
      const auto& img = processed[static_cast<std::size_t>(t.image_index)];
      by_id[t.track].push_back({img.at(t.x, t.y, 0), img.at(t.x, t.y, 1), img.at(t.x, t.y, 2)});
    }
    eval::TrackSet set;
    for (auto& [id, track] : by_id) set.tracks.push_back(std::move(track));
    const eval::Color v = eval::color_consistency(set, norm);
    columns.push_back({method.name, {v[0], v[1], v[2]}});
  }
  return eval::consistency_table_csv(columns);
}

std::string table3(const DatasetManifest& m, std::optional<double> max_altitude) {
  std::vector<eval::ValidationRow> rows;
  const auto row_for = [&](const std::string& name) -> eval::ValidationRow& {
    for (auto& r : rows) {
      if (r.dataset == name) return r;
    }
    rows.push_back({name, {0.0, 0.0, 0.0}, 0.0, false});
    return rows.back();
  };
  for (const auto& c : m.compares) {
    const LinearImage a = load_color(c.candidate, m.resolution);
    const LinearImage b = load_color(c.reference, m.resolution);
    if (!a.same_shape(b)) throw DataError("compare " + c.name + ": images differ in size");
    row_for(c.name).rgb_rmse = eval::rmse_rgb(a, b);
  }
  for (const auto& c : m.depth_compares) {
    if (!max_altitude) {
      throw ConfigError("max_altitude", "needed to normalize reference depth in compare_depth");
    }
    const DepthMap est = load_range(c.candidate, kRelativeDepthScale, m.resolution);
    const DepthMap ref = physics::normalize_depth(
        load_range(c.reference, m.depth_scale, m.resolution), *max_altitude);
    if (!est.same_shape(ref)) throw DataError("compare_depth " + c.name + ": maps differ in size");
    PixelMask mask(ref.width(), ref.height());
    for (int y = 0; y < ref.height(); ++y) {
      for (int x = 0; x < ref.width(); ++x) mask.at(x, y) = ref.at(x, y) > 0.0 ? 1 : 0;
    }
    auto& row = row_for(c.name);
    row.depth_rmse = eval::rmse_depth_norm(est, ref, mask);
    row.has_depth = true;
  }
  return eval::validation_table_csv(rows);
}

}  // namespace

// ---- RunOutputs ----------------------------------------------------------------

void RunOutputs::write_text(const std::string& rel, std::string_view text) {
  io::write_file_atomic(path(rel), text);
  add(rel);
}

void RunOutputs::note(const std::string& key, const std::string& value) {
  summary_.emplace_back(key, value);
}

void RunOutputs::note(const std::string& key, double value) { note(key, fmt(value)); }

void RunOutputs::finish(std::string_view command) {
  std::string summary = "command = " + std::string(command) + "\nstatus = ok\n";
  for (const auto& [k, v] : summary_) summary += k + " = " + v + "\n";
  write_text("summary.txt", summary);

  std::vector<std::string> files = files_;
  std::sort(files.begin(), files.end());
  files.erase(std::unique(files.begin(), files.end()), files.end());
  std::string listing;
  for (const auto& f : files) listing += f + "\n";
  io::write_file_atomic(path("outputs.txt"), listing);
}

// ---- model ----------------------------------------------------------------------

RenderModel model_from_config(const RunConfig& cfg, double fallback) {
  RenderModel model;
  model.max_altitude = fallback;
  if (cfg.has("model")) model = Checkpoint::load(cfg.get_path("model")).model;
  ParamVector nat = natural_params(model);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    nat[i] = cfg.get_double(std::string(param_name(i)), nat[i]);
  }
  model = with_natural_params(model, nat);
  model.noise_sigma = cfg.get_double("noise_sigma", model.noise_sigma);
  model.max_altitude = cfg.get_double("max_altitude", model.max_altitude);
  if (!(model.noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "must be >= 0");
  if (!(model.max_altitude > 0.0)) throw ConfigError("max_altitude", "must be > 0");
  model.validate();
  return model;
}

// ---- commands -------------------------------------------------------------------

void cmd_render(const RunConfig& cfg) {
  require_keys(cfg, {"color", "depth", "depth_scale"});
  RunOutputs outputs(cfg.out_dir());
  const auto manifest = optional_manifest(cfg);
  const DatasetManifest* m = manifest ? &*manifest : nullptr;
  const RenderModel model = model_from_config(cfg, fallback_altitude(m));

  if (cfg.has("color")) {
    if (m) throw ConfigError("color", "give either color/depth or a manifest, not both");
    const double scale = cfg.get_double("depth_scale", 0.001);
    if (!(scale > 0.0)) throw ConfigError("depth_scale", "must be > 0");
    render_scenes({{cfg.get_path("color"), cfg.get_path("depth")}}, scale, Resolution{},
                  zero_depth(cfg, nullptr), model, cfg.seed(), outputs);
  } else {
    if (!m) throw ConfigError("manifest", "missing (or give color and depth)");
    if (cfg.has("depth_scale")) throw ConfigError("depth_scale", "set it in the manifest");
    const auto inputs = scenes(*m);
    if (inputs.empty()) throw ConfigError("manifest", "lists no in-air entries");
    render_scenes(inputs, m->depth_scale, m->resolution, zero_depth(cfg, m), model, cfg.seed(),
                  outputs);
  }
  outputs.note("seed", std::to_string(cfg.seed()));
  note_model(outputs, model);
  outputs.finish("render");
}

void cmd_gen_dataset(const RunConfig& cfg) {
  require_keys(cfg, {"source", "count", "width", "height", "scene", "near", "far", "depth_scale"});
  RunOutputs outputs(cfg.out_dir());
  const std::string source = cfg.get_string("source", "synthetic");
  const std::uint64_t seed = cfg.seed();

  DatasetManifest out;
  if (source == "synthetic") {
    if (cfg.has("manifest")) throw ConfigError("manifest", "not used with source=synthetic");
    const RenderModel model = model_from_config(cfg, 2.0);
    const int count = cfg.get_int("count", 100);
    const int width = cfg.get_int("width", kFitWidth);
    const int height = cfg.get_int("height", kFitHeight);
    const std::string kind = cfg.get_string("scene", "textured");
    const synthetic::RangeSpan span{cfg.get_double("near", 0.5), cfg.get_double("far", 2.0)};
    const double scale = cfg.get_double("depth_scale", 0.001);
    if (count < 1) throw ConfigError("count", "must be >= 1");
    if (width < 1) throw ConfigError("width", "must be >= 1");
    if (height < 1) throw ConfigError("height", "must be >= 1");
    if (kind != "textured" && kind != "gray") {
      throw ConfigError("scene", "expected 'textured' or 'gray', got '" + kind + "'");
    }
    if (!(span.near > 0.0)) throw ConfigError("near", "must be > 0");
    if (!(span.far > span.near)) throw ConfigError("far", "must exceed near");
    if (!(scale > 0.0) || span.far / scale > 65535.0) {
      throw ConfigError("depth_scale", "must be > 0 and leave far within 16 bits");
    }

    out.depth_scale = scale;
    out.max_altitude = model.max_altitude;
    out.zero_depth = zero_depth(cfg, nullptr);
    for (int i = 0; i < count; ++i) {
      const auto scene_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
      const fit::Scene s = kind == "textured" ? synthetic::textured_scene(width, height, scene_seed, span)
                                              : synthetic::gray_scene(width, height, scene_seed, span);
      // Render from exactly what the files will hold.
      const LinearImage color = quantize_color(s.image);
      const DepthMap depth = quantize_depth(s.depth, scale);
      const LinearImage uw = physics::render(color, depth, model,
                                             mix_seed(~seed, static_cast<std::uint64_t>(i)),
                                             out.zero_depth);
      char name[16];
      std::snprintf(name, sizeof name, "%05d.png", i);
      const PairEntry rel{fs::path("inair") / name, fs::path("depth") / name,
                          fs::path("underwater") / name};
      io::save_image(color, outputs.path(rel.color.generic_string()));
      io::save_depth(depth, outputs.path(rel.depth.generic_string()), scale);
      io::save_image(uw, outputs.path(rel.underwater.generic_string()));
      outputs.add(rel.color.generic_string());
      outputs.add(rel.depth.generic_string());
      outputs.add(rel.underwater.generic_string());
      out.pairs.push_back(rel);
    }
    Checkpoint truth{model, {}};
    truth.save(outputs.path("truth.ckpt"));
    outputs.add("truth.ckpt");
    outputs.note("source", "synthetic");
    outputs.note("scene", kind);
    note_model(outputs, model);
  } else if (source == "manifest") {
    const DatasetManifest m = required_manifest(cfg);
    const RenderModel model = model_from_config(cfg, fallback_altitude(&m));
    const auto inputs = scenes(m);
    if (inputs.empty()) throw ConfigError("manifest", "lists no in-air entries");
    if (m.resolution.source == false) throw ConfigError("manifest", "resolution must be 'source' here");
    for (const auto* key : {"count", "width", "height", "scene", "near", "far", "depth_scale"}) {
      if (cfg.has(key)) throw ConfigError(key, "only used with source=synthetic");
    }
    out.depth_scale = m.depth_scale;
    out.max_altitude = model.max_altitude;
    out.zero_depth = zero_depth(cfg, &m);
    render_scenes(inputs, m.depth_scale, m.resolution, out.zero_depth, model, seed, outputs);
    std::set<std::string> used;
    for (const auto& e : inputs) {
      const std::string stem = unique_stem(used, e.color);
      out.pairs.push_back({fs::absolute(e.color), fs::absolute(e.depth),
                           fs::path("underwater") / (stem + ".png")});
    }
    Checkpoint{model, {}}.save(outputs.path("truth.ckpt"));
    outputs.add("truth.ckpt");
    outputs.note("source", "manifest");
    note_model(outputs, model);
  } else {
    throw ConfigError("source", "expected 'synthetic' or 'manifest', got '" + source + "'");
  }
  outputs.write_text("dataset.manifest", out.to_text());
  outputs.note("pairs", static_cast<double>(out.pairs.size()));
  outputs.note("seed", std::to_string(seed));
  outputs.finish("gen-dataset");
}

void cmd_fit(const RunConfig& cfg) {
  require_keys(cfg, {"mode", "batch_size", "learning_rate", "generator_learning_rate", "epochs",
                     "beta1", "beta2", "epsilon", "holdout_fraction", "max_iterations",
                     "relative_tolerance"});
  RunOutputs outputs(cfg.out_dir());
  const DatasetManifest m = required_manifest(cfg);
  const RenderModel initial = model_from_config(cfg, fallback_altitude(&m));
  const physics::ZeroDepth zero = zero_depth(cfg, &m);
  const std::string mode = cfg.get_string("mode", "adversarial");

  const auto load_scene = [&](const SceneEntry& e) {
    fit::Scene s{io::load_image(e.color), io::load_depth(e.depth, m.depth_scale)};
    require_aligned(s.image, s.depth, e.depth);
    s.image = io::resample(s.image, kFitWidth, kFitHeight);
    s.depth = io::resample_depth(s.depth, kFitWidth, kFitHeight);
    return s;
  };

  Checkpoint ck;
  if (mode == "direct") {
    if (m.pairs.empty()) throw ConfigError("manifest", "direct fitting needs pair lines");
    fit::DirectFitOptions opts;
    opts.initial = initial;
    opts.max_iterations = cfg.get_int("max_iterations", opts.max_iterations);
    opts.relative_tolerance = cfg.get_double("relative_tolerance", opts.relative_tolerance);
    opts.zero_depth = zero;
    if (opts.max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
    if (!(opts.relative_tolerance >= 0.0)) throw ConfigError("relative_tolerance", "must be >= 0");
    std::vector<fit::Pair> pairs;
    for (const auto& p : m.pairs) {
      fit::Scene s = load_scene({p.color, p.depth});
      pairs.push_back({std::move(s.image), std::move(s.depth),
                       io::resample(io::load_image(p.underwater), kFitWidth, kFitHeight)});
    }
    const fit::DirectFitResult r = fit::fit_direct(pairs, opts);
    ck.model = r.model;
    std::string report = "mode = direct\n";
    report += "pairs = " + std::to_string(pairs.size()) + "\n";
    report += "samples = " + std::to_string(r.samples) + "\n";
    report += "iterations = " + std::to_string(r.iterations) + "\n";
    report += "rms_residual = " + fmt(r.rms_residual) + "\n";
    report += model_lines(r.model);
    outputs.write_text("fit_report.txt", report);
    outputs.note("rms_residual", r.rms_residual);
    outputs.note("iterations", std::to_string(r.iterations));
  } else if (mode == "adversarial") {
    fit::TrainConfig tc;
    tc.batch_size = cfg.get_int("batch_size", tc.batch_size);
    tc.learning_rate = cfg.get_double("learning_rate", tc.learning_rate);
    tc.generator_learning_rate = cfg.get_double("generator_learning_rate", tc.generator_learning_rate);
    tc.epochs = cfg.get_int("epochs", tc.epochs);
    tc.beta1 = cfg.get_double("beta1", tc.beta1);
    tc.beta2 = cfg.get_double("beta2", tc.beta2);
    tc.epsilon = cfg.get_double("epsilon", tc.epsilon);
    tc.holdout_fraction = cfg.get_double("holdout_fraction", tc.holdout_fraction);
    tc.seed = cfg.seed();
    tc.zero_depth = zero;
    tc.validate();
    std::vector<LinearImage> reals;
    for (const auto& o : observations(m)) {
      reals.push_back(io::resample(io::load_image(o.image), kFitWidth, kFitHeight));
    }
    std::vector<fit::Scene> scene_set;
    for (const auto& e : scenes(m)) scene_set.push_back(load_scene(e));
    if (reals.empty()) throw ConfigError("manifest", "adversarial fitting needs underwater images");
    if (scene_set.empty()) throw ConfigError("manifest", "adversarial fitting needs in-air scenes");
    const fit::TrainResult r = fit::train(tc, reals, scene_set, initial);
    ck.model = r.model;
    ck.set_discriminator(r.discriminator);
    outputs.write_text("train_report.csv", r.report.to_csv());
    const auto& last = r.report.epochs.back();
    outputs.note("epochs", std::to_string(r.report.epochs.size()));
    outputs.note("disc_accuracy", last.disc_accuracy);
  } else {
    throw ConfigError("mode", "expected 'direct' or 'adversarial', got '" + mode + "'");
  }
  ck.save(outputs.path("model.ckpt"));
  outputs.add("model.ckpt");
  outputs.note("mode", mode);
  outputs.note("seed", std::to_string(cfg.seed()));
  note_model(outputs, ck.model);
  outputs.finish("fit");
}

void cmd_restore(const RunConfig& cfg) {
  require_keys(cfg, {"mode", "grid_samples", "refine", "median", "tolerance_fraction"});
  RunOutputs outputs(cfg.out_dir());
  const DatasetManifest m = required_manifest(cfg);
  const RenderModel model = model_from_config(cfg, fallback_altitude(&m));
  const physics::ZeroDepth zero = zero_depth(cfg, &m);
  const std::string mode = cfg.get_string("mode", "monocular");
  if (mode != "monocular" && mode != "known-depth") {
    throw ConfigError("mode", "expected 'monocular' or 'known-depth', got '" + mode + "'");
  }
  restore::DepthSearchOptions search;
  search.grid_samples = cfg.get_int("grid_samples", search.grid_samples);
  search.refine = cfg.get_bool("refine", search.refine);
  search.median = cfg.get_bool("median", search.median);
  search.tolerance_fraction = cfg.get_double("tolerance_fraction", search.tolerance_fraction);
  if (search.grid_samples < 2) throw ConfigError("grid_samples", "must be >= 2");
  if (!(search.tolerance_fraction > 0.0)) throw ConfigError("tolerance_fraction", "must be > 0");

  const auto entries = observations(m);
  if (entries.empty()) throw ConfigError("manifest", "lists no underwater images");

  std::string report = mode == "monocular" ? "image,flagged_fraction,mean_residual\n"
                                           : "image,flagged_fraction\n";
  std::set<std::string> used;
  for (const auto& e : entries) {
    const std::string stem = unique_stem(used, e.image);
    const Observation o = load_observation(e, m);
    LinearImage restored;
    DepthMap depth_rel;
    PixelMask flagged;
    double mean_residual = 0.0;
    if (mode == "monocular") {
      restore::RestorationResult r = restore::restore_monocular(o.image, model, search);
      restored = std::move(r.restored);
      depth_rel = std::move(r.depth_rel);
      flagged = std::move(r.saturation);
      for (double v : r.residual.values()) mean_residual += v;
      mean_residual /= static_cast<double>(r.residual.values().size());
    } else {
      if (!o.depth) throw DataError("known-depth restoration needs a depth map for " + e.image.string());
      flagged = PixelMask(o.image.width(), o.image.height());
      restored = restore::invert_render(o.image, *o.depth, model, zero, &flagged);
      depth_rel = physics::normalize_depth(*o.depth, model.max_altitude);
    }
    std::size_t count = 0;
    for (auto v : flagged.values()) count += v != 0;
    const double fraction = static_cast<double>(count) / static_cast<double>(flagged.values().size());

    io::save_image(restored, outputs.path("restored/" + stem + ".png"));
    io::save_depth(depth_rel, outputs.path("depth/" + stem + ".png"), kRelativeDepthScale);
    outputs.add("restored/" + stem + ".png");
    outputs.add("depth/" + stem + ".png");
    report += stem + "," + fmt(fraction);
    if (mode == "monocular") report += "," + fmt(mean_residual);
    report += "\n";
  }
  outputs.write_text("restore_report.csv", report);
  outputs.note("mode", mode);
  outputs.note("images", static_cast<double>(entries.size()));
  outputs.note("depth_scale", kRelativeDepthScale);
  note_model(outputs, model);
  outputs.finish("restore");
}

void cmd_eval(const RunConfig& cfg) {
  require_keys(cfg, {"normalization"});
  RunOutputs outputs(cfg.out_dir());
  const DatasetManifest m = required_manifest(cfg);
  const eval::Normalization norm = normalization(cfg);
  std::optional<RenderModel> model;
  if (has_inline_model(cfg)) model = model_from_config(cfg, fallback_altitude(&m));
  const physics::ZeroDepth zero = zero_depth(cfg, &m);

  std::optional<double> altitude = m.max_altitude;
  if (cfg.has("max_altitude")) altitude = cfg.get_double("max_altitude", 1.0);
  else if (model && cfg.has("model")) altitude = model->max_altitude;

  bool any = false;
  if (!m.boards.empty()) {
    const auto boards = load_all(m.boards, m);
    outputs.write_text("table1_accuracy.csv", table1(m, boards, eval_methods(boards, model, zero), norm));
    any = true;
  }
  if (!m.track_images.empty()) {
    const auto images = load_all(m.track_images, m);
    outputs.write_text("table2_consistency.csv",
                       table2(m, images, eval_methods(images, model, zero), norm));
    any = true;
  }
  if (!m.compares.empty() || !m.depth_compares.empty()) {
    outputs.write_text("table3_validation.csv", table3(m, altitude));
    any = true;
  }
  if (!any) throw ConfigError("manifest", "has no board, track_image, compare or compare_depth lines");
  outputs.note("normalization", norm == eval::Normalization::kEuclidean ? "euclidean" : "chromaticity");
  outputs.note("model", model ? "yes" : "no");
  outputs.finish("eval");
}

void run_command(std::string_view name, const RunConfig& cfg) {
  if (name == "render") return cmd_render(cfg);
  if (name == "gen-dataset") return cmd_gen_dataset(cfg);
  if (name == "fit") return cmd_fit(cfg);
  if (name == "restore") return cmd_restore(cfg);
  if (name == "eval") return cmd_eval(cfg);
  throw ConfigError("", "unknown command '" + std::string(name) + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidParameterError*>(&e)) {
    return 1;
  }
  if (dynamic_cast<const DivergenceError*>(&e)) return 3;
  return 2;
}

}  // namespace aquarender::pipeline
