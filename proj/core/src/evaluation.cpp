#include "aquarender/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "aquarender/error.hpp"

namespace aquarender::eval {
namespace {

constexpr int kBins = 256;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int bin_of(double v) {
  return std::clamp(static_cast<int>(std::floor(v * (kBins - 1) + 0.5)), 0, kBins - 1);
}

}  // namespace

Color intensity_normalize(const Color& color, Normalization mode) {
  double scale = 0.0;
  if (mode == Normalization::kEuclidean) {
    scale = std::sqrt(color[0] * color[0] + color[1] * color[1] + color[2] * color[2]);
  } else {
    scale = color[0] + color[1] + color[2];
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ContractError("intensity normalization is undefined for a zero color");
  }
  return {color[0] / scale, color[1] / scale, color[2] / scale};
}

void ColorPatchSet::validate() const {
  std::set<std::string> names;
  for (const ColorPatch& p : patches) {
    if (p.pixels.empty()) throw ContractError("color patch '" + p.name + "' has no pixels");
    if (!names.insert(p.name).second) {
      throw ContractError("duplicate color patch name '" + p.name + "'");
    }
  }
}

std::vector<PatchDistance> color_accuracy(const ColorPatchSet& set, Normalization mode) {
  set.validate();
  std::vector<PatchDistance> out;
  for (const ColorPatch& patch : set.patches) {
    Color mean{};
    for (const Color& px : patch.pixels) {
      for (std::size_t c = 0; c < 3; ++c) mean[c] += px[c];
    }
    for (double& m : mean) m /= static_cast<double>(patch.pixels.size());
    const Color a = intensity_normalize(mean, mode);
    const Color b = intensity_normalize(patch.reference, mode);
    double d2 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
    out.push_back({patch.name, std::sqrt(d2)});
  }
  return out;
}

void TrackSet::validate() const {
  if (tracks.empty()) throw ContractError("track set is empty");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].size() < 2) {
      throw ContractError("track " + std::to_string(i) + " has fewer than 2 observations");
    }
  }
}

Color color_consistency(const TrackSet& set, Normalization mode) {
  set.validate();
  Color total{};
  for (const Track& track : set.tracks) {
    std::vector<Color> norm;
    norm.reserve(track.size());
    for (const Color& obs : track) norm.push_back(intensity_normalize(obs, mode));
    const double n = static_cast<double>(norm.size());
    for (std::size_t c = 0; c < 3; ++c) {
      double mean = 0.0;
      for (const Color& v : norm) mean += v[c];
      mean /= n;
      double var = 0.0;
      for (const Color& v : norm) var += (v[c] - mean) * (v[c] - mean);
      total[c] += var / n;
    }
  }
  for (double& t : total) t /= static_cast<double>(set.tracks.size());
  return total;
}

Color rmse_rgb(const LinearImage& a, const LinearImage& b) {
  require_same_shape(a, b, "rmse_rgb");
  Color sum{};
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = a(p, c) - b(p, c);
      sum[c] += d * d;
    }
  }
  for (double& s : sum) s = std::sqrt(s / static_cast<double>(a.pixel_count()));
  return sum;
}

double rmse_depth_norm(const DepthMap& a, const DepthMap& b, const PixelMask& mask) {
  require_same_shape(a, b, "rmse_depth_norm");
  require_same_shape(a, mask, "rmse_depth_norm (mask)");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < a.pixel_count(); ++p) {
    if (!mask(p)) continue;
    const double d = a(p) - b(p);
    sum += d * d;
    ++n;
  }
  if (n == 0) throw ContractError("rmse_depth_norm: mask selects no pixels");
  return std::sqrt(sum / static_cast<double>(n));
}

LinearImage baseline_histeq(const LinearImage& img) {
  LinearImage out(img.width(), img.height());
  const double total = static_cast<double>(img.pixel_count());
  for (std::size_t c = 0; c < 3; ++c) {
    std::array<double, kBins> cdf{};
    for (std::size_t p = 0; p < img.pixel_count(); ++p) cdf[bin_of(img(p, c))] += 1.0;
    for (int i = 1; i < kBins; ++i) cdf[i] += cdf[i - 1];
    for (std::size_t p = 0; p < img.pixel_count(); ++p) out(p, c) = cdf[bin_of(img(p, c))] / total;
  }
  return out;
}

Color grayworld_gains(const LinearImage& img) {
  Color mean{};
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) mean[c] += img(p, c);
  }
  for (double& m : mean) m /= static_cast<double>(img.pixel_count());
  for (std::size_t c = 0; c < 3; ++c) {
    if (!(mean[c] > 0.0)) {
      throw ContractError("gray-world normalization needs every channel mean > 0");
    }
  }
  const double global = (mean[0] + mean[1] + mean[2]) / 3.0;
  return {global / mean[0], global / mean[1], global / mean[2]};
}

LinearImage baseline_grayworld(const LinearImage& img) {
  const Color gain = grayworld_gains(img);
  LinearImage out(img.width(), img.height());
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    for (std::size_t c = 0; c < 3; ++c) out(p, c) = clamp_unit(img(p, c) * gain[c]);
  }
  return out;
}

std::string accuracy_table_csv(const std::vector<std::string>& patch_names,
                               const std::vector<MethodColumn>& columns) {
  std::string out = "patch";
  for (const MethodColumn& col : columns) {
    if (col.values.size() != patch_names.size()) {
      throw ContractError("accuracy table: column '" + col.method + "' has the wrong row count");
    }
    out += ',' + col.method;
  }
  out += '\n';
  for (std::size_t r = 0; r < patch_names.size(); ++r) {
    out += patch_names[r];
    for (const MethodColumn& col : columns) out += ',' + num(col.values[r]);
    out += '\n';
  }
  return out;
}

std::string consistency_table_csv(const std::vector<MethodColumn>& columns) {
  static const std::array<const char*, 3> kRows = {"Red", "Green", "Blue"};
  std::string out = "channel";
  for (const MethodColumn& col : columns) {
    if (col.values.size() != 3) {
      throw ContractError("consistency table: column '" + col.method + "' needs 3 values");
    }
    out += ',' + col.method;
  }
  out += '\n';
  for (std::size_t r = 0; r < 3; ++r) {
    out += kRows[r];
    for (const MethodColumn& col : columns) out += ',' + num(col.values[r]);
    out += '\n';
  }
  return out;
}

std::string validation_table_csv(const std::vector<ValidationRow>& rows) {
  std::string out = "dataset,Red,Green,Blue,Depth RMSE\n";
  for (const ValidationRow& row : rows) {
    out += row.dataset;
    for (double v : row.rgb_rmse) out += ',' + num(v);
    out += ',';
    if (row.has_depth) out += num(row.depth_rmse);
    out += '\n';
  }
  return out;
}

}  // namespace aquarender::eval
