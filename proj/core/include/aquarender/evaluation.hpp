#pragma once

#include <array>
#include <string>
#include <vector>

#include "aquarender/raster.hpp"

namespace aquarender::eval {

using Color = std::array<double, 3>;

// How a color is stripped of its intensity before comparison.
enum class Normalization {
  kEuclidean,     // c / |c|_2 (default)
  kChromaticity,  // c / (r + g + b)
};

// Throws ContractError for the zero vector.
Color intensity_normalize(const Color& color, Normalization mode = Normalization::kEuclidean);

struct ColorPatch {
  std::string name;
  std::vector<Color> pixels;
  Color reference{};
};

struct ColorPatchSet {
  std::vector<ColorPatch> patches;
  void validate() const;  // non-empty patches, unique names
};

struct PatchDistance {
  std::string name;
  double distance = 0.0;
};

// Per patch: distance between the normalized mean patch color and the
// normalized reference.
std::vector<PatchDistance> color_accuracy(const ColorPatchSet& patches,
                                          Normalization mode = Normalization::kEuclidean);

// Observations of one scene point across images.
using Track = std::vector<Color>;

struct TrackSet {
  std::vector<Track> tracks;
  void validate() const;  // every track has >= 2 observations
};

// Mean over tracks of the per-channel population variance of the normalized
// observations.
Color color_consistency(const TrackSet& tracks, Normalization mode = Normalization::kEuclidean);

// Per-channel root-mean-square difference.
Color rmse_rgb(const LinearImage& a, const LinearImage& b);
// RMS difference over pixels where `mask` is set (typically "depth known").
double rmse_depth_norm(const DepthMap& a, const DepthMap& b, const PixelMask& mask);

// Per-channel equalization over 256 bins: each value maps to the cumulative
// fraction of pixels in its bin or below. A constant channel maps to 1.
LinearImage baseline_histeq(const LinearImage& img);

// Scales each channel by (mean of channel means) / (channel mean), then clamps.
LinearImage baseline_grayworld(const LinearImage& img);
Color grayworld_gains(const LinearImage& img);

// CSV tables. Columns are method names; each method supplies one value per row.
struct MethodColumn {
  std::string method;
  std::vector<double> values;
};

// Rows = patch names (accuracy table).
std::string accuracy_table_csv(const std::vector<std::string>& patch_names,
                               const std::vector<MethodColumn>& columns);
// Rows = Red, Green, Blue (consistency table).
std::string consistency_table_csv(const std::vector<MethodColumn>& columns);

struct ValidationRow {
  std::string dataset;
  Color rgb_rmse{};
  double depth_rmse = 0.0;
  bool has_depth = false;
};
// Rows = datasets; columns Red, Green, Blue, Depth RMSE.
std::string validation_table_csv(const std::vector<ValidationRow>& rows);

}  // namespace aquarender::eval
