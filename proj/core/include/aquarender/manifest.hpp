#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aquarender/physics.hpp"

namespace aquarender::pipeline {

namespace fs = std::filesystem;

// How images are brought to a common size before processing.
struct Resolution {
  bool source = true;  // keep each file's own size
  int width = 0;
  int height = 0;
};

// In-air color image with its range map.
struct SceneEntry {
  fs::path color;
  fs::path depth;
};

// Underwater image, optionally with its range map.
struct ObservationEntry {
  fs::path image;
  std::optional<fs::path> depth;
};

// Aligned in-air RGB-D and underwater image.
struct PairEntry {
  fs::path color;
  fs::path depth;
  fs::path underwater;
};

// Named candidate/reference pair for validation tables.
struct CompareEntry {
  std::string name;
  fs::path candidate;
  fs::path reference;
};

// Color-board patch rectangle (half-open) with its in-air reference color.
struct PatchRegion {
  std::string name;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::array<double, 3> reference{};
};

// One observation of a tracked scene point.
struct TrackPoint {
  int track = 0;
  int image_index = 0;
  int x = 0;
  int y = 0;
};

// Text manifest of `key = value` lines. Paths are relative to `root`, which
// is itself relative to the manifest file. Line kinds:
//   root, depth_scale, max_altitude, zero_depth (range|missing),
//   resolution (source|WxH)                   -- at most once each
//   entry = color depth                       -- in-air RGB-D
//   image = underwater [depth]
//   pair = color depth underwater
//   compare = name candidate reference        -- color images
//   compare_depth = name candidate reference  -- relative / metric depth
//   board = underwater [depth]                -- color-board views
//   patches = file.csv                        -- name,x0,y0,x1,y1,r,g,b
//   track_image = underwater [depth]
//   tracks = file.csv                         -- track,image_index,x,y
// Paths may not contain whitespace. CSV files start with a header row.
struct DatasetManifest {
  fs::path root = ".";
  double depth_scale = 0.001;
  std::optional<double> max_altitude;
  physics::ZeroDepth zero_depth = physics::ZeroDepth::kRange;
  Resolution resolution;

  std::vector<SceneEntry> entries;
  std::vector<ObservationEntry> images;
  std::vector<PairEntry> pairs;
  std::vector<CompareEntry> compares;
  std::vector<CompareEntry> depth_compares;
  std::vector<ObservationEntry> boards;
  std::vector<PatchRegion> patches;
  std::vector<ObservationEntry> track_images;
  std::vector<TrackPoint> tracks;

  // Throws DataError if a referenced file is missing, ConfigError on syntax.
  static DatasetManifest parse(const std::string& text, const fs::path& manifest_dir,
                               const std::string& origin = "manifest");
  static DatasetManifest load(const fs::path& path);

  // Serializes scalars and line entries with paths exactly as stored (no
  // root line). Patches and tracks are not written.
  std::string to_text() const;
};

physics::ZeroDepth parse_zero_depth(const std::string& key, const std::string& value);

}  // namespace aquarender::pipeline
