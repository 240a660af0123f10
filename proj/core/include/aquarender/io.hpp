#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "aquarender/raster.hpp"

// File I/O. Color files are 8-bit PNG read as linear value/255; depth files
// are 16-bit single-channel PNG holding range / scale.
namespace aquarender::io {

LinearImage load_image(const std::filesystem::path& path);
void save_image(const LinearImage& img, const std::filesystem::path& path);

// Stored value v becomes v * scale meters (scale 0.001 for millimeter maps).
DepthMap load_depth(const std::filesystem::path& path, double scale);
// Stores round(range / scale), saturating at 65535.
void save_depth(const DepthMap& depth, const std::filesystem::path& path, double scale);

// Area averaging when shrinking, bicubic otherwise (clamped to [0,1]).
LinearImage resample(const LinearImage& img, int width, int height);
// Zeros are treated as holes: each output pixel averages the non-zero inputs
// it covers and stays zero if there are none.
DepthMap resample_depth(const DepthMap& depth, int width, int height);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace aquarender::io
