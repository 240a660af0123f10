#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "aquarender/discriminator.hpp"
#include "aquarender/params.hpp"

namespace aquarender::pipeline {

// Fitted model plus (optionally) discriminator weights.
//
// On disk: a text header
//   aquarender-checkpoint
//   format_version = 1
//   u.<name> = ...        (unconstrained coordinates, one per parameter)
//   <name> = ...          (natural values; these are what load() uses)
//   noise_sigma = ...
//   max_altitude = ...
//   weights = N
//   end_header
// followed by N little-endian 32-bit floats.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  RenderModel model;
  std::vector<float> weights;

  std::string serialize() const;
  // Throws DataError on malformed or truncated input.
  static Checkpoint deserialize(std::string_view bytes, const std::string& origin = "checkpoint");

  void save(const std::filesystem::path& path) const;  // atomic
  static Checkpoint load(const std::filesystem::path& path);

  // Copies the discriminator's weights (rounded to float).
  void set_discriminator(const Discriminator& d);
  // Throws DataError if the weight count does not match the network.
  Discriminator discriminator() const;
};

}  // namespace aquarender::pipeline
