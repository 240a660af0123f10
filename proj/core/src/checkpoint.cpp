#include "aquarender/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>

#include "aquarender/error.hpp"
#include "aquarender/io.hpp"

namespace aquarender::pipeline {
namespace {

constexpr std::string_view kMagic = "aquarender-checkpoint";
constexpr std::string_view kEnd = "end_header";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

}  // namespace

std::string Checkpoint::serialize() const {
  std::string out;
  out += kMagic;
  out += "\nformat_version = " + std::to_string(kFormatVersion) + "\n";
  const ParamVector u = to_unconstrained(model);
  const ParamVector nat = natural_params(model);
  for (std::size_t i = 0; i < kParamCount; ++i) {
    out += "u." + std::string(param_name(i)) + " = " + fmt(u[i]) + "\n";
  }
  for (std::size_t i = 0; i < kParamCount; ++i) {
    out += std::string(param_name(i)) + " = " + fmt(nat[i]) + "\n";
  }
  out += "noise_sigma = " + fmt(model.noise_sigma) + "\n";
  out += "max_altitude = " + fmt(model.max_altitude) + "\n";
  out += "weights = " + std::to_string(weights.size()) + "\n";
  out += kEnd;
  out += '\n';
  for (float w : weights) {
    const std::uint32_t bits = to_little(std::bit_cast<std::uint32_t>(w));
    char raw[4];
    std::memcpy(raw, &bits, 4);
    out.append(raw, 4);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(std::string_view bytes, const std::string& origin) {
  const auto fail = [&](const std::string& msg) { return DataError(origin + ": " + msg); };

  std::map<std::string, std::string, std::less<>> header;
  std::size_t pos = 0;
  bool first = true;
  bool ended = false;
  while (pos < bytes.size()) {
    const auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) break;
    const std::string_view line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    if (first) {
      if (line != kMagic) throw fail("not a checkpoint file");
      first = false;
      continue;
    }
    if (line == kEnd) {
      ended = true;
      break;
    }
    const auto eq = line.find(" = ");
    if (eq == std::string_view::npos) throw fail("malformed header line '" + std::string(line) + "'");
    header[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 3));
  }
  if (first) throw fail("not a checkpoint file");
  if (!ended) throw fail("truncated header");

  const auto number = [&](const std::string& key) {
    const auto it = header.find(key);
    if (it == header.end()) throw fail("missing header field " + key);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(it->second.c_str(), &end);
    if (it->second.empty() || *end != '\0' || errno != 0 || !std::isfinite(v)) {
      throw fail("bad value for " + key);
    }
    return v;
  };

  if (number("format_version") != kFormatVersion) throw fail("unsupported format_version");

  Checkpoint ck;
  ParamVector nat{};
  for (std::size_t i = 0; i < kParamCount; ++i) nat[i] = number(std::string(param_name(i)));
  ck.model.noise_sigma = number("noise_sigma");
  ck.model.max_altitude = number("max_altitude");
  ck.model = with_natural_params(ck.model, nat);
  try {
    ck.model.validate();
  } catch (const InvalidParameterError& e) {
    throw fail(std::string("invalid model: ") + e.what());
  }

  const double count = number("weights");
  if (count < 0 || count != std::floor(count)) throw fail("bad weight count");
  const auto n = static_cast<std::size_t>(count);
  if (bytes.size() - pos != 4 * n) {
    throw fail("expected " + std::to_string(4 * n) + " weight bytes, found " +
               std::to_string(bytes.size() - pos));
  }
  ck.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + pos + 4 * i, 4);
    ck.weights[i] = std::bit_cast<float>(to_little(bits));
  }
  return ck;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  io::write_file_atomic(path, serialize());
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  return deserialize(io::read_file(path), path.string());
}

void Checkpoint::set_discriminator(const Discriminator& d) {
  const auto w = d.weights();
  weights.assign(w.begin(), w.end());
}

Discriminator Checkpoint::discriminator() const {
  Discriminator d;
  if (weights.size() != d.weight_count()) {
    throw DataError("checkpoint holds " + std::to_string(weights.size()) +
                    " weights, the discriminator needs " + std::to_string(d.weight_count()));
  }
  std::copy(weights.begin(), weights.end(), d.weights().begin());
  return d;
}

}  // namespace aquarender::pipeline
