#include "aquarender/manifest.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

#include "aquarender/config.hpp"
#include "aquarender/error.hpp"
#include "aquarender/io.hpp"

namespace aquarender::pipeline {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (sep == ' ') {
    std::istringstream in(s);
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& tok : out) {
    const auto a = tok.find_first_not_of(" \t");
    const auto b = tok.find_last_not_of(" \t");
    tok = a == std::string::npos ? std::string{} : tok.substr(a, b - a + 1);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno != 0 || !std::isfinite(d)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return d;
}

int to_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const long n = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0 || n < -2147483647L || n > 2147483647L) {
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  }
  return static_cast<int>(n);
}

Resolution parse_resolution(const std::string& v) {
  if (v == "source") return {};
  const auto x = v.find('x');
  if (x == std::string::npos) throw ConfigError("resolution", "expected 'source' or WxH");
  Resolution r{false, to_int("resolution", v.substr(0, x)), to_int("resolution", v.substr(x + 1))};
  if (r.width < 1 || r.height < 1) throw ConfigError("resolution", "dimensions must be >= 1");
  return r;
}

class Resolver {
 public:
  explicit Resolver(fs::path root) : root_(std::move(root)) {}

  fs::path operator()(const std::string& rel) const {
    const fs::path p(rel);
    const fs::path full = p.is_absolute() ? p : root_ / p;
    if (!fs::exists(full)) throw DataError("manifest references missing file " + full.string());
    return full;
  }

 private:
  fs::path root_;
};

std::vector<std::string> fields(const KeyValueLine& kv, std::size_t min, std::size_t max,
                                const std::string& origin) {
  auto parts = split(kv.value, ' ');
  if (parts.size() < min || parts.size() > max) {
    throw ConfigError(kv.key, origin + ":" + std::to_string(kv.line) + ": expected " +
                                  std::to_string(min) +
                                  (max == min ? "" : "-" + std::to_string(max)) + " fields");
  }
  return parts;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& path, std::size_t columns) {
  const std::string text = io::read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (header) {
      header = false;
      continue;
    }
    auto row = split(line, ',');
    if (row.size() != columns) {
      throw DataError(path.string() + ": expected " + std::to_string(columns) + " columns in '" +
                      line + "'");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<PatchRegion> load_patches(const fs::path& path) {
  std::vector<PatchRegion> out;
  const std::string key = "patches";
  for (const auto& row : csv_rows(path, 8)) {
    PatchRegion p;
    p.name = row[0];
    p.x0 = to_int(key, row[1]);
    p.y0 = to_int(key, row[2]);
    p.x1 = to_int(key, row[3]);
    p.y1 = to_int(key, row[4]);
    for (int c = 0; c < 3; ++c) p.reference[c] = to_double(key, row[5 + c]);
    if (p.x1 <= p.x0 || p.y1 <= p.y0) throw DataError(path.string() + ": empty patch " + p.name);
    out.push_back(p);
  }
  return out;
}

std::vector<TrackPoint> load_tracks(const fs::path& path) {
  std::vector<TrackPoint> out;
  const std::string key = "tracks";
  for (const auto& row : csv_rows(path, 4)) {
    out.push_back({to_int(key, row[0]), to_int(key, row[1]), to_int(key, row[2]),
                   to_int(key, row[3])});
  }
  return out;
}

ObservationEntry observation(const std::vector<std::string>& f, const Resolver& resolve) {
  ObservationEntry e{resolve(f[0]), std::nullopt};
  if (f.size() > 1) e.depth = resolve(f[1]);
  return e;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

physics::ZeroDepth parse_zero_depth(const std::string& key, const std::string& value) {
  if (value == "range") return physics::ZeroDepth::kRange;
  if (value == "missing") return physics::ZeroDepth::kMissing;
  throw ConfigError(key, "expected 'range' or 'missing', got '" + value + "'");
}

DatasetManifest DatasetManifest::parse(const std::string& text, const fs::path& manifest_dir,
                                       const std::string& origin) {
  const auto lines = parse_key_values(text, origin);
  DatasetManifest m;

  std::set<std::string> seen;
  for (const auto& kv : lines) {
    if (kv.key == "root" || kv.key == "depth_scale" || kv.key == "max_altitude" ||
        kv.key == "zero_depth" || kv.key == "resolution" || kv.key == "patches" ||
        kv.key == "tracks") {
      if (!seen.insert(kv.key).second) throw ConfigError(kv.key, "defined twice in " + origin);
    }
  }

  m.root = manifest_dir;
  for (const auto& kv : lines) {
    if (kv.key == "root") {
      const fs::path r(kv.value);
      m.root = r.is_absolute() ? r : manifest_dir / r;
    }
  }
  const Resolver resolve(m.root);

  for (const auto& kv : lines) {
    const std::string& k = kv.key;
    if (k == "root") {
      continue;
    } else if (k == "depth_scale") {
      m.depth_scale = to_double(k, kv.value);
      if (!(m.depth_scale > 0.0)) throw ConfigError(k, "must be > 0");
    } else if (k == "max_altitude") {
      m.max_altitude = to_double(k, kv.value);
      if (!(*m.max_altitude > 0.0)) throw ConfigError(k, "must be > 0");
    } else if (k == "zero_depth") {
      m.zero_depth = parse_zero_depth(k, kv.value);
    } else if (k == "resolution") {
      m.resolution = parse_resolution(kv.value);
    } else if (k == "entry") {
      const auto f = fields(kv, 2, 2, origin);
      m.entries.push_back({resolve(f[0]), resolve(f[1])});
    } else if (k == "image") {
      m.images.push_back(observation(fields(kv, 1, 2, origin), resolve));
    } else if (k == "pair") {
      const auto f = fields(kv, 3, 3, origin);
      m.pairs.push_back({resolve(f[0]), resolve(f[1]), resolve(f[2])});
    } else if (k == "compare" || k == "compare_depth") {
      const auto f = fields(kv, 3, 3, origin);
      (k == "compare" ? m.compares : m.depth_compares)
          .push_back({f[0], resolve(f[1]), resolve(f[2])});
    } else if (k == "board") {
      m.boards.push_back(observation(fields(kv, 1, 2, origin), resolve));
    } else if (k == "track_image") {
      m.track_images.push_back(observation(fields(kv, 1, 2, origin), resolve));
    } else if (k == "patches") {
      m.patches = load_patches(resolve(kv.value));
    } else if (k == "tracks") {
      m.tracks = load_tracks(resolve(kv.value));
    } else {
      throw ConfigError(k, "unknown manifest key in " + origin);
    }
  }

  for (const auto& t : m.tracks) {
    if (t.image_index < 0 || t.image_index >= static_cast<int>(m.track_images.size())) {
      throw DataError("track " + std::to_string(t.track) + " refers to image index " +
                      std::to_string(t.image_index) + " but the manifest lists " +
                      std::to_string(m.track_images.size()) + " track images");
    }
  }
  return m;
}

DatasetManifest DatasetManifest::load(const fs::path& path) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse(io::read_file(path), dir, path.string());
}

std::string DatasetManifest::to_text() const {
  std::ostringstream out;
  out << "depth_scale = " << fmt(depth_scale) << '\n';
  if (max_altitude) out << "max_altitude = " << fmt(*max_altitude) << '\n';
  out << "zero_depth = " << (zero_depth == physics::ZeroDepth::kRange ? "range" : "missing")
      << '\n';
  if (!resolution.source) {
    out << "resolution = " << resolution.width << 'x' << resolution.height << '\n';
  }
  const auto obs = [&](const char* key, const ObservationEntry& e) {
    out << key << " = " << e.image.generic_string();
    if (e.depth) out << ' ' << e.depth->generic_string();
    out << '\n';
  };
  for (const auto& e : entries) {
    out << "entry = " << e.color.generic_string() << ' ' << e.depth.generic_string() << '\n';
  }
  for (const auto& e : images) obs("image", e);
  for (const auto& p : pairs) {
    out << "pair = " << p.color.generic_string() << ' ' << p.depth.generic_string() << ' '
        << p.underwater.generic_string() << '\n';
  }
  for (const auto& c : compares) {
    out << "compare = " << c.name << ' ' << c.candidate.generic_string() << ' '
        << c.reference.generic_string() << '\n';
  }
  for (const auto& c : depth_compares) {
    out << "compare_depth = " << c.name << ' ' << c.candidate.generic_string() << ' '
        << c.reference.generic_string() << '\n';
  }
  for (const auto& e : boards) obs("board", e);
  for (const auto& e : track_images) obs("track_image", e);
  return out.str();
}

}  // namespace aquarender::pipeline
