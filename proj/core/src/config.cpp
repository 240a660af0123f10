#include "aquarender/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>

#include "aquarender/error.hpp"
#include "aquarender/io.hpp"

namespace aquarender::pipeline {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<KeyValueLine> parse_key_values(std::string_view text, const std::string& origin) {
  std::vector<KeyValueLine> out;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) {
      throw ConfigError("", origin + ":" + std::to_string(line_no) + ": empty key");
    }
    out.push_back({key, std::string(trim(line.substr(eq + 1))), line_no});
  }
  return out;
}

RunConfig RunConfig::parse(std::string_view text, const std::string& origin) {
  RunConfig cfg;
  for (const KeyValueLine& kv : parse_key_values(text, origin)) {
    if (cfg.has(kv.key)) {
      throw ConfigError(kv.key, "defined twice (" + origin + ":" + std::to_string(kv.line) + ")");
    }
    cfg.values_[kv.key] = kv.value;
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const DataError& e) {
    throw ConfigError("", std::string("cannot read config: ") + e.what());
  }
  RunConfig cfg = parse(text, path.string());
  cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }

void RunConfig::set_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError(std::string(assignment), "overrides must look like key=value");
  }
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

std::string RunConfig::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(it->second.c_str(), &end);
  if (it->second.empty() || *end != '\0' || errno != 0 || !std::isfinite(v)) {
    throw ConfigError(key, "expected a number, got '" + it->second + "'");
  }
  return v;
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(it->second.c_str(), &end, 10);
  if (it->second.empty() || *end != '\0' || errno != 0 || v < -2147483647L || v > 2147483647L) {
    throw ConfigError(key, "expected an integer, got '" + it->second + "'");
  }
  return static_cast<int>(v);
}

std::uint64_t RunConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (it->second.empty() || it->second[0] == '-' || *end != '\0' || errno != 0) {
    throw ConfigError(key, "expected a non-negative integer, got '" + it->second + "'");
  }
  return v;
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::filesystem::path RunConfig::get_path(const std::string& key) const {
  const std::filesystem::path p = get_string(key);
  if (p.empty()) throw ConfigError(key, "missing required path");
  return p.is_absolute() ? p : base_dir_ / p;
}

std::filesystem::path RunConfig::out_dir() const {
  const std::filesystem::path p = get_string("out", "out");
  return p.is_absolute() ? p : base_dir_ / p;
}

void RunConfig::require_known(std::span<const std::string_view> allowed) const {
  for (const auto& [key, value] : values_) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(key, "unknown key");
    }
  }
}

}  // namespace aquarender::pipeline
