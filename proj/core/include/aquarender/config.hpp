#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aquarender::pipeline {

// One `key = value` line of a text file.
struct KeyValueLine {
  std::string key;
  std::string value;
  int line = 0;
};

// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
// `origin` names the source in error messages.
std::vector<KeyValueLine> parse_key_values(std::string_view text, const std::string& origin);

// Flat run configuration: a key-value file plus command-line overrides
// (overrides win). Keys are unique.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig parse(std::string_view text, const std::string& origin = "config");
  static RunConfig load(const std::filesystem::path& path);

  // Accepts "key=value". Later calls override earlier values.
  void set(const std::string& key, const std::string& value);
  void set_override(std::string_view assignment);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback = "") const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Resolves a path value against the config file directory.
  std::filesystem::path get_path(const std::string& key) const;

  std::uint64_t seed() const { return get_u64("seed", 0); }
  std::filesystem::path out_dir() const;

  // Throws ConfigError naming the first key not in `allowed`.
  void require_known(std::span<const std::string_view> allowed) const;

  void set_base_dir(std::filesystem::path dir) { base_dir_ = std::move(dir); }
  const std::filesystem::path& base_dir() const { return base_dir_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_dir_ = ".";
};

}  // namespace aquarender::pipeline
