#pragma once

// Flat line-oriented configuration: one `key = value` per line, `#` starts a comment.
// List values are JSON arrays, e.g. `layer.eps = [0.08, 0.07]`.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metastab/linalg.hpp"

namespace metastab {

class Config {
 public:
  Config() = default;

  /// Throws ConfigError on malformed lines or repeated keys.
  static Config parse(const std::string& text);
  /// Throws IoError if the file cannot be read.
  static Config load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// Overrides drop the original text, so source() becomes empty.
  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  /// Text the config was parsed from (empty if built programmatically or overridden).
  const std::string& source() const noexcept { return source_; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// JSON array of numbers.
  std::optional<Vec> get_list(const std::string& key) const;
  /// JSON array of arrays of numbers.
  std::optional<std::vector<Vec>> get_points(const std::string& key) const;

  /// Keys not in `known`.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

  /// "key=value\n" lines in key order, independent of spacing, comments and line order.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), 16 hex digits.
  std::string hash() const;

 private:
  std::map<std::string, std::string> entries_;
  std::string source_;
};

/// FNV-1a 64-bit hash as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace metastab
