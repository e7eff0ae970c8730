#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace misc {

/// Flat `section.key = value` settings. '#' starts a comment; blank lines
/// are ignored; values are trimmed.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

  /// Throws ConfigError naming every key outside `known`.
  void require_known(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Canonical `key = value` lines in sorted order.
  std::string canonical() const;

  /// Directory of the loaded file; relative paths in values resolve against it.
  const std::filesystem::path& base() const { return base_; }
  std::filesystem::path resolve(const std::string& value) const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_;
};

}  // namespace misc
