#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace sposkit {

/// Flat `key = value` configuration. Blank lines and text after `#` are
/// ignored; keys must be unique within one file.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<input>");
  static KeyValueConfig parse_string(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool contains(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  // Applies "key=value" (throws ConfigError when malformed).
  void apply_override(const std::string& assignment);

  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Keys in sorted order, one `key = value` per line.
  std::string to_string() const;

 private:
  std::map<std::string, std::string> entries_;
};

std::string trim(const std::string& s);
std::vector<std::string> split_list(const std::string& s, char sep = ',');

double parse_double(const std::string& key, const std::string& value);
std::size_t parse_size(const std::string& key, const std::string& value);
std::uint64_t parse_u64(const std::string& key, const std::string& value);

}  // namespace sposkit
