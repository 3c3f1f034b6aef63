#pragma once

#include <map>
#include <optional>
#include <string>

namespace hawkesvol {

// Flat `name = value` configuration. Blank lines and lines starting with '#' are skipped.
class KvMap {
 public:
  static KvMap parse(const std::string& text);
  static KvMap read_file(const std::string& path);

  void write_file(const std::string& path) const;
  std::string to_string() const;

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value);

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

// Shortest round-tripping decimal representation.
std::string format_double(double v);

}  // namespace hawkesvol
