#include "hawkesvol/kv_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hawkesvol/error.hpp"

namespace hawkesvol {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

KvMap KvMap::parse(const std::string& text) {
  KvMap kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos)
      fail_validation("config line " + std::to_string(lineno) + ": expected name = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) fail_validation("config line " + std::to_string(lineno) + ": empty name");
    kv.values_[key] = value;
  }
  return kv;
}

KvMap KvMap::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string KvMap::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

void KvMap::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail_io("cannot write " + path);
  out << to_string();
}

std::optional<std::string> KvMap::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KvMap::get_double(const std::string& key) const {
  auto v = get(key);
  if (!v) fail_validation("missing config key '" + key + "'");
  double out = 0.0;
  const char* b = v->data();
  const char* e = b + v->size();
  auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) fail_validation("config key '" + key + "' is not a number: " + *v);
  return out;
}

double KvMap::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

void KvMap::set(const std::string& key, double value) { values_[key] = format_double(value); }

}  // namespace hawkesvol
