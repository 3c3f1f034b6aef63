#include "hawkesvol/event_stream.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hawkesvol/error.hpp"
#include "hawkesvol/kv_config.hpp"

namespace hawkesvol {

namespace {

void check_side(const std::vector<double>& t, double horizon, const char* name) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || t[i] < 0.0 || t[i] > horizon)
      fail_validation(std::string(name) + " time out of [0, horizon] at index " + std::to_string(i));
    if (i > 0 && !(t[i] > t[i - 1]))
      fail_validation(std::string(name) + " times not strictly increasing at index " + std::to_string(i));
  }
}

}  // namespace

void validate_stream(const EventStream& s) {
  if (!(s.horizon > 0.0) || !std::isfinite(s.horizon)) fail_validation("stream horizon must be > 0");
  check_side(s.up_times, s.horizon, "up");
  check_side(s.down_times, s.horizon, "down");
  std::size_t i = 0, j = 0;
  while (i < s.up_times.size() && j < s.down_times.size()) {
    if (s.up_times[i] == s.down_times[j]) fail_validation("time appears on both sides: not a simple point process");
    if (s.up_times[i] < s.down_times[j]) ++i; else ++j;
  }
}

MergedEvents merge_events(const EventStream& s) {
  MergedEvents m;
  m.horizon = s.horizon;
  m.times.reserve(s.size());
  m.sides.reserve(s.size());
  std::size_t i = 0, j = 0;
  while (i < s.up_times.size() || j < s.down_times.size()) {
    bool take_up = j >= s.down_times.size() || (i < s.up_times.size() && s.up_times[i] <= s.down_times[j]);
    if (take_up) {
      m.times.push_back(s.up_times[i++]);
      m.sides.push_back(0);
    } else {
      m.times.push_back(s.down_times[j++]);
      m.sides.push_back(1);
    }
  }
  return m;
}

EventStream truncate_stream(const EventStream& s, double t) {
  EventStream out;
  out.horizon = t;
  for (double x : s.up_times)
    if (x < t) out.up_times.push_back(x);
  for (double x : s.down_times)
    if (x < t) out.down_times.push_back(x);
  return out;
}

std::string event_csv_string(const EventStream& s) {
  std::string out = "# horizon=" + format_double(s.horizon) + "\ntime_s,direction\n";
  auto m = merge_events(s);
  for (std::size_t k = 0; k < m.times.size(); ++k)
    out += format_double(m.times[k]) + (m.sides[k] == 0 ? ",1\n" : ",-1\n");
  return out;
}

void write_event_csv(const std::string& path, const EventStream& s) {
  std::ofstream out(path);
  if (!out) fail_io("cannot write " + path);
  out << event_csv_string(s);
  if (!out) fail_io("write failed: " + path);
}

EventStream parse_event_csv(const std::string& text) {
  EventStream s;
  std::istringstream in(text);
  std::string line;
  bool have_horizon = false, header_seen = false;
  double last = 0.0;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("horizon=");
      if (pos != std::string::npos) {
        s.horizon = std::stod(line.substr(pos + 8));
        have_horizon = true;
      }
      continue;
    }
    if (!header_seen && line.rfind("time_s", 0) == 0) {
      header_seen = true;
      continue;
    }
    auto comma = line.find(',');
    if (comma == std::string::npos) fail_validation("event csv line " + std::to_string(lineno) + ": expected time_s,direction");
    double t = 0.0;
    int dir = 0;
    auto r1 = std::from_chars(line.data(), line.data() + comma, t);
    auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), dir);
    if (r1.ec != std::errc() || r2.ec != std::errc() || (dir != 1 && dir != -1))
      fail_validation("event csv line " + std::to_string(lineno) + ": malformed record");
    (dir == 1 ? s.up_times : s.down_times).push_back(t);
    last = std::max(last, t);
  }
  if (!have_horizon) s.horizon = last > 0.0 ? last : 1.0;
  validate_stream(s);
  return s;
}

EventStream read_event_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open event csv " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_event_csv(ss.str());
}

}  // namespace hawkesvol
