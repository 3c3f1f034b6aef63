#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hawkesvol {

struct EventStream {
  std::vector<double> up_times;
  std::vector<double> down_times;
  double horizon = 0.0;

  std::size_t size() const { return up_times.size() + down_times.size(); }
};

// Throws Validation naming the first violated invariant.
void validate_stream(const EventStream& s);

// Both sides merged in time order; side 0 = up, 1 = down.
struct MergedEvents {
  std::vector<double> times;
  std::vector<std::uint8_t> sides;
  double horizon = 0.0;
};

MergedEvents merge_events(const EventStream& s);

// Events strictly before t become the prefix, horizon t.
EventStream truncate_stream(const EventStream& s, double t);

// CSV `time_s,direction` with a leading `# horizon=<seconds>` line.
void write_event_csv(const std::string& path, const EventStream& s);
std::string event_csv_string(const EventStream& s);
EventStream read_event_csv(const std::string& path);
EventStream parse_event_csv(const std::string& text);

}  // namespace hawkesvol
