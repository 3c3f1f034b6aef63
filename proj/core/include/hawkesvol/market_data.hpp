#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hawkesvol/event_stream.hpp"
#include "hawkesvol/kv_config.hpp"
#include "hawkesvol/mle.hpp"

namespace hawkesvol {

struct QuoteRecord {
  std::int64_t timestamp = 0;  // seconds since the epoch, exchange-local clock
  double bid = 0.0;
  double ask = 0.0;
  std::string venue;
};

struct SessionSpec {
  double start = 10.0 * 3600.0;  // seconds of day, inclusive
  double end = 15.5 * 3600.0;    // seconds of day, exclusive
  std::string venue;             // empty accepts every venue
  double length() const { return end - start; }
};

// Accepts ISO-8601 (YYYY-MM-DDTHH:MM:SS, optional trailing Z) or integer epoch seconds.
std::int64_t parse_timestamp(const std::string& text);
std::string date_of(std::int64_t timestamp);
double seconds_of_day(std::int64_t timestamp);

std::vector<QuoteRecord> parse_quote_csv(const std::string& text);
std::vector<QuoteRecord> read_quote_csv(const std::string& path);

// Records grouped by calendar date, input order kept inside each day.
std::map<std::string, std::vector<QuoteRecord>> split_by_date(const std::vector<QuoteRecord>& records);

struct IngestDiagnostics {
  std::size_t accepted = 0;
  std::size_t out_of_session = 0;
  std::size_t other_venue = 0;
  std::size_t crossed = 0;
  std::size_t rounded = 0;  // changes that were not an integer number of ticks
  std::size_t changes = 0;  // nonzero mid changes
  std::size_t unit_events = 0;
  double first_mid = 0.0;
  double last_mid = 0.0;
  KvMap to_kv() const;
};

struct IngestResult {
  EventStream stream;  // times relative to session start, horizon = session length
  IngestDiagnostics diagnostics;
};

// One trading day of quotes to unit-tick events; k unit moves in one second go to t + j/k.
IngestResult mid_price_events(const std::vector<QuoteRecord>& records, const SessionSpec& session, double tick);

// 100 * (#changes of exactly one tick) / (#changes) over accepted mids.
double minimal_tick_stats(const std::vector<QuoteRecord>& records, const SessionSpec& session, double tick);

// Growing prefixes [0, window], [0, 2 window], ...
std::vector<EventStream> intraday_windows(const EventStream& s, double window = 600.0);

struct IntradayPoint {
  double horizon = 0.0;
  double sigma_ann = 0.0;  // NaN when the prefix could not be fitted
  double std_error = 0.0;
  bool converged = false;
};

// Reparametrized symmetric fit on every prefix; the previous estimate seeds the next fit.
std::vector<IntradayPoint> intraday_vol(const EventStream& s, const SymmetricHawkesParams& init, double window = 600.0,
                                        const FitOptions& opts = {});

struct TrendTest {
  double slope = 0.0;  // per window
  double t_stat = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n = 0;
};

// Slope test for estimates on growing prefixes. Prefix k averages the first k window innovations,
// so u_k = k x_k - (k - 1) x_{k-1} undoes the nesting and OLS on u_k is the GLS test.
TrendTest cumulative_trend_test(const std::vector<double>& prefix_estimates);

}  // namespace hawkesvol
