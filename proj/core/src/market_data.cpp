#include "hawkesvol/market_data.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <fstream>
#include <sstream>

#include <gsl/gsl_cdf.h>

#include "hawkesvol/error.hpp"

namespace hawkesvol {

namespace {

constexpr std::int64_t kDay = 86400;

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool accepted_venue(const QuoteRecord& r, const SessionSpec& s) { return s.venue.empty() || r.venue == s.venue; }

bool in_session(const QuoteRecord& r, const SessionSpec& s) {
  const double sod = seconds_of_day(r.timestamp);
  return sod >= s.start && sod < s.end;
}

void require_sorted(const std::vector<QuoteRecord>& records) {
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp < records[i - 1].timestamp)
      fail_validation("quote records are not sorted by timestamp (record " + std::to_string(i) + ")");
}

}  // namespace

std::int64_t parse_timestamp(const std::string& text) {
  int y, mo, d, h, mi, s;
  char sep;
  if (text.size() >= 19 && std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s) == 7 &&
      (sep == 'T' || sep == ' ')) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 60) fail_validation("invalid timestamp " + text);
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * kDay + h * 3600 + mi * 60 + s;
  }
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &pos);
  } catch (...) {
    fail_validation("invalid timestamp " + text);
  }
  if (pos != text.size()) fail_validation("invalid timestamp " + text);
  return v;
}

std::string date_of(std::int64_t timestamp) {
  using namespace std::chrono;
  const sys_days sd{days{floor_div(timestamp, kDay)}};
  const year_month_day ymd{sd};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

double seconds_of_day(std::int64_t timestamp) {
  return static_cast<double>(timestamp - floor_div(timestamp, kDay) * kDay);
}

std::vector<QuoteRecord> parse_quote_csv(const std::string& text) {
  std::vector<QuoteRecord> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("timestamp", 0) == 0) continue;
    auto f = split_csv(line);
    if (f.size() < 3) fail_validation("quote csv line " + std::to_string(lineno) + ": expected timestamp,bid,ask,venue");
    QuoteRecord r;
    r.timestamp = parse_timestamp(f[0]);
    try {
      r.bid = std::stod(f[1]);
      r.ask = std::stod(f[2]);
    } catch (...) {
      fail_validation("quote csv line " + std::to_string(lineno) + ": bad price");
    }
    r.venue = f.size() > 3 ? f[3] : "";
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<QuoteRecord> read_quote_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open quote csv " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_quote_csv(ss.str());
}

std::map<std::string, std::vector<QuoteRecord>> split_by_date(const std::vector<QuoteRecord>& records) {
  std::map<std::string, std::vector<QuoteRecord>> out;
  for (const auto& r : records) out[date_of(r.timestamp)].push_back(r);
  return out;
}

KvMap IngestDiagnostics::to_kv() const {
  KvMap kv;
  kv.set("accepted", std::to_string(accepted));
  kv.set("out_of_session", std::to_string(out_of_session));
  kv.set("other_venue", std::to_string(other_venue));
  kv.set("crossed", std::to_string(crossed));
  kv.set("rounded", std::to_string(rounded));
  kv.set("changes", std::to_string(changes));
  kv.set("unit_events", std::to_string(unit_events));
  kv.set("first_mid", first_mid);
  kv.set("last_mid", last_mid);
  return kv;
}

IngestResult mid_price_events(const std::vector<QuoteRecord>& records, const SessionSpec& session, double tick) {
  if (!(tick > 0)) fail_validation("tick must be > 0");
  if (!(session.end > session.start)) fail_validation("session end must follow start");
  require_sorted(records);

  IngestResult res;
  auto& d = res.diagnostics;
  res.stream.horizon = session.length();

  bool have_base = false;
  double level = 0.0;  // baseline plus accumulated whole ticks
  std::int64_t slot_second = 0;
  std::vector<int> slot;  // unit moves (+1/-1) stamped in slot_second
  auto flush = [&] {
    if (slot.empty()) return;
    const double t = seconds_of_day(slot_second) - session.start;
    const double k = static_cast<double>(slot.size());
    for (std::size_t j = 0; j < slot.size(); ++j) {
      const double tj = t + static_cast<double>(j) / k;
      (slot[j] > 0 ? res.stream.up_times : res.stream.down_times).push_back(tj);
    }
    d.unit_events += slot.size();
    slot.clear();
  };

  for (const auto& r : records) {
    if (!accepted_venue(r, session)) {
      ++d.other_venue;
      continue;
    }
    if (!in_session(r, session)) {
      ++d.out_of_session;
      continue;
    }
    if (!(r.bid > 0) || r.ask < r.bid) {
      ++d.crossed;
      continue;
    }
    ++d.accepted;
    const double mid = 0.5 * (r.bid + r.ask);
    d.last_mid = mid;
    if (!have_base) {
      have_base = true;
      level = mid;
      d.first_mid = mid;
      slot_second = r.timestamp;
      continue;
    }
    const double x = (mid - level) / tick;
    const double k = std::round(x);
    if (std::abs(x - k) > 1e-6) ++d.rounded;
    if (k == 0.0) continue;
    ++d.changes;
    if (r.timestamp != slot_second) {
      flush();
      slot_second = r.timestamp;
    }
    const int dir = k > 0 ? 1 : -1;
    for (long long u = 0; u < std::llabs(static_cast<long long>(k)); ++u) slot.push_back(dir);
    level += k * tick;
  }
  flush();
  validate_stream(res.stream);
  return res;
}

double minimal_tick_stats(const std::vector<QuoteRecord>& records, const SessionSpec& session, double tick) {
  if (!(tick > 0)) fail_validation("tick must be > 0");
  require_sorted(records);
  bool have = false;
  double prev = 0.0;
  std::size_t changes = 0, unit = 0;
  for (const auto& r : records) {
    if (!accepted_venue(r, session) || !in_session(r, session) || !(r.bid > 0) || r.ask < r.bid) continue;
    const double mid = 0.5 * (r.bid + r.ask);
    if (have) {
      const double steps = std::abs(mid - prev) / tick;
      if (steps > 1e-9) {
        ++changes;
        if (std::abs(steps - 1.0) < 1e-6) ++unit;
      }
    }
    prev = mid;
    have = true;
  }
  if (changes == 0) fail_validation("no mid-price changes");
  return 100.0 * static_cast<double>(unit) / static_cast<double>(changes);
}

std::vector<EventStream> intraday_windows(const EventStream& s, double window) {
  if (!(window > 0)) fail_validation("window must be > 0");
  std::vector<EventStream> out;
  const auto n = static_cast<std::size_t>(std::floor(s.horizon / window + 1e-9));
  for (std::size_t k = 1; k <= n; ++k) {
    const double h = window * static_cast<double>(k);
    EventStream p;
    p.horizon = h;
    for (double t : s.up_times)
      if (t <= h) p.up_times.push_back(t);
    for (double t : s.down_times)
      if (t <= h) p.down_times.push_back(t);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<IntradayPoint> intraday_vol(const EventStream& s, const SymmetricHawkesParams& init, double window,
                                        const FitOptions& opts) {
  std::vector<IntradayPoint> out;
  SymmetricHawkesParams guess = init;
  for (const auto& prefix : intraday_windows(s, window)) {
    IntradayPoint pt;
    pt.horizon = prefix.horizon;
    try {
      auto fit = fit_symmetric_reparam(prefix, guess, opts);
      pt.sigma_ann = fit.value("sigma_ann");
      pt.std_error = fit.std_error("sigma_ann");
      pt.converged = fit.converged;
      if (fit.converged) guess = symmetric_from_fit(fit, init.tick, init.s0);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Validation && e.kind() != ErrorKind::Numerical) throw;
      pt.sigma_ann = std::numeric_limits<double>::quiet_NaN();
      pt.std_error = std::numeric_limits<double>::quiet_NaN();
    }
    out.push_back(pt);
  }
  return out;
}

TrendTest cumulative_trend_test(const std::vector<double>& x) {
  std::vector<double> k, u;
  double prev = 0.0;
  std::size_t prev_k = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) continue;
    const double ki = static_cast<double>(i + 1);
    // skipped prefixes fold into the next innovation, spread evenly
    const double span = ki - static_cast<double>(prev_k);
    u.push_back((ki * x[i] - static_cast<double>(prev_k) * prev) / span);
    k.push_back(ki);
    prev = x[i];
    prev_k = i + 1;
  }
  TrendTest t;
  t.n = u.size();
  if (t.n < 3) fail_validation("trend test needs at least three fitted prefixes");
  const double n = static_cast<double>(t.n);
  double mk = 0.0, mu = 0.0;
  for (std::size_t i = 0; i < t.n; ++i) {
    mk += k[i] / n;
    mu += u[i] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t.n; ++i) {
    sxx += (k[i] - mk) * (k[i] - mk);
    sxy += (k[i] - mk) * (u[i] - mu);
  }
  t.slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < t.n; ++i) {
    const double r = u[i] - mu - t.slope * (k[i] - mk);
    sse += r * r;
  }
  const double se = std::sqrt(sse / (n - 2.0) / sxx);
  if (!(se > 0)) {
    t.t_stat = t.slope == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), t.slope);
    t.p_value = t.slope == 0.0 ? 1.0 : 0.0;
    return t;
  }
  t.t_stat = t.slope / se;
  t.p_value = 2.0 * gsl_cdf_tdist_Q(std::abs(t.t_stat), n - 2.0);
  return t;
}

}  // namespace hawkesvol
