#include "hawkesvol/realized_vol.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hawkesvol/error.hpp"
#include "hawkesvol/simulate.hpp"

namespace hawkesvol {

PriceSeries price_series_from_stream(const EventStream& s, double tick, double s0) {
  auto path = price_path(s, tick, s0);
  PriceSeries out;
  out.times.reserve(path.times.size() + 2);
  out.prices.reserve(path.times.size() + 2);
  out.times.push_back(0.0);
  out.prices.push_back(s0);
  for (std::size_t k = 0; k < path.times.size(); ++k) {
    out.times.push_back(path.times[k]);
    out.prices.push_back(path.prices[k]);
  }
  if (out.times.back() < s.horizon) {
    out.times.push_back(s.horizon);
    out.prices.push_back(out.prices.back());
  }
  return out;
}

PriceSeries read_price_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io("cannot open price csv " + path);
  PriceSeries s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("time", 0) == 0) continue;
    auto comma = line.find(',');
    double t = 0.0, p = 0.0;
    if (comma == std::string::npos ||
        std::from_chars(line.data(), line.data() + comma, t).ec != std::errc() ||
        std::from_chars(line.data() + comma + 1, line.data() + line.size(), p).ec != std::errc())
      fail_validation("price csv line " + std::to_string(lineno) + ": expected time,price");
    if (!s.times.empty() && t < s.times.back()) fail_validation("price csv times must be nondecreasing");
    s.times.push_back(t);
    s.prices.push_back(p);
  }
  if (s.times.empty()) fail_validation("price csv is empty");
  return s;
}

std::vector<double> sample_on_grid(const PriceSeries& series, double t0, double t_end, double step) {
  if (series.times.empty()) fail_validation("empty price series");
  if (!(step > 0)) fail_validation("grid step must be > 0");
  const auto n = static_cast<std::size_t>(std::floor((t_end - t0) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  std::size_t j = 0;
  double last = series.prices.front();
  for (std::size_t i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) * step;
    while (j < series.times.size() && series.times[j] <= t) last = series.prices[j++];
    out[i] = last;
  }
  return out;
}

std::vector<double> returns_from_prices(const std::vector<double>& gp, const ReturnConvention& conv) {
  if (gp.empty()) return {};
  const double s0 = conv.s0 > 0.0 ? conv.s0 : gp.front();
  std::vector<double> r(gp.size());
  for (std::size_t i = 0; i < gp.size(); ++i) r[i] = conv.log_returns ? std::log(gp[i] / s0) : (gp[i] - s0) / s0;
  return r;
}

double realized_variance(const std::vector<double>& r, double grid_step, double tau) {
  const double ratio = tau / grid_step;
  const auto lag = static_cast<std::size_t>(std::llround(ratio));
  if (lag == 0 || std::abs(ratio - static_cast<double>(lag)) > 1e-9 * std::max(1.0, ratio))
    fail_validation("lag mismatch: tau must be a multiple of the grid spacing");
  if (r.size() < 2) fail_validation("realized variance needs at least two observations");
  const double total = grid_step * static_cast<double>(r.size() - 1);
  double acc = 0.0;
  for (std::size_t i = lag; i < r.size(); i += lag) acc += (r[i] - r[i - lag]) * (r[i] - r[i - lag]);
  return acc / total;
}

TsrvResult tsrv(const PriceSeries& series, const TsrvOptions& opts) {
  if (series.times.empty()) fail_validation("tsrv: empty series");
  const double t0 = series.times.front();
  const double span = series.times.back() - t0;
  const double session = opts.session_seconds > 0.0 ? opts.session_seconds : span;
  const double ratio = opts.large_scale / opts.small_scale;
  const auto k = static_cast<std::size_t>(std::llround(ratio));
  if (k < 2 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * ratio)
    fail_validation("tsrv: large scale must be an integer multiple (>= 2) of the small scale");
  if (span < 3.0 * opts.large_scale) fail_validation("tsrv: insufficient data, need at least three large scales");

  auto grid = sample_on_grid(series, t0, t0 + span, opts.small_scale);
  auto y = returns_from_prices(grid, opts.returns);
  const std::size_t n = y.size() - 1;  // number of small-scale returns

  double rv_all = 0.0;
  for (std::size_t i = 1; i <= n; ++i) rv_all += (y[i] - y[i - 1]) * (y[i] - y[i - 1]);
  double rv_avg = 0.0;
  for (std::size_t i = k; i <= n; ++i) rv_avg += (y[i] - y[i - k]) * (y[i] - y[i - k]);
  rv_avg /= static_cast<double>(k);
  const double nbar = static_cast<double>(n - k + 1) / static_cast<double>(k);
  double var = rv_avg - nbar / static_cast<double>(n) * rv_all;
  if (opts.small_sample_adjustment) var /= (1.0 - nbar / static_cast<double>(n));

  TsrvResult res;
  res.variance = var;
  res.n_returns = n;
  const double ann = opts.vol.year_seconds / session;
  res.annualized_vol = std::sqrt(std::max(var, 0.0) * ann);
  res.naive_small_scale_vol = std::sqrt(rv_all * ann);
  return res;
}

}  // namespace hawkesvol
