#pragma once

#include <vector>

#include "hawkesvol/event_stream.hpp"
#include "hawkesvol/moments.hpp"

namespace hawkesvol {

// Price observations (time, price); times nondecreasing.
struct PriceSeries {
  std::vector<double> times;
  std::vector<double> prices;
};

PriceSeries price_series_from_stream(const EventStream& s, double tick, double s0);
PriceSeries read_price_csv(const std::string& path);

// Previous-tick sampling on t0, t0 + step, ..., t_end.
std::vector<double> sample_on_grid(const PriceSeries& series, double t0, double t_end, double step);

struct ReturnConvention {
  double s0 = 0.0;  // reference price; <= 0 uses the first grid price
  bool log_returns = false;
};

// Returns R = (S - s0)/s0, or log(S/s0) in log mode.
std::vector<double> returns_from_prices(const std::vector<double>& grid_prices, const ReturnConvention& conv);

// (1/T) sum of squared lag-tau increments of grid returns sampled every grid_step over total time T.
double realized_variance(const std::vector<double>& grid_returns, double grid_step, double tau);

struct TsrvOptions {
  double small_scale = 1.0;
  double large_scale = 300.0;
  double session_seconds = 0.0;  // 0 = span of the data
  ReturnConvention returns;
  bool small_sample_adjustment = false;
  VolConvention vol;
};

struct TsrvResult {
  double variance = 0.0;        // per session, before clamping at 0
  double annualized_vol = 0.0;  // sqrt(max(variance, 0) * year / session)
  double naive_small_scale_vol = 0.0;
  std::size_t n_returns = 0;
};

TsrvResult tsrv(const PriceSeries& series, const TsrvOptions& opts = {});

}  // namespace hawkesvol
