#include "hawkesvol/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hawkesvol/error.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/rng.hpp"

namespace hawkesvol {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// component k = 2*i + j is the excess of intensity i driven by events of type j
inline int comp_target(int k) { return k / 2; }

}  // namespace

std::array<double, 4> initial_excess(const FullHawkesParams& p, const SimConfig& cfg) {
  if (cfg.init == InitMode::Stationary) return stationary_intensities_full(p);
  if (cfg.initial_values.size() != 4) fail_validation("explicit full-model start needs 4 excess values");
  std::array<double, 4> e{};
  for (int k = 0; k < 4; ++k) {
    if (!(cfg.initial_values[k] >= 0.0)) fail_validation("explicit excess intensities must be >= 0");
    e[k] = cfg.initial_values[k];
  }
  return e;
}

std::array<double, 4> initial_excess(const SymmetricHawkesParams& p, const SimConfig& cfg) {
  if (cfg.init == InitMode::Stationary) return stationary_intensities_full(FullHawkesParams::from_symmetric(p));
  if (cfg.initial_values.size() != 2) fail_validation("explicit symmetric start needs {lambda1, lambda2}");
  double e1 = cfg.initial_values[0] - p.mu, e2 = cfg.initial_values[1] - p.mu;
  if (!(e1 >= 0.0) || !(e2 >= 0.0)) fail_validation("explicit intensities must be >= mu");
  return {e1, 0.0, 0.0, e2};
}

SimOutput simulate_with_state(const FullHawkesParams& p, const std::array<double, 4>& initial, const SimConfig& cfg) {
  require_valid(p);
  if (!(cfg.horizon > 0.0)) fail_validation("horizon must be > 0");
  if (cfg.max_events == 0) fail_validation("max_events must be > 0");

  Rng rng = make_rng(cfg.seed, cfg.path_index);
  const double b[4] = {p.beta[0][0], p.beta[0][1], p.beta[1][0], p.beta[1][1]};
  const double a[4] = {p.alpha[0][0], p.alpha[0][1], p.alpha[1][0], p.alpha[1][1]};
  const double mu[2] = {p.mu1, p.mu2};
  double lam[4] = {initial[0], initial[1], initial[2], initial[3]};

  SimOutput out;
  EventStream& s = out.stream;
  s.horizon = cfg.horizon;
  double t = 0.0;
  for (;;) {
    // candidates in tie-break order: baseline-1, baseline-2, l11, l12, l21, l22
    double best = -std::log(uniform_open(rng)) / mu[0];
    int who = 0;
    double c = -std::log(uniform_open(rng)) / mu[1];
    if (c < best) { best = c; who = 1; }
    for (int k = 0; k < 4; ++k) {
      double logu = std::log(uniform_open(rng));
      if (lam[k] <= 0.0) continue;
      double x = 1.0 + b[k] * logu / lam[k];
      c = x > 0.0 ? -std::log(x) / b[k] : kInf;
      if (c < best) { best = c; who = 2 + k; }
    }
    const double dt = std::min(best, cfg.horizon - t);
    for (int k = 0; k < 4; ++k) lam[k] *= std::exp(-b[k] * dt);
    if (t + best > cfg.horizon) break;
    // keep the merged sequence strictly increasing even when the step underflows
    const double next = t + best;
    t = next > t ? next : std::nextafter(t, kInf);
    const int type = who < 2 ? who : comp_target(who - 2);
    (type == 0 ? s.up_times : s.down_times).push_back(t);
    // an event of type j adds alpha_ij to component (i, j)
    lam[type] += a[type];
    lam[2 + type] += a[2 + type];
    if (s.size() > cfg.max_events)
      fail_numerical("event cap exceeded (" + std::to_string(cfg.max_events) + "); parameters near criticality?");
  }
  out.final_excess = {lam[0], lam[1], lam[2], lam[3]};
  return out;
}

EventStream simulate(const FullHawkesParams& p, const SimConfig& cfg) {
  return simulate_with_state(p, initial_excess(p, cfg), cfg).stream;
}

EventStream simulate(const SymmetricHawkesParams& p, const SimConfig& cfg) {
  require_valid(p);
  auto full = FullHawkesParams::from_symmetric(p);
  return simulate_with_state(full, initial_excess(p, cfg), cfg).stream;
}

std::vector<EventStream> simulate_batch(const SymmetricHawkesParams& p, const SimConfig& cfg, std::size_t n_paths) {
  require_valid(p);
  std::vector<EventStream> out(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    SimConfig c = cfg;
    c.path_index = i;
    out[i] = simulate(p, c);
  });
  return out;
}

double PricePath::value_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return s0;
  return prices[static_cast<std::size_t>(it - times.begin()) - 1];
}

PricePath price_path(const EventStream& s, double tick, double s0) {
  PricePath path;
  path.s0 = s0;
  auto m = merge_events(s);
  path.times = m.times;
  path.prices.resize(m.times.size());
  long long level = 0;
  for (std::size_t k = 0; k < m.times.size(); ++k) {
    level += m.sides[k] == 0 ? 1 : -1;
    path.prices[k] = s0 + tick * static_cast<double>(level);
  }
  return path;
}

std::size_t count_at(const std::vector<double>& times, double t) {
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
}

PathIntensities sample_path_intensities(const FullHawkesParams& p, const EventStream& s,
                                        const std::array<double, 4>& initial) {
  const double b[4] = {p.beta[0][0], p.beta[0][1], p.beta[1][0], p.beta[1][1]};
  const double a[4] = {p.alpha[0][0], p.alpha[0][1], p.alpha[1][0], p.alpha[1][1]};
  double lam[4] = {initial[0], initial[1], initial[2], initial[3]};
  auto m = merge_events(s);
  PathIntensities r;
  r.times = m.times;
  r.sides = m.sides;
  const std::size_t n = m.times.size();
  r.lambda1_left.resize(n);
  r.lambda2_left.resize(n);
  r.lambda1_right.resize(n);
  r.lambda2_right.resize(n);
  double prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double dt = m.times[k] - prev;
    for (int c = 0; c < 4; ++c) lam[c] *= std::exp(-b[c] * dt);
    prev = m.times[k];
    r.lambda1_left[k] = p.mu1 + lam[0] + lam[1];
    r.lambda2_left[k] = p.mu2 + lam[2] + lam[3];
    int j = m.sides[k];
    lam[j] += a[j];
    lam[2 + j] += a[2 + j];
    r.lambda1_right[k] = p.mu1 + lam[0] + lam[1];
    r.lambda2_right[k] = p.mu2 + lam[2] + lam[3];
  }
  return r;
}

PathIntensities sample_path_intensities(const SymmetricHawkesParams& p, const EventStream& s) {
  auto full = FullHawkesParams::from_symmetric(p);
  return sample_path_intensities(full, s, stationary_intensities_full(full));
}

std::array<double, 4> excess_state_at(const FullHawkesParams& p, const EventStream& s, double t,
                                      const std::array<double, 4>& initial) {
  const double b[4] = {p.beta[0][0], p.beta[0][1], p.beta[1][0], p.beta[1][1]};
  const double a[4] = {p.alpha[0][0], p.alpha[0][1], p.alpha[1][0], p.alpha[1][1]};
  std::array<double, 4> out{};
  for (int c = 0; c < 4; ++c) out[c] = initial[c] * std::exp(-b[c] * t);
  const std::vector<double>* sides[2] = {&s.up_times, &s.down_times};
  for (int j = 0; j < 2; ++j) {
    for (double tk : *sides[j]) {
      if (tk > t) break;
      double w0 = std::exp(-b[j] * (t - tk)), w1 = std::exp(-b[2 + j] * (t - tk));
      out[j] += a[j] * w0;
      out[2 + j] += a[2 + j] * w1;
    }
  }
  return out;
}

std::array<double, 2> intensity_at(const SymmetricHawkesParams& p, const EventStream& s, double t) {
  auto full = FullHawkesParams::from_symmetric(p);
  auto e = excess_state_at(full, s, t, stationary_intensities_full(full));
  return {p.mu + e[0] + e[1], p.mu + e[2] + e[3]};
}

}  // namespace hawkesvol
