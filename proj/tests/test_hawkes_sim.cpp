#include <doctest.h>

#include <cmath>
#include <random>

#include "hawkesvol/error.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/params.hpp"
#include "hawkesvol/simulate.hpp"
#include "support.hpp"

using namespace hawkesvol;
namespace ts = testing_support;

namespace {

SymmetricHawkesParams sym(double mu, double as, double ac, double beta) {
  SymmetricHawkesParams p;
  p.mu = mu;
  p.alpha_s = as;
  p.alpha_c = ac;
  p.beta = beta;
  return p;
}

// integral of lambda_1 over [0, T] for a symmetric stream started from excess e0
double integrated_lambda1(const SymmetricHawkesParams& p, const EventStream& s, double e0) {
  const double t = s.horizon, b = p.beta;
  double v = p.mu * t + e0 * -std::expm1(-b * t) / b;
  for (double tk : s.up_times) v += p.alpha_s * -std::expm1(-b * (t - tk)) / b;
  for (double tk : s.down_times) v += p.alpha_c * -std::expm1(-b * (t - tk)) / b;
  return v;
}

}  // namespace

TEST_CASE("Poisson degeneration: counts match a direct exponential-interarrival oracle") {
  auto p = sym(0.01, 0.0, 0.0, 1.0);
  SimConfig cfg;
  cfg.horizon = kSessionSeconds;
  cfg.seed = 3;
  auto batch = simulate_batch(p, cfg, 500);
  std::vector<double> up, down, oracle;
  for (auto& s : batch) {
    up.push_back(static_cast<double>(s.up_times.size()));
    down.push_back(static_cast<double>(s.down_times.size()));
  }
  std::mt19937_64 rng(99);
  std::exponential_distribution<double> gap(0.01);
  for (int k = 0; k < 500; ++k) {
    double t = gap(rng);
    int n = 0;
    while (t <= cfg.horizon) {
      ++n;
      t += gap(rng);
    }
    oracle.push_back(n);
  }
  const double expected = 0.01 * kSessionSeconds;
  CHECK(std::abs(ts::mean(up) - expected) <= 3.0 * ts::sem(up));
  CHECK(std::abs(ts::mean(down) - expected) <= 3.0 * ts::sem(down));
  CHECK(std::abs(ts::mean(oracle) - expected) <= 3.0 * ts::sem(oracle));
  const double diff_se = std::sqrt(ts::variance(up) / 500 + ts::variance(oracle) / 500);
  CHECK(std::abs(ts::mean(up) - ts::mean(oracle)) <= 3.0 * diff_se);
  // Poisson dispersion
  CHECK(ts::variance(up) / ts::mean(up) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("reference set 1: counts, total intensity and terminal return variance") {
  auto p = sym(0.01, 0.4, 0.5, 1.5);
  p.tick = 0.025;
  p.s0 = 100.0;
  SimConfig cfg;
  cfg.horizon = kSessionSeconds;
  cfg.seed = 7;
  auto batch = simulate_batch(p, cfg, 1000);
  std::vector<double> n1, rate, ret;
  for (auto& s : batch) {
    n1.push_back(static_cast<double>(s.up_times.size()));
    rate.push_back(static_cast<double>(s.size()) / cfg.horizon);
    auto path = price_path(s, p.tick, p.s0);
    ret.push_back((path.value_at(cfg.horizon) - p.s0) / p.s0);
  }
  const double lstat = spectral_info(p).lambda_stat;
  CHECK(std::abs(ts::mean(n1) - lstat * cfg.horizon) <= 3.0 * ts::sem(n1));
  CHECK(std::abs(ts::mean(rate) - 0.05) <= 3.0 * ts::sem(rate));
  // the return has mean zero, so E[R^2] is the variance
  std::vector<double> sq;
  for (double r : ret) sq.push_back(r * r);
  CHECK(std::abs(ts::mean(sq) - return_variance(p, cfg.horizon)) <= 3.0 * ts::sem(sq));
}

TEST_CASE("determinism: identical inputs give identical streams") {
  auto p = sym(0.05, 0.65, 0.2, 1.7);
  SimConfig cfg;
  cfg.horizon = 3600.0;
  cfg.seed = 77;
  auto a = simulate(p, cfg);
  auto b = simulate(p, cfg);
  CHECK(a.up_times == b.up_times);
  CHECK(a.down_times == b.down_times);
  cfg.seed = 78;
  auto c = simulate(p, cfg);
  CHECK(a.up_times != c.up_times);
}

TEST_CASE("batches do not depend on worker count") {
  auto p = sym(0.05, 0.65, 0.2, 1.7);
  SimConfig cfg;
  cfg.horizon = 600.0;
  cfg.seed = 5;
  set_thread_count(1);
  auto serial = simulate_batch(p, cfg, 12);
  set_thread_count(4);
  auto threaded = simulate_batch(p, cfg, 12);
  set_thread_count(default_thread_count());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].up_times == threaded[i].up_times);
    CHECK(serial[i].down_times == threaded[i].down_times);
    SimConfig one = cfg;
    one.path_index = i;
    CHECK(simulate(p, one).up_times == serial[i].up_times);
  }
}

TEST_CASE("price_path: direct counting") {
  EventStream empty{{}, {}, 10.0};
  auto flat = price_path(empty, 0.2, 1000.0);
  CHECK(flat.value_at(0.0) == 1000.0);
  CHECK(flat.value_at(9.0) == 1000.0);

  EventStream s{{1.0}, {2.0}, 10.0};
  auto path = price_path(s, 0.2, 1000.0);
  CHECK(path.value_at(0.5) == 1000.0);
  CHECK(path.value_at(1.0) == doctest::Approx(1000.2).epsilon(1e-15));
  CHECK(path.value_at(1.5) == doctest::Approx(1000.2).epsilon(1e-15));
  CHECK(path.value_at(2.5) == 1000.0);
  CHECK(count_at(s.up_times, 1.0) == 1);
  CHECK(count_at(s.up_times, 0.999) == 0);
}

TEST_CASE("sample_path_intensities: decay without events and jumps at an up event") {
  auto p = sym(0.1, 0.4, 0.3, 2.0);
  auto full = FullHawkesParams::from_symmetric(p);
  const std::array<double, 4> e0 = {0.8, 0.0, 0.0, 0.5};
  EventStream empty{{}, {}, 5.0};
  for (double t : {0.0, 0.3, 1.0, 4.0}) {
    auto e = excess_state_at(full, empty, t, e0);
    CHECK(p.mu + e[0] + e[1] == doctest::Approx(p.mu + 0.8 * std::exp(-2.0 * t)).epsilon(1e-14));
    CHECK(p.mu + e[2] + e[3] == doctest::Approx(p.mu + 0.5 * std::exp(-2.0 * t)).epsilon(1e-14));
  }

  EventStream one{{1.25}, {}, 5.0};
  auto r = sample_path_intensities(full, one, e0);
  REQUIRE(r.times.size() == 1);
  CHECK(r.lambda1_left[0] == doctest::Approx(p.mu + 0.8 * std::exp(-2.5)).epsilon(1e-14));
  CHECK(r.lambda1_right[0] - r.lambda1_left[0] == doctest::Approx(p.alpha_s).epsilon(1e-14));
  CHECK(r.lambda2_right[0] - r.lambda2_left[0] == doctest::Approx(p.alpha_c).epsilon(1e-14));

  // stationary start, no events: relaxes from lambda_stat toward mu
  const double lstat = spectral_info(p).lambda_stat;
  auto lam = intensity_at(p, EventStream{{}, {}, 5.0}, 3.0);
  CHECK(lam[0] == doctest::Approx(p.mu + (lstat - p.mu) * std::exp(-6.0)).epsilon(1e-14));
  CHECK(lam[1] == doctest::Approx(lam[0]).epsilon(1e-15));
}

TEST_CASE("ergodic average of lambda_1 over a 50,000-event path is within 2% of lambda_stat") {
  auto p = sym(0.1, 0.3, 0.2, 2.0);
  const double lstat = spectral_info(p).lambda_stat;
  SimConfig cfg;
  cfg.horizon = 50000.0 / (2.0 * lstat);
  cfg.seed = 8;
  auto s = simulate(p, cfg);
  CHECK(s.size() > 45000);
  const double avg = integrated_lambda1(p, s, lstat - p.mu) / cfg.horizon;
  CHECK(std::abs(avg / lstat - 1.0) < 0.02);
}

TEST_CASE("a decaying component is exhausted with probability exp(-lambda/beta)") {
  FullHawkesParams p;
  p.mu1 = p.mu2 = 1e-12;
  p.alpha = {{{0.0, 0.0}, {0.0, 0.0}}};
  p.beta = {{{1.5, 1.0}, {1.0, 1.0}}};
  const double l0 = 2.1;
  SimConfig cfg;
  cfg.horizon = 60.0;
  cfg.seed = 123;
  cfg.init = InitMode::Explicit;
  cfg.initial_values = {l0, 0.0, 0.0, 0.0};
  const int trials = 10000;
  int quiet = 0;
  for (int k = 0; k < trials; ++k) {
    cfg.path_index = static_cast<std::uint64_t>(k);
    auto s = simulate(p, cfg);
    if (s.up_times.empty()) ++quiet;
  }
  const double prob = std::exp(-l0 / 1.5);
  const double freq = static_cast<double>(quiet) / trials;
  CHECK(std::abs(freq - prob) <= 3.0 * std::sqrt(prob * (1.0 - prob) / trials));
}

TEST_CASE("mean intensity from a non-stationary start relaxes at rate xi2") {
  auto p = sym(0.05, 0.65, 0.2, 1.7);
  auto full = FullHawkesParams::from_symmetric(p);
  const double lstat = spectral_info(p).lambda_stat;
  SimConfig cfg;
  cfg.horizon = 4.0;
  cfg.seed = 17;
  cfg.init = InitMode::Explicit;
  cfg.initial_values = {lstat + 2.0, lstat + 2.0};
  const auto e0 = initial_excess(p, cfg);
  std::vector<double> grid = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  std::vector<double> acc(grid.size(), 0.0);
  const int paths = 20000;
  for (int k = 0; k < paths; ++k) {
    cfg.path_index = static_cast<std::uint64_t>(k);
    auto s = simulate(p, cfg);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      auto e = excess_state_at(full, s, grid[g], e0);
      acc[g] += e[0] + e[1] + e[2] + e[3];
    }
  }
  std::vector<double> logs;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    // excess of the total intensity over its stationary value
    const double excess = acc[g] / paths + 2.0 * p.mu - 2.0 * lstat;
    REQUIRE(excess > 0.0);
    logs.push_back(std::log(excess));
  }
  const double xi2 = spectral_info(p).xi2;
  CHECK(std::abs(ts::slope(grid, logs) / xi2 - 1.0) < 0.15);
}

TEST_CASE("configuration errors and the event cap") {
  auto p = sym(0.05, 0.65, 0.2, 1.7);
  SimConfig cfg;
  cfg.horizon = 0.0;
  CHECK_THROWS_AS(simulate(p, cfg), Error);
  cfg.horizon = 1000.0;
  cfg.max_events = 5;
  try {
    simulate(p, cfg);
    FAIL("expected the event cap to trigger");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }
  cfg.max_events = 1000000;
  cfg.init = InitMode::Explicit;
  cfg.initial_values = {0.01, 0.2};
  CHECK_THROWS_AS(simulate(p, cfg), Error);
  CHECK_THROWS_AS(simulate(sym(0.05, 1.0, 0.8, 1.7), SimConfig{}), Error);
}
