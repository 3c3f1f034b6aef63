#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "hawkesvol/error.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/params.hpp"
#include "hawkesvol/simulate.hpp"
#include "support.hpp"

using namespace hawkesvol;
namespace ts = testing_support;

namespace {

SymmetricHawkesParams sym(double mu, double as, double ac, double beta, double tick = 1.0, double s0 = 1.0) {
  SymmetricHawkesParams p;
  p.mu = mu;
  p.alpha_s = as;
  p.alpha_c = ac;
  p.beta = beta;
  p.tick = tick;
  p.s0 = s0;
  return p;
}

// First and second moments of z = (N1, N2, lambda1, lambda2) from the generator of the
// affine jump process, integrated with RK4 from a deterministic start.
struct MomentOde {
  Eigen::Vector4d m;
  Eigen::Matrix4d s;
};

MomentOde integrate_moments(const SymmetricHawkesParams& p, double l1, double l2, double t, int steps = 4000) {
  Eigen::Vector4d c(0.0, 0.0, p.beta * p.mu, p.beta * p.mu);
  Eigen::Matrix4d b = Eigen::Matrix4d::Zero();
  b(2, 2) = b(3, 3) = -p.beta;
  const Eigen::Vector4d jump[2] = {Eigen::Vector4d(1.0, 0.0, p.alpha_s, p.alpha_c),
                                   Eigen::Vector4d(0.0, 1.0, p.alpha_c, p.alpha_s)};
  auto rhs = [&](const MomentOde& x) {
    MomentOde d;
    d.m = c + b * x.m;
    d.s = c * x.m.transpose() + b * x.s;
    for (int e = 0; e < 2; ++e) {
      const int k = 2 + e;  // rate of event e is lambda_{e+1}
      d.m += jump[e] * x.m(k);
      d.s += jump[e] * x.s.row(k) + x.m(k) * 0.5 * jump[e] * jump[e].transpose();
    }
    d.s = (d.s + d.s.transpose()).eval();
    return d;
  };
  MomentOde x;
  x.m = Eigen::Vector4d(0.0, 0.0, l1, l2);
  x.s = x.m * x.m.transpose();
  const double h = t / steps;
  for (int i = 0; i < steps; ++i) {
    auto k1 = rhs(x);
    MomentOde y{x.m + 0.5 * h * k1.m, x.s + 0.5 * h * k1.s};
    auto k2 = rhs(y);
    y = {x.m + 0.5 * h * k2.m, x.s + 0.5 * h * k2.s};
    auto k3 = rhs(y);
    y = {x.m + h * k3.m, x.s + h * k3.s};
    auto k4 = rhs(y);
    x.m += h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
    x.s += h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
  }
  return x;
}

std::vector<SymmetricHawkesParams> random_stable(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SymmetricHawkesParams> out;
  while (static_cast<int>(out.size()) < n) {
    const double beta = 0.2 + 3.0 * u(rng);
    auto p = sym(0.005 + 0.2 * u(rng), beta * u(rng), beta * u(rng), beta, 0.01 + 0.1 * u(rng), 10.0 + 90.0 * u(rng));
    if (p.alpha_s + p.alpha_c < 0.95 * beta) out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("expected_intensity: stationary pair is a fixed point and the long-run limit") {
  auto p = sym(0.01, 0.4, 0.5, 1.5);
  const double l = spectral_info(p).lambda_stat;
  for (double dt : {0.0, 0.1, 1.0, 10.0, 1000.0}) {
    auto e = expected_intensity(p, {l, l}, dt);
    CHECK(e[0] == doctest::Approx(l).epsilon(1e-13));
    CHECK(e[1] == doctest::Approx(l).epsilon(1e-13));
  }
  auto far = expected_intensity(p, {0.7, 0.02}, 500.0);
  const double limit = -p.mu * p.beta / spectral_info(p).xi2;
  CHECK(far[0] == doctest::Approx(limit).epsilon(1e-12));
  CHECK(far[1] == doctest::Approx(limit).epsilon(1e-12));
}

TEST_CASE("expected_intensity: matches the moment ODE from a generic start") {
  for (auto& p : random_stable(20, 4)) {
    for (double dt : {0.3, 2.0, 9.0}) {
      auto e = expected_intensity(p, {0.4, 0.05}, dt);
      auto ode = integrate_moments(p, 0.4, 0.05, dt, 2000);
      CHECK(e[0] == doctest::Approx(ode.m(2)).epsilon(1e-9));
      CHECK(e[1] == doctest::Approx(ode.m(3)).epsilon(1e-9));
    }
  }
}

TEST_CASE("expected_intensity: Monte Carlo conditional mean from a generic start") {
  auto p = sym(0.05, 0.65, 0.2, 1.7);
  auto full = FullHawkesParams::from_symmetric(p);
  SimConfig cfg;
  cfg.horizon = 1.5;
  cfg.seed = 31;
  cfg.init = InitMode::Explicit;
  cfg.initial_values = {1.2, 0.3};
  const auto e0 = initial_excess(p, cfg);
  std::vector<double> l1, l2;
  for (int k = 0; k < 40000; ++k) {
    cfg.path_index = static_cast<std::uint64_t>(k);
    auto s = simulate(p, cfg);
    auto e = excess_state_at(full, s, 1.0, e0);
    l1.push_back(p.mu + e[0] + e[1]);
    l2.push_back(p.mu + e[2] + e[3]);
  }
  auto ref = expected_intensity(p, {1.2, 0.3}, 1.0);
  CHECK(std::abs(ts::mean(l1) - ref[0]) <= 3.0 * ts::sem(l1));
  CHECK(std::abs(ts::mean(l2) - ref[1]) <= 3.0 * ts::sem(l2));
}

TEST_CASE("return_variance: equal excitation cancels the exponential terms") {
  auto p = sym(0.02, 0.45, 0.45, 1.3, 0.05, 50.0);
  const double l = spectral_info(p).lambda_stat;
  for (double t : {1.0, 60.0, 3600.0}) {
    const double expected = 2.0 * p.tick * p.tick * l * t / (p.s0 * p.s0);
    CHECK(return_variance(p, t) == doctest::Approx(expected).epsilon(1e-13));
  }
}

TEST_CASE("annualized_vol: reference true values under the 252 x 5.5 h convention") {
  auto p1 = sym(0.01, 0.4, 0.5, 1.5, 0.025, 100.0);
  auto p2 = sym(0.05, 0.65, 0.2, 1.7, 0.025, 100.0);
  CHECK(std::round(annualized_vol(p1) * 1e4) / 1e4 == doctest::Approx(0.1171).epsilon(1e-12));
  CHECK(std::round(annualized_vol(p2) * 1e4) / 1e4 == doctest::Approx(0.3396).epsilon(1e-12));
  // the annualized figure is the long-run slope of the return variance
  const double t = 1e6;
  CHECK(annualized_vol(p1) ==
        doctest::Approx(std::sqrt(return_variance(p1, t) / t * kSecondsPerYear)).epsilon(1e-5));
}

TEST_CASE("annualized_vol: Poisson case and round trip with the baseline formula") {
  auto p = sym(0.03, 0.0, 0.0, 2.0, 0.01, 40.0);
  CHECK(annualized_vol(p) == doctest::Approx(p.rel_tick() * std::sqrt(2.0 * p.mu * kSecondsPerYear)).epsilon(1e-14));
  for (auto& q : random_stable(200, 9)) {
    const double s = annualized_vol(q);
    const double mu = mu_from_annualized_vol(s, q.alpha_s, q.alpha_c, q.beta, q.rel_tick());
    CHECK(mu == doctest::Approx(q.mu).epsilon(1e-12));
  }
  VolConvention daily{kSessionSeconds};
  CHECK(annualized_vol(p, daily) ==
        doctest::Approx(annualized_vol(p) / std::sqrt(252.0)).epsilon(1e-13));
}

TEST_CASE("moment_oracles: Poisson moments") {
  auto p = sym(0.07, 0.0, 0.0, 1.0);
  const double t = 120.0, mt = 0.07 * t;
  auto r = moment_oracles(p, t);
  CHECK(r.expected_counts[0] == doctest::Approx(mt).epsilon(1e-13));
  CHECK(r.e_n1_sq == doctest::Approx(mt + mt * mt).epsilon(1e-12));
  CHECK(r.e_n1_n2 == doctest::Approx(mt * mt).epsilon(1e-12));
  CHECK(r.e_diff_sq == doctest::Approx(2.0 * mt).epsilon(1e-12));
  CHECK(r.e_l1_sq == doctest::Approx(0.07 * 0.07).epsilon(1e-12));
}

TEST_CASE("moment_oracles: every closed form equals the moment ODE") {
  for (auto& p : random_stable(20, 21)) {
    const double l = spectral_info(p).lambda_stat;
    for (double t : {10.0, 60.0}) {
      auto r = moment_oracles(p, t);
      auto ode = integrate_moments(p, l, l, t, 6000);
      CHECK(r.expected_counts[0] == doctest::Approx(ode.m(0)).epsilon(1e-8));
      CHECK(r.e_n1_sq == doctest::Approx(ode.s(0, 0)).epsilon(1e-8));
      CHECK(r.e_n1_n2 == doctest::Approx(ode.s(0, 1)).epsilon(1e-8));
      CHECK(r.e_diff_sq ==
            doctest::Approx(ode.s(0, 0) + ode.s(1, 1) - 2.0 * ode.s(0, 1)).epsilon(1e-8));
      CHECK(r.e_l1_sq == doctest::Approx(ode.s(2, 2)).epsilon(1e-8));
      CHECK(r.e_l1_l2 == doctest::Approx(ode.s(2, 3)).epsilon(1e-8));
      CHECK(r.e_l1_n1 == doctest::Approx(ode.s(2, 0)).epsilon(1e-8));
      CHECK(r.e_l1_n2 == doctest::Approx(ode.s(2, 1)).epsilon(1e-8));
    }
  }
}

TEST_CASE("moment_oracles: report invariants and the rescaling identity") {
  for (auto& p : random_stable(100, 33)) {
    for (double t : {0.5, 10.0, 600.0}) {
      auto r = moment_oracles(p, t);
      CHECK(r.e_n1_sq >= r.expected_counts[0] * r.expected_counts[0]);
      CHECK(r.e_diff_sq >= 0.0);
      CHECK(r.return_variance >= 0.0);
      const double scale = p.s0 * p.s0 / (p.tick * p.tick);
      CHECK(scale * return_variance(p, t) == doctest::Approx(r.e_diff_sq).epsilon(1e-10));
      CHECK(r.return_variance == doctest::Approx(return_variance(p, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("moment_oracles: Monte Carlo at three horizons") {
  auto p = sym(0.05, 0.65, 0.2, 1.7);
  SimConfig cfg;
  cfg.horizon = 600.0;
  cfg.seed = 404;
  auto batch = simulate_batch(p, cfg, 20000);
  for (double t : {10.0, 60.0, 600.0}) {
    auto r = moment_oracles(p, t);
    std::vector<double> n1sq, n1n2, dsq, l1sq, l1l2, l1n1, l1n2;
    for (auto& s : batch) {
      const double n1 = static_cast<double>(count_at(s.up_times, t));
      const double n2 = static_cast<double>(count_at(s.down_times, t));
      auto lam = intensity_at(p, s, t);
      n1sq.push_back(n1 * n1);
      n1n2.push_back(n1 * n2);
      dsq.push_back((n1 - n2) * (n1 - n2));
      l1sq.push_back(lam[0] * lam[0]);
      l1l2.push_back(lam[0] * lam[1]);
      l1n1.push_back(lam[0] * n1);
      l1n2.push_back(lam[0] * n2);
    }
    auto within = [](const std::vector<double>& x, double ref) { return std::abs(ts::mean(x) - ref) <= 3.0 * ts::sem(x); };
    CHECK(within(n1sq, r.e_n1_sq));
    CHECK(within(n1n2, r.e_n1_n2));
    CHECK(within(dsq, r.e_diff_sq));
    CHECK(within(l1sq, r.e_l1_sq));
    CHECK(within(l1l2, r.e_l1_l2));
    CHECK(within(l1n1, r.e_l1_n1));
    CHECK(within(l1n2, r.e_l1_n2));
  }
}

TEST_CASE("property: large-t slope, positivity, monotonicity and initial derivative") {
  for (auto& p : random_stable(300, 55)) {
    auto s = spectral_info(p);
    const double qs = p.q_s(), qc = p.q_c();
    const double slope = 2.0 * p.rel_tick() * p.rel_tick() * p.mu / ((1 - qs + qc) * (1 - qs + qc) * (1 - qs - qc));
    // the offset from the linear asymptote is constant once the transients are gone, so the
    // relative gap falls like 1/t
    const double t50 = 50.0 / std::abs(s.xi1);
    const double gap50 = return_variance(p, t50) - slope * t50;
    const double gap500 = return_variance(p, 10.0 * t50) - slope * 10.0 * t50;
    CHECK(gap500 == doctest::Approx(gap50).epsilon(1e-6));
    for (double f : {5000.0, 20000.0}) {
      const double t = f / std::abs(s.xi1);
      CHECK(std::abs(return_variance(p, t) / t / slope - 1.0) < 1e-3);
    }
    double prev = 0.0;
    for (int k = 1; k <= 60; ++k) {
      const double t = 0.05 * k * k;
      const double v = return_variance(p, t);
      CHECK(v > prev);
      prev = v;
    }
    const double h = 1e-6 / p.beta;
    const double d0 = 2.0 * p.rel_tick() * p.rel_tick() * s.lambda_stat;
    CHECK(std::abs(return_variance(p, h) / h / d0 - 1.0) < 0.01);
  }
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int drawn = 0;
  while (drawn < 10000) {
    const double beta = 1e-3 + 10.0 * u(rng);
    auto p = sym(1e-4 + u(rng), beta * u(rng), beta * u(rng), beta, 1e-3 + u(rng), 1.0 + 100.0 * u(rng));
    if (!validate(p).ok) continue;
    ++drawn;
    const double t = std::exp(-6.0 + 16.0 * u(rng));
    CHECK(return_variance(p, t) > 0.0);
  }
}

TEST_CASE("return_variance stays accurate at tiny horizons") {
  auto p = sym(0.01, 0.4, 0.5, 1.5, 0.025, 100.0);
  const double d0 = 2.0 * p.rel_tick() * p.rel_tick() * spectral_info(p).lambda_stat;
  for (double t : {1e-12, 1e-10, 1e-9}) CHECK(return_variance(p, t) / t == doctest::Approx(d0).epsilon(1e-6));
}

TEST_CASE("unstable parameters are rejected") {
  auto p = sym(0.01, 0.9, 0.7, 1.5);
  CHECK_THROWS_AS(return_variance(p, 10.0), Error);
  CHECK_THROWS_AS(annualized_vol(p), Error);
  CHECK_THROWS_AS(moment_oracles(p, 10.0), Error);
  CHECK_THROWS_AS(expected_intensity(p, {0.1, 0.1}, 1.0), Error);
}
