#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hawkesvol/density_pde.hpp"
#include "hawkesvol/diffusion.hpp"
#include "hawkesvol/error.hpp"
#include "hawkesvol/simulate.hpp"

using namespace hawkesvol;

namespace {

DiffusionParams ref_params() { return map_params(0.09, 0.6, 0.3, 2.5, 0.2, 1000.0); }

const PdeSolution& ref_solution() {
  static const PdeSolution sol = solve_transformed_pde(ref_params(), default_pde_grid(ref_params(), 30.0));
  return sol;
}

const PriceDensity& ref_density() {
  static const PriceDensity d =
      invert_to_price_density(ref_solution(), default_price_grid(ref_params(), 30.0), ref_params().s0);
  return d;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return 0.5 * s;
}

std::vector<double> histogram(const std::vector<double>& xs, const std::vector<double>& edges) {
  std::vector<double> h(edges.size() - 1, 0.0);
  for (double x : xs) {
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    if (it == edges.begin() || it == edges.end()) continue;
    h[static_cast<std::size_t>(it - edges.begin()) - 1] += 1.0 / xs.size();
  }
  return h;
}

PdeGrid small_grid(const DiffusionParams& p, double horizon, int cells, double dt) {
  auto g = default_pde_grid(p, horizon, 64);
  g.n_steps = cells;
  g.v_steps = cells;
  g.dt = dt;
  return g;
}

}  // namespace

TEST_CASE("psi grids and grid validation") {
  auto psi = psi_grid(4.0, 8);
  REQUIRE(psi.size() == 9);
  CHECK(psi[4] == 0.0);
  CHECK(psi[0] == -4.0);
  CHECK(psi[8] == 4.0);
  CHECK_THROWS_AS(psi_grid(4.0, 7), Error);
  CHECK_THROWS_AS(psi_grid(0.0, 8), Error);

  auto p = ref_params();
  auto g = default_pde_grid(p, 30.0);
  CHECK(g.n_min < 0.0);
  CHECK(g.n_max > 0.0);
  CHECK(g.v_max > p.theta);
  CHECK(g.psi.size() == 257);
  CHECK_NOTHROW(require_valid(g, p));

  auto bad = g;
  bad.n_min = 0.1;
  CHECK_THROWS_AS(require_valid(bad, p), Error);
  bad = g;
  bad.v_max = p.theta;
  CHECK_THROWS_AS(require_valid(bad, p), Error);
  bad = g;
  bad.psi.back() *= 1.01;
  CHECK_THROWS_AS(require_valid(bad, p), Error);
  bad = g;
  bad.dt = 2.0 * g.horizon;
  CHECK_THROWS_AS(require_valid(bad, p), Error);

  auto corr = p;
  corr.rho = -0.9;
  bad = g;
  bad.dt = 10.0;
  bad.horizon = 30.0;
  try {
    require_valid(bad, corr);
    FAIL("expected the cross-term stability bound to trigger");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
  }
}

TEST_CASE("zero frequency conserves mass") {
  auto p = ref_params();
  for (double t : {0.1, 1.0, 5.0}) {
    auto g = small_grid(p, t, 24, std::min(0.04, t / 4));
    g.psi = psi_grid(1.0, 2);
    auto sol = solve_transformed_pde(p, g);
    CHECK(std::abs(sol.zero_freq_mass - 1.0) < 1e-3);
    // transform of the zero slice is real
    CHECK(std::abs(sol.transform[1].imag()) < 1e-12);
    // conjugate symmetry
    CHECK(std::abs(sol.transform[0] - std::conj(sol.transform[2])) < 1e-14);
  }
  auto corr = p;
  corr.rho = -0.7;
  auto g = small_grid(corr, 2.0, 24, 0.01);
  g.psi = psi_grid(1.0, 2);
  CHECK(std::abs(solve_transformed_pde(corr, g).zero_freq_mass - 1.0) < 1e-3);
}

TEST_CASE("constant volatility recovers the Gaussian characteristic function") {
  DiffusionParams p;
  p.kappa1 = 1.0;
  p.kappa2 = 1.0;
  p.theta = 0.04;
  p.gamma = 1e-4;
  p.phi = 0.0;
  p.s0 = 50.0;
  const double t = 2.0;
  auto g = small_grid(p, t, 32, 0.01);
  g.psi = psi_grid(3.0 / std::sqrt(p.theta * t), 12);
  auto sol = solve_transformed_pde(p, g);
  for (std::size_t k = 0; k < g.psi.size(); ++k) {
    const double psi = g.psi[k];
    CHECK(std::abs(sol.transform[k]) == doctest::Approx(std::exp(-0.5 * psi * psi * p.theta * t)).epsilon(1e-2).scale(1.0));
  }
}

TEST_CASE("symmetric model gives a density symmetric about s0") {
  auto p = ref_params();
  p.phi = 0.0;
  p.rho = 0.0;
  p.kappa1 = 2.5;
  const double t = 5.0;
  auto g = small_grid(p, t, 32, 0.02);
  g.psi = default_pde_grid(p, t, 64).psi;
  auto sol = solve_transformed_pde(p, g);
  auto d = invert_to_price_density(sol, default_price_grid(p, t, 201), p.s0);
  const double peak = *std::max_element(d.density.begin(), d.density.end());
  double asym = 0.0;
  for (std::size_t k = 0; k < d.density.size(); ++k)
    asym = std::max(asym, std::abs(d.density[k] - d.density[d.density.size() - 1 - k]));
  CHECK(asym / peak < 1e-3);
  CHECK(std::abs(density_mean(d) - p.s0) < 1e-6);
  const double var = return_variance_diffusion(p, t) * p.s0 * p.s0;
  CHECK(std::abs(density_variance(d) / var - 1.0) < 0.05);
}

TEST_CASE("grid convergence order is at least 1.5") {
  auto p = ref_params();
  const double t = 5.0;
  auto prices = default_price_grid(p, t, 201);
  auto psi = default_pde_grid(p, t, 64).psi;
  std::vector<std::vector<double>> dens;
  for (int r : {1, 2, 4}) {
    auto g = small_grid(p, t, 24 * r, 0.04 / r);
    g.psi = psi;
    dens.push_back(invert_to_price_density(solve_transformed_pde(p, g), prices, p.s0).density);
  }
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t k = 0; k < prices.size(); ++k) {
    e1 = std::max(e1, std::abs(dens[0][k] - dens[1][k]));
    e2 = std::max(e2, std::abs(dens[1][k] - dens[2][k]));
  }
  CHECK(std::log2(e1 / e2) >= 1.5);
}

TEST_CASE("reference density settings: moments, boundary mass and Monte Carlo histograms") {
  auto p = ref_params();
  const auto& sol = ref_solution();
  const auto& d = ref_density();
  CHECK(std::abs(sol.zero_freq_mass - 1.0) < 1e-3);
  CHECK(sol.boundary_mass < 1e-6);
  CHECK(d.mass_defect < 1e-2);
  CHECK(std::abs(density_mean(d) - p.s0) < 0.05);
  const double var = return_variance_diffusion(p, 30.0) * p.s0 * p.s0;
  CHECK(std::abs(density_variance(d) / var - 1.0) < 0.05);

  // unimodal: rises to a single peak near s0 then falls, ignoring the flat clipped tails
  const auto peak = static_cast<std::size_t>(std::max_element(d.density.begin(), d.density.end()) - d.density.begin());
  CHECK(std::abs(d.prices[peak] - p.s0) < 0.1);
  const double floor = 1e-8 * d.density[peak];
  for (std::size_t k = 1; k <= peak; ++k)
    if (d.density[k] > floor) CHECK(d.density[k] >= d.density[k - 1] - floor);
  for (std::size_t k = peak + 1; k < d.density.size(); ++k)
    if (d.density[k - 1] > floor) CHECK(d.density[k] <= d.density[k - 1] + floor);

  DiffusionSimSpec spec;
  spec.horizon = 30.0;
  spec.dt = 0.01;
  spec.n_paths = 50000;
  spec.seed = 11;
  auto mc = simulate_paths(p, spec);
  std::vector<double> edges;
  for (double x = p.s0 - 10.0; x <= p.s0 + 10.0 + 1e-9; x += 0.2) edges.push_back(x);
  CHECK(total_variation(histogram(mc.terminal_s, edges), bin_probabilities(d, edges)) <= 0.03);

  // mapped Hawkes model on its tick lattice, bins centred on the lattice
  SymmetricHawkesParams h;
  h.mu = 0.09;
  h.alpha_s = 0.6;
  h.alpha_c = 0.3;
  h.beta = 2.5;
  h.tick = 0.2;
  h.s0 = 1000.0;
  SimConfig cfg;
  cfg.horizon = 30.0;
  cfg.seed = 12;
  std::vector<double> prices;
  for (auto& s : simulate_batch(h, cfg, 50000)) prices.push_back(price_path(s, h.tick, h.s0).value_at(cfg.horizon));
  std::vector<double> tick_edges;
  for (int k = -50; k <= 51; ++k) tick_edges.push_back(h.s0 + (k - 0.5) * h.tick);
  CHECK(total_variation(histogram(prices, tick_edges), bin_probabilities(d, tick_edges)) <= 0.08);
}

TEST_CASE("inversion errors and bin probabilities") {
  const auto& sol = ref_solution();
  CHECK_THROWS_AS(invert_to_price_density(sol, {1000.0}, 1000.0), Error);
  CHECK_THROWS_AS(invert_to_price_density(sol, {1000.0, 999.0, 1001.0}, 1000.0), Error);
  // a price grid covering only the centre misses most of the mass
  try {
    invert_to_price_density(sol, {999.9, 1000.0, 1000.1}, 1000.0);
    FAIL("expected a mass defect error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numerical);
  }

  // triangle density on [0, 2]
  PriceDensity tri;
  tri.prices = {0.0, 1.0, 2.0};
  tri.density = {0.0, 1.0, 0.0};
  CHECK(density_mean(tri) == doctest::Approx(1.0));
  auto pr = bin_probabilities(tri, {0.0, 0.5, 1.0, 2.0});
  REQUIRE(pr.size() == 3);
  CHECK(pr[0] == doctest::Approx(0.125));
  CHECK(pr[1] == doctest::Approx(0.375));
  CHECK(pr[2] == doctest::Approx(0.5));
  CHECK(density_csv(tri).rfind("price,density\n0,0\n1,1\n", 0) == 0);
}
