#pragma once

#include <cstdint>
#include <vector>

#include "hawkesvol/kv_config.hpp"
#include "hawkesvol/moments.hpp"

namespace hawkesvol {

struct DiffusionParams {
  double kappa1 = 1.0;  // mean reversion of the drift process n
  double kappa2 = 1.0;  // mean reversion of the variance process V
  double theta = 1.0;   // long-run variance (price^2 per second)
  double gamma = 0.0;   // vol of vol
  double phi = 0.0;     // drift loading on the price shock
  double rho = 0.0;     // correlation of the price and variance shocks
  double s0 = 1.0;

  bool feller_satisfied() const { return 2.0 * kappa2 * theta >= gamma * gamma; }
};

void require_valid(const DiffusionParams& p);

// Diffusion counterpart of the symmetric Hawkes parameters (m, a_s, a_c, b) with tick delta.
DiffusionParams map_params(double m, double a_s, double a_c, double b, double delta, double s0);

double return_variance_diffusion(const DiffusionParams& p, double t);
double mean_signature_plot(const DiffusionParams& p, double tau);

// E[[R^2, R]_t] = rho * K
double third_moment_K(const DiffusionParams& p, double t);

struct DiffusionSimSpec {
  double horizon = 30.0;
  double dt = 0.01;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  // record S at these times (rounded to the grid); empty = terminal only
  std::vector<double> sample_times;
  bool third_moment = false;  // accumulate realized [R^2, R] on the grid
  bool time_averages = false;
};

struct DiffusionPaths {
  std::vector<double> terminal_s, terminal_n, terminal_v;
  std::vector<std::vector<double>> samples;  // samples[path][k] = S at sample_times[k]
  std::vector<double> third_moment;          // per path
  std::vector<double> mean_v, mean_n;        // per-path time averages
  std::size_t truncations = 0;               // steps where V went negative before truncation
};

// Euler-Maruyama with full truncation; start n = 0, V = theta, S = s0.
DiffusionPaths simulate_paths(const DiffusionParams& p, const DiffusionSimSpec& spec);

// Realized third moment variation sum (R^2_{i+1} - R^2_i)(R_{i+1} - R_i), R = (S - s0)/s0.
double realized_third_moment(const std::vector<double>& prices, double s0);

struct RhoEstimate {
  double rho = 0.0;
  double std_error = 0.0;
  double k = 0.0;
  std::size_t n = 0;
};

// Sample mean of realized [R^2,R]/K over paths.
RhoEstimate estimate_rho(const std::vector<double>& realized_third_moments, const DiffusionParams& p, double t);

struct SurfacePoint {
  double kappa1, phi, vol;
};

// Annualized sqrt(return variance / t * year) over the grid; theta and s0 fixed.
std::vector<SurfacePoint> vol_surface(double theta, double s0, const std::vector<double>& kappa1_grid,
                                      const std::vector<double>& phi_grid, double t,
                                      const VolConvention& conv = {});

KvMap to_kv(const DiffusionParams& p);
DiffusionParams diffusion_from_kv(const KvMap& kv);

}  // namespace hawkesvol
