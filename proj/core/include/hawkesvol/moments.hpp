#pragma once

#include <array>

#include "hawkesvol/params.hpp"

namespace hawkesvol {

struct VolConvention {
  double year_seconds = kSecondsPerYear;
};

// E[lambda(s + dt)] given lambda(s) = lambda_s.
std::array<double, 2> expected_intensity(const SymmetricHawkesParams& p, std::array<double, 2> lambda_s, double dt);

// Var((S_t - S0)/S0) with intensities stationary at 0.
double return_variance(const SymmetricHawkesParams& p, double t);

double annualized_vol(const SymmetricHawkesParams& p, const VolConvention& conv = {});

// Inverse of annualized_vol: baseline intensity giving the requested volatility.
double mu_from_annualized_vol(double sigma_ann, double alpha_s, double alpha_c, double beta, double rel_tick,
                              const VolConvention& conv = {});

struct MomentReport {
  double t = 0.0;
  std::array<double, 2> expected_counts{};
  double e_n1_sq = 0.0;
  double e_n1_n2 = 0.0;
  double e_diff_sq = 0.0;  // E[(N1 - N2)^2]
  double e_l1_sq = 0.0;
  double e_l1_l2 = 0.0;
  double e_l1_n1 = 0.0;
  double e_l1_n2 = 0.0;
  double return_variance = 0.0;
};

MomentReport moment_oracles(const SymmetricHawkesParams& p, double t);

}  // namespace hawkesvol
