#pragma once

#include <array>
#include <string>
#include <vector>

#include "hawkesvol/kv_config.hpp"

namespace hawkesvol {

// 252 trading days of a 10:00-15:30 session
inline constexpr double kSecondsPerYear = 252.0 * 5.5 * 3600.0;
inline constexpr double kSessionSeconds = 5.5 * 3600.0;

struct SymmetricHawkesParams {
  double mu = 0.0;
  double alpha_s = 0.0;
  double alpha_c = 0.0;
  double beta = 1.0;
  double tick = 1.0;
  double s0 = 1.0;

  double q_s() const { return alpha_s / beta; }
  double q_c() const { return alpha_c / beta; }
  double rel_tick() const { return tick / s0; }
  double branching_ratio() const { return (alpha_s + alpha_c) / beta; }
};

// alpha[i][j]: jump of the intensity of type i caused by an event of type j.
// Type 0 is an up-tick, type 1 a down-tick.
struct FullHawkesParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  std::array<std::array<double, 2>, 2> alpha{};
  std::array<std::array<double, 2>, 2> beta{{{1.0, 1.0}, {1.0, 1.0}}};

  static FullHawkesParams from_symmetric(const SymmetricHawkesParams& p);
  double mu(int i) const { return i == 0 ? mu1 : mu2; }
};

struct ValidationReport {
  bool ok = true;
  double spectral_radius = 0.0;
  std::vector<std::string> violations;
};

ValidationReport validate(const SymmetricHawkesParams& p);
ValidationReport validate(const FullHawkesParams& p);

// Throws Validation with the joined violation list when the report fails.
void require_valid(const SymmetricHawkesParams& p);
void require_valid(const FullHawkesParams& p);

struct SpectralInfo {
  double xi1 = 0.0;
  double xi2 = 0.0;
  double lambda_stat = 0.0;
};

SpectralInfo spectral_info(const SymmetricHawkesParams& p);

// Long-run excess intensities [l11, l12, l21, l22]; l_ij is the part of the
// intensity of type i generated by past events of type j.
std::array<double, 4> stationary_intensities_full(const FullHawkesParams& p);

// Eigenvalues (real parts) of the 4x4 drift matrix of the expected excess intensities.
std::array<double, 4> expected_intensity_eigenvalues(const FullHawkesParams& p);

KvMap to_kv(const SymmetricHawkesParams& p);
KvMap to_kv(const FullHawkesParams& p);
SymmetricHawkesParams symmetric_from_kv(const KvMap& kv);
FullHawkesParams full_from_kv(const KvMap& kv);
// True when the map carries full-model keys (mu1, alpha11, ...).
bool kv_is_full_model(const KvMap& kv);

}  // namespace hawkesvol
