#include "hawkesvol/params.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "hawkesvol/error.hpp"

namespace hawkesvol {

FullHawkesParams FullHawkesParams::from_symmetric(const SymmetricHawkesParams& p) {
  FullHawkesParams f;
  f.mu1 = f.mu2 = p.mu;
  f.alpha = {{{p.alpha_s, p.alpha_c}, {p.alpha_c, p.alpha_s}}};
  f.beta = {{{p.beta, p.beta}, {p.beta, p.beta}}};
  return f;
}

namespace {

bool finite_all(std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
  return out;
}

}  // namespace

ValidationReport validate(const SymmetricHawkesParams& p) {
  ValidationReport r;
  auto bad = [&](const std::string& s) {
    r.ok = false;
    r.violations.push_back(s);
  };
  if (!finite_all({p.mu, p.alpha_s, p.alpha_c, p.beta, p.tick, p.s0})) bad("non-finite parameter");
  if (!(p.mu > 0)) bad("mu must be > 0");
  if (!(p.alpha_s >= 0)) bad("alpha_s must be >= 0");
  if (!(p.alpha_c >= 0)) bad("alpha_c must be >= 0");
  if (!(p.beta > 0)) bad("beta must be > 0");
  if (!(p.tick > 0)) bad("tick must be > 0");
  if (!(p.s0 > 0)) bad("s0 must be > 0");
  // eigenvalues of the symmetric branching matrix are (a_s +- a_c)/beta
  r.spectral_radius = p.beta > 0 ? (std::abs(p.alpha_s) + std::abs(p.alpha_c)) / p.beta : INFINITY;
  if (!(r.spectral_radius < 1.0)) bad("unstable: alpha_s + alpha_c >= beta");
  return r;
}

ValidationReport validate(const FullHawkesParams& p) {
  ValidationReport r;
  auto bad = [&](const std::string& s) {
    r.ok = false;
    r.violations.push_back(s);
  };
  if (!(p.mu1 > 0) || !std::isfinite(p.mu1)) bad("mu1 must be > 0");
  if (!(p.mu2 > 0) || !std::isfinite(p.mu2)) bad("mu2 must be > 0");
  bool entries_ok = true;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
      if (!(p.alpha[i][j] >= 0) || !std::isfinite(p.alpha[i][j])) {
        bad("alpha" + ij + " must be >= 0");
        entries_ok = false;
      }
      if (!(p.beta[i][j] > 0) || !std::isfinite(p.beta[i][j])) {
        bad("beta" + ij + " must be > 0");
        entries_ok = false;
      }
    }
  }
  if (entries_ok) {
    // Perron root of the nonnegative 2x2 branching matrix
    double a = p.alpha[0][0] / p.beta[0][0], b = p.alpha[0][1] / p.beta[0][1];
    double c = p.alpha[1][0] / p.beta[1][0], d = p.alpha[1][1] / p.beta[1][1];
    double disc = std::sqrt((a - d) * (a - d) + 4.0 * b * c);
    r.spectral_radius = 0.5 * (a + d + disc);
    if (!(r.spectral_radius < 1.0)) bad("unstable: spectral radius of branching matrix >= 1");
  } else {
    r.spectral_radius = INFINITY;
  }
  return r;
}

void require_valid(const SymmetricHawkesParams& p) {
  auto r = validate(p);
  if (!r.ok) fail_validation("invalid symmetric parameters: " + join(r.violations));
}

void require_valid(const FullHawkesParams& p) {
  auto r = validate(p);
  if (!r.ok) fail_validation("invalid full parameters: " + join(r.violations));
}

SpectralInfo spectral_info(const SymmetricHawkesParams& p) {
  require_valid(p);
  SpectralInfo s;
  s.xi1 = -p.beta - p.alpha_c + p.alpha_s;
  s.xi2 = -p.beta + p.alpha_c + p.alpha_s;
  s.lambda_stat = p.mu * p.beta / (p.beta - p.alpha_s - p.alpha_c);
  return s;
}

namespace {

Eigen::Matrix4d drift_matrix(const FullHawkesParams& p) {
  const auto& a = p.alpha;
  const auto& b = p.beta;
  Eigen::Matrix4d g;
  g << a[0][0] - b[0][0], a[0][0], 0, 0,
       0, -b[0][1], a[0][1], a[0][1],
       a[1][0], a[1][0], -b[1][0], 0,
       0, 0, a[1][1], a[1][1] - b[1][1];
  return g;
}

}  // namespace

std::array<double, 4> expected_intensity_eigenvalues(const FullHawkesParams& p) {
  Eigen::EigenSolver<Eigen::Matrix4d> es(drift_matrix(p), false);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = es.eigenvalues()[i].real();
  return out;
}

std::array<double, 4> stationary_intensities_full(const FullHawkesParams& p) {
  require_valid(p);
  for (double ev : expected_intensity_eigenvalues(p))
    if (!(ev < 0.0)) fail_validation("non-stationary: expected-intensity system has an eigenvalue >= 0");
  const double a11 = p.alpha[0][0], a12 = p.alpha[0][1], a21 = p.alpha[1][0], a22 = p.alpha[1][1];
  const double b11 = p.beta[0][0], b12 = p.beta[0][1], b21 = p.beta[1][0], b22 = p.beta[1][1];
  const double m1 = p.mu1, m2 = p.mu2;
  const double h = a11 * b12 * b21 * (a22 - b22) - b11 * (a22 * b12 * b21 + a12 * a21 * b22 - b12 * b21 * b22);
  return {a11 * b21 * ((b22 - a22) * b12 * m1 + a12 * b22 * m2) / h,
          a12 * b22 * ((b11 - a11) * b21 * m2 + a21 * b11 * m1) / h,
          a21 * b11 * ((b22 - a22) * b12 * m1 + a12 * b22 * m2) / h,
          a22 * b12 * ((b11 - a11) * b21 * m2 + a21 * b11 * m1) / h};
}

KvMap to_kv(const SymmetricHawkesParams& p) {
  KvMap kv;
  kv.set("mu", p.mu);
  kv.set("alpha_s", p.alpha_s);
  kv.set("alpha_c", p.alpha_c);
  kv.set("beta", p.beta);
  kv.set("tick", p.tick);
  kv.set("s0", p.s0);
  return kv;
}

KvMap to_kv(const FullHawkesParams& p) {
  KvMap kv;
  kv.set("mu1", p.mu1);
  kv.set("mu2", p.mu2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
      kv.set("alpha" + ij, p.alpha[i][j]);
      kv.set("beta" + ij, p.beta[i][j]);
    }
  }
  return kv;
}

SymmetricHawkesParams symmetric_from_kv(const KvMap& kv) {
  SymmetricHawkesParams p;
  p.mu = kv.get_double("mu");
  p.alpha_s = kv.get_double("alpha_s");
  p.alpha_c = kv.get_double("alpha_c");
  p.beta = kv.get_double("beta");
  p.tick = kv.get_double("tick", 1.0);
  p.s0 = kv.get_double("s0", 1.0);
  return p;
}

bool kv_is_full_model(const KvMap& kv) { return kv.has("mu1") || kv.has("alpha11"); }

FullHawkesParams full_from_kv(const KvMap& kv) {
  FullHawkesParams p;
  p.mu1 = kv.get_double("mu1");
  p.mu2 = kv.get_double("mu2");
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      std::string ij = std::to_string(i + 1) + std::to_string(j + 1);
      p.alpha[i][j] = kv.get_double("alpha" + ij);
      p.beta[i][j] = kv.get_double("beta" + ij);
    }
  }
  return p;
}

}  // namespace hawkesvol
