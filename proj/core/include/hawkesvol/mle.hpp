#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hawkesvol/event_stream.hpp"
#include "hawkesvol/moments.hpp"
#include "hawkesvol/optimize.hpp"
#include "hawkesvol/params.hpp"

namespace hawkesvol {

enum class FitMethod { BetaGrid, QuasiNewton };

std::string to_string(FitMethod m);

// Intensity at time 0 used by the likelihood.
struct InitialIntensity {
  enum class Mode { Stationary, Ignition, Fixed };
  Mode mode = Mode::Stationary;
  double value = 0.0;  // lambda1(0) = lambda2(0) for Mode::Fixed

  static InitialIntensity stationary() { return {}; }
  static InitialIntensity ignition() { return {Mode::Ignition, 0.0}; }
  static InitialIntensity fixed(double v) { return {Mode::Fixed, v}; }
};

struct BetaGridSpec {
  double lo = 1.0;
  double hi = 3.0;
  double step = 0.001;
};

std::vector<double> beta_grid_points(const BetaGridSpec& g);

struct FitOptions {
  FitMethod method = FitMethod::QuasiNewton;
  BetaGridSpec grid;
  InitialIntensity start;
  std::size_t min_events_per_side = 50;
  MinimizeOptions minimize;
  VolConvention vol;
};

struct FitResult {
  std::vector<std::string> names;
  std::vector<double> estimates;
  std::vector<double> std_errors;  // empty entries are NaN when the information is singular
  Eigen::MatrixXd covariance;      // of the optimized coordinates
  double loglik = 0.0;
  int iterations = 0;
  bool converged = false;
  FitMethod method = FitMethod::QuasiNewton;

  double value(const std::string& name) const;
  double std_error(const std::string& name) const;
};

// Log-likelihood of the symmetric model with O(n) recursion and analytic gradient.
class SymmetricLikelihood {
 public:
  explicit SymmetricLikelihood(const EventStream& s, InitialIntensity start = {});

  // theta = {mu, alpha_s, alpha_c, beta}; grad (when non-null) receives d loglik / d theta.
  double operator()(const std::array<double, 4>& theta, std::array<double, 4>* grad = nullptr) const;

  std::size_t n_up() const { return n_up_; }
  std::size_t n_down() const { return n_down_; }
  double horizon() const { return events_.horizon; }

 private:
  MergedEvents events_;
  InitialIntensity start_;
  std::size_t n_up_ = 0, n_down_ = 0;
};

// theta = {mu1, mu2, alpha11, alpha12, alpha21, alpha22, beta11, beta12, beta21, beta22}
class FullLikelihood {
 public:
  explicit FullLikelihood(const EventStream& s, InitialIntensity start = {});
  double operator()(const std::array<double, 10>& theta, std::array<double, 10>* grad = nullptr) const;
  std::size_t n_up() const { return n_up_; }
  std::size_t n_down() const { return n_down_; }

 private:
  MergedEvents events_;
  InitialIntensity start_;
  std::size_t n_up_ = 0, n_down_ = 0;
};

std::array<double, 10> full_to_vector(const FullHawkesParams& p);
FullHawkesParams full_from_vector(const std::array<double, 10>& v);

double loglik_symmetric(const SymmetricHawkesParams& p, const EventStream& s, InitialIntensity start = {});
double loglik_full(const FullHawkesParams& p, const EventStream& s, InitialIntensity start = {});

SymmetricHawkesParams default_initial_guess(const EventStream& s, double tick = 1.0, double s0 = 1.0);

// Result names: mu, alpha_s, alpha_c, beta, sigma_ann. tick and s0 of init fix the relative tick.
FitResult fit_symmetric(const EventStream& s, const SymmetricHawkesParams& init, const FitOptions& opts = {});
FitResult fit_symmetric_reparam(const EventStream& s, const SymmetricHawkesParams& init, const FitOptions& opts = {});
FitResult fit_full(const EventStream& s, const FullHawkesParams& init, const FitOptions& opts = {});

SymmetricHawkesParams symmetric_from_fit(const FitResult& r, double tick, double s0);

struct HessianReport {
  Eigen::Matrix3d hessian;
  double max_eigenvalue = 0.0;
};

// Hessian of the log-likelihood in (mu, alpha_s, alpha_c) at fixed beta, with lambda(0)
// held at the stationary value of the evaluation point.
HessianReport hessian_check(const EventStream& s, double beta_fixed, const std::array<double, 3>& point);

// Integrated intensity between consecutive events of each side (unit exponentials under the model).
std::array<std::vector<double>, 2> compensator_increments(const FullHawkesParams& p, const EventStream& s,
                                                          InitialIntensity start = {});

// Kolmogorov-Smirnov test of samples against Exp(1); returns the asymptotic p-value.
double ks_exponential_pvalue(std::vector<double> samples);

std::string fit_csv_header();
std::string fit_csv_row(const std::string& date, const FitResult& r);

}  // namespace hawkesvol
