#include "hawkesvol/moments.hpp"

#include <cmath>

#include "hawkesvol/error.hpp"

namespace hawkesvol {

namespace {

// expm1(x t) / x, continuous at x = 0
double em1_over(double x, double t) {
  if (std::abs(x * t) < 1e-8) return t * (1.0 + 0.5 * x * t);
  return std::expm1(x * t) / x;
}

}  // namespace

std::array<double, 2> expected_intensity(const SymmetricHawkesParams& p, std::array<double, 2> lambda_s, double dt) {
  auto sp = spectral_info(p);
  // eigenvectors (1,-1) for xi1 and (1,1) for xi2; particular solution -mu*beta/xi2
  const double ls = -p.mu * p.beta / sp.xi2;
  const double diff = 0.5 * (lambda_s[0] - lambda_s[1]);
  const double sum = 0.5 * (lambda_s[0] + lambda_s[1]) - ls;
  const double e1 = std::exp(sp.xi1 * dt), e2 = std::exp(sp.xi2 * dt);
  return {ls + sum * e2 + diff * e1, ls + sum * e2 - diff * e1};
}

double return_variance(const SymmetricHawkesParams& p, double t) {
  auto sp = spectral_info(p);
  if (!(t > 0.0)) fail_validation("return_variance needs t > 0");
  const double x = sp.xi1, b = p.beta;
  // with a = alpha_s - alpha_c = beta + xi1 the bracket regroups as
  // b^2 (t - 2 E1 + E2) + 2 b x (E2 - E1) + x^2 E2, E1 = expm1(x t)/x, E2 = expm1(2 x t)/(2 x)
  const double xt = x * t;
  double g2, h1;
  if (std::abs(xt) < 1e-3) {
    // series of (t - 2E1 + E2)/x^2 and (E2 - E1)/x
    g2 = t * t * t * (1.0 / 3.0 + xt * (1.0 / 4.0 + xt * (7.0 / 60.0 + xt * (1.0 / 24.0))));
    h1 = t * t * (0.5 + xt * (0.5 + xt * (7.0 / 24.0 + xt * (1.0 / 8.0))));
  } else {
    const double e1 = em1_over(x, t), e2 = em1_over(2.0 * x, t);
    g2 = (t - 2.0 * e1 + e2) / (x * x);
    h1 = (e2 - e1) / x;
  }
  const double e2 = em1_over(2.0 * x, t);
  const double bracket_over_x2 = b * b * g2 + 2.0 * b * h1 + e2;
  return 2.0 * p.rel_tick() * p.rel_tick() * sp.lambda_stat * bracket_over_x2;
}

double annualized_vol(const SymmetricHawkesParams& p, const VolConvention& conv) {
  require_valid(p);
  const double qs = p.q_s(), qc = p.q_c();
  const double d = p.rel_tick();
  const double den = (1.0 - qs + qc) * (1.0 - qs + qc) * (1.0 - qs - qc);
  return std::sqrt(2.0 * d * d * p.mu * conv.year_seconds / den);
}

double mu_from_annualized_vol(double sigma_ann, double alpha_s, double alpha_c, double beta, double rel_tick,
                              const VolConvention& conv) {
  const double qs = alpha_s / beta, qc = alpha_c / beta;
  return sigma_ann * sigma_ann / conv.year_seconds * (1.0 - qs + qc) * (1.0 - qs + qc) * (1.0 - qs - qc) /
         (2.0 * rel_tick * rel_tick);
}

MomentReport moment_oracles(const SymmetricHawkesParams& p, double t) {
  auto sp = spectral_info(p);
  if (!(t >= 0.0)) fail_validation("moment_oracles needs t >= 0");
  const double as = p.alpha_s, ac = p.alpha_c, b = p.beta, mu = p.mu;
  const double x1 = sp.xi1, x2 = sp.xi2, l0 = sp.lambda_stat;

  // M = [[as-b, ac], [ac, as-b]] has inverse [[as-b, -ac], [-ac, as-b]] / det
  const double det = (as - b) * (as - b) - ac * ac;
  auto minv = [&](double u, double v) -> std::array<double, 2> {
    return {((as - b) * u - ac * v) / det, (-ac * u + (as - b) * v) / det};
  };

  const double c1 = -l0 * (as - ac) * (as - ac) / (4.0 * x1);
  const double c2 = l0 * (as + ac) * (as + ac) / (4.0 * x2);
  const double d1 = l0 * (as - ac) * b / (2.0 * x1 * x1);
  const double d2 = -l0 * (as + ac) * b / (2.0 * x2 * x2);

  const auto mw = minv(as * as + ac * ac + 2.0 * b * mu, 2.0 * (as * ac + b * mu));
  const auto m1 = minv(1.0, 1.0);
  const auto ma = minv(as, ac);
  const auto msq = minv(as * as + ac * ac, 2.0 * as * ac);
  const auto mmsq = minv(msq[0], msq[1]);
  const std::array<double, 2> bconst = {-l0 * (ma[0] - 0.5 * mmsq[0]), -l0 * (ma[1] - 0.5 * mmsq[1])};

  const double e1 = std::exp(x1 * t), e2 = std::exp(x2 * t);
  const double e11 = std::exp(2.0 * x1 * t), e22 = std::exp(2.0 * x2 * t);
  const double sgn[2] = {-1.0, 1.0};

  MomentReport r;
  r.t = t;
  r.expected_counts = {l0 * t, l0 * t};
  double el2[2], eln[2], en[2];
  for (int k = 0; k < 2; ++k) {
    el2[k] = sgn[k] * c1 * e11 + c2 * e22 - 0.5 * l0 * mw[k];
    eln[k] = sgn[k] * d1 * e1 + d2 * e2 + sgn[k] * c1 / x1 * e11 + c2 / x2 * e22 - l0 * b * mu * m1[k] * t + bconst[k];
    const double lin = 2.0 * ma[k] - mmsq[k] - (k == 0 ? 1.0 : 0.0);
    en[k] = 2.0 * sgn[k] * d1 / x1 * std::expm1(x1 * t) + 2.0 * d2 / x2 * std::expm1(x2 * t) +
            sgn[k] * c1 / (x1 * x1) * std::expm1(2.0 * x1 * t) + c2 / (x2 * x2) * std::expm1(2.0 * x2 * t) -
            l0 * (b * mu * m1[k] * t * t + lin * t);
  }
  r.e_l1_sq = el2[0];
  r.e_l1_l2 = el2[1];
  r.e_l1_n1 = eln[0];
  r.e_l1_n2 = eln[1];
  r.e_n1_sq = en[0];
  r.e_n1_n2 = en[1];
  r.e_diff_sq = 2.0 * (en[0] - en[1]);
  r.return_variance = t > 0.0 ? return_variance(p, t) : 0.0;
  return r;
}

}  // namespace hawkesvol
