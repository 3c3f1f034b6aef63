#include "hawkesvol/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hawkesvol/error.hpp"
#include "hawkesvol/parallel.hpp"

namespace hawkesvol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Barrier on the branching ratio: zero below kBarrierStart, infinite at kBarrierWall.
constexpr double kBarrierStart = 0.95;
constexpr double kBarrierWall = 0.999;

// Returns penalty and d penalty / d r.
std::pair<double, double> stability_barrier(double r, double scale) {
  if (r <= kBarrierStart) return {0.0, 0.0};
  if (r >= kBarrierWall) return {kInf, 0.0};
  const double u = (r - kBarrierStart) / (1.0 - r);
  const double du = (1.0 - kBarrierStart) / ((1.0 - r) * (1.0 - r));
  return {scale * u * u, scale * 2.0 * u * du};
}

void require_events(std::size_t up, std::size_t down, std::size_t min_side) {
  if (up < min_side || down < min_side)
    fail_validation("insufficient events: " + std::to_string(up) + " up / " + std::to_string(down) +
                    " down, need " + std::to_string(min_side) + " per side");
}

// Annualized vol and its gradient in (mu, alpha_s, alpha_c, beta).
double sigma_of(const std::array<double, 4>& th, double rel_tick, double year, std::array<double, 4>* grad) {
  const double mu = th[0], as = th[1], ac = th[2], b = th[3];
  const double qs = as / b, qc = ac / b;
  const double u = 1.0 - qs + qc, w = 1.0 - qs - qc;
  const double f = u * u * w;
  const double sig = std::sqrt(2.0 * rel_tick * rel_tick * mu * year / f);
  if (grad) {
    const double fqs = -2.0 * u * w - u * u;
    const double fqc = 2.0 * u * w - u * u;
    const double k = -sig / (2.0 * f);
    (*grad)[0] = sig / (2.0 * mu);
    (*grad)[1] = k * fqs / b;
    (*grad)[2] = k * fqc / b;
    (*grad)[3] = k * (fqs * (-as / (b * b)) + fqc * (-ac / (b * b)));
  }
  return sig;
}

// mu as a function of (sigma, alpha_s, alpha_c, beta) and its gradient.
double mu_of(const std::array<double, 4>& y, double rel_tick, double year, std::array<double, 4>* grad) {
  const double sig = y[0], as = y[1], ac = y[2], b = y[3];
  const double qs = as / b, qc = ac / b;
  const double u = 1.0 - qs + qc, w = 1.0 - qs - qc;
  const double f = u * u * w;
  const double k = sig * sig / (year * 2.0 * rel_tick * rel_tick);
  const double mu = k * f;
  if (grad) {
    const double fqs = -2.0 * u * w - u * u;
    const double fqc = 2.0 * u * w - u * u;
    (*grad)[0] = 2.0 * mu / sig;
    (*grad)[1] = k * fqs / b;
    (*grad)[2] = k * fqc / b;
    (*grad)[3] = k * (fqs * (-as / (b * b)) + fqc * (-ac / (b * b)));
  }
  return mu;
}

std::vector<double> se_or_nan(const Eigen::MatrixXd& info, Eigen::MatrixXd* cov, bool* ok) {
  auto se = standard_errors_from_information(info);
  *ok = !se.empty();
  if (!*ok) {
    *cov = Eigen::MatrixXd::Constant(info.rows(), info.cols(), kNaN);
    return std::vector<double>(info.rows(), kNaN);
  }
  *cov = info.llt().solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  return se;
}

double delta_se(const Eigen::MatrixXd& cov, const std::array<double, 4>& g) {
  Eigen::Vector4d v(g[0], g[1], g[2], g[3]);
  double var = v.dot(cov * v);
  return var >= 0.0 ? std::sqrt(var) : kNaN;
}

}  // namespace

std::string to_string(FitMethod m) { return m == FitMethod::BetaGrid ? "grid" : "newton"; }

std::vector<double> beta_grid_points(const BetaGridSpec& g) {
  if (!(g.lo > 0.0) || !(g.hi > g.lo) || !(g.step > 0.0)) fail_validation("beta grid needs 0 < lo < hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((g.hi - g.lo) / g.step + 1e-9)) + 1;
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = g.lo + static_cast<double>(i) * g.step;
  return pts;
}

double FitResult::value(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return estimates[i];
  return kNaN;
}

double FitResult::std_error(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i < std_errors.size() ? std_errors[i] : kNaN;
  return kNaN;
}

SymmetricLikelihood::SymmetricLikelihood(const EventStream& s, InitialIntensity start)
    : events_(merge_events(s)), start_(start), n_up_(s.up_times.size()), n_down_(s.down_times.size()) {}

double SymmetricLikelihood::operator()(const std::array<double, 4>& th, std::array<double, 4>* grad) const {
  const double mu = th[0], as = th[1], ac = th[2], b = th[3];
  const double T = events_.horizon;

  double l0, dl0_mu, dl0_a, dl0_b;
  switch (start_.mode) {
    case InitialIntensity::Mode::Stationary: {
      const double c = b - as - ac;
      if (!(c > 0.0)) return kNaN;
      l0 = mu * b / c;
      dl0_mu = b / c;
      dl0_a = mu * b / (c * c);
      dl0_b = -mu * (as + ac) / (c * c);
      break;
    }
    case InitialIntensity::Mode::Ignition:
      l0 = mu, dl0_mu = 1.0, dl0_a = 0.0, dl0_b = 0.0;
      break;
    default:
      l0 = start_.value, dl0_mu = 0.0, dl0_a = 0.0, dl0_b = 0.0;
      break;
  }
  const double ex0 = l0 - mu;

  double A[2] = {0.0, 0.0}, B[2] = {0.0, 0.0};
  double decay0 = 1.0;  // exp(-b t)
  double prev = 0.0;
  double ll = 0.0;
  double g0 = 0.0, g1 = 0.0, g2 = 0.0, g3 = 0.0;
  const std::size_t n = events_.times.size();
  const double* times = events_.times.data();
  const std::uint8_t* sides = events_.sides.data();

  for (std::size_t k = 0; k < n; ++k) {
    const double t = times[k];
    const double d = t - prev;
    const double e = std::exp(-b * d);
    B[0] = e * (B[0] + d * A[0]);
    B[1] = e * (B[1] + d * A[1]);
    A[0] *= e;
    A[1] *= e;
    decay0 *= e;
    prev = t;
    const int s = sides[k];
    const double own = A[s], other = A[1 - s];
    const double lam = mu + ex0 * decay0 + as * own + ac * other;
    if (!(lam > 0.0)) return kNaN;
    ll += std::log(lam);
    if (grad) {
      const double inv = 1.0 / lam;
      g0 += (1.0 + (dl0_mu - 1.0) * decay0) * inv;
      g1 += (dl0_a * decay0 + own) * inv;
      g2 += (dl0_a * decay0 + other) * inv;
      g3 += (dl0_b * decay0 - t * ex0 * decay0 - as * B[s] - ac * B[1 - s]) * inv;
    }
    A[s] += 1.0;
  }

  const double dT = T - prev;
  const double eT = std::exp(-b * dT);
  const double a_tot = (A[0] + A[1]) * eT;
  const double b_tot = eT * (B[0] + B[1] + dT * (A[0] + A[1]));
  const double sum_kernel = static_cast<double>(n) - a_tot;  // sum_k (1 - exp(-b (T - t_k)))
  const double em = -std::expm1(-b * T);                     // 1 - exp(-b T)
  const double comp = 2.0 * mu * T + 2.0 * ex0 * em / b + (as + ac) / b * sum_kernel;
  ll -= comp;

  if (grad) {
    const double ebT = std::exp(-b * T);
    const double d_em_over_b = T * ebT / b - em / (b * b);
    (*grad)[0] = g0 - (2.0 * T + 2.0 * (dl0_mu - 1.0) * em / b);
    (*grad)[1] = g1 - (2.0 * dl0_a * em / b + sum_kernel / b);
    (*grad)[2] = g2 - (2.0 * dl0_a * em / b + sum_kernel / b);
    (*grad)[3] = g3 - (2.0 * dl0_b * em / b + 2.0 * ex0 * d_em_over_b - (as + ac) / (b * b) * sum_kernel +
                       (as + ac) / b * b_tot);
  }
  return ll;
}

std::array<double, 10> full_to_vector(const FullHawkesParams& p) {
  return {p.mu1, p.mu2, p.alpha[0][0], p.alpha[0][1], p.alpha[1][0], p.alpha[1][1],
          p.beta[0][0], p.beta[0][1], p.beta[1][0], p.beta[1][1]};
}

FullHawkesParams full_from_vector(const std::array<double, 10>& v) {
  FullHawkesParams p;
  p.mu1 = v[0];
  p.mu2 = v[1];
  p.alpha = {{{v[2], v[3]}, {v[4], v[5]}}};
  p.beta = {{{v[6], v[7]}, {v[8], v[9]}}};
  return p;
}

FullLikelihood::FullLikelihood(const EventStream& s, InitialIntensity start)
    : events_(merge_events(s)), start_(start), n_up_(s.up_times.size()), n_down_(s.down_times.size()) {}

double FullLikelihood::operator()(const std::array<double, 10>& th, std::array<double, 10>* grad) const {
  const double mu[2] = {th[0], th[1]};
  const double a[4] = {th[2], th[3], th[4], th[5]};
  const double b[4] = {th[6], th[7], th[8], th[9]};
  for (int c = 0; c < 4; ++c)
    if (!(b[c] > 0.0) || !(a[c] >= 0.0)) return kNaN;
  if (!(mu[0] > 0.0) || !(mu[1] > 0.0)) return kNaN;
  const double T = events_.horizon;

  // initial excess l and its Jacobian dl/dtheta (4 x 10)
  Eigen::Vector4d ell = Eigen::Vector4d::Zero();
  Eigen::Matrix<double, 4, 10> dell = Eigen::Matrix<double, 4, 10>::Zero();
  if (start_.mode == InitialIntensity::Mode::Stationary) {
    auto p = full_from_vector(th);
    if (!(validate(p).spectral_radius < 1.0)) return kNaN;
    Eigen::Matrix4d g;
    g << a[0] - b[0], a[0], 0, 0,
         0, -b[1], a[1], a[1],
         a[2], a[2], -b[2], 0,
         0, 0, a[3], a[3] - b[3];
    Eigen::Vector4d cvec(a[0] * mu[0], a[1] * mu[1], a[2] * mu[0], a[3] * mu[1]);
    Eigen::PartialPivLU<Eigen::Matrix4d> lu(g);
    ell = -lu.solve(cvec);
    if (grad) {
      // d(G l + c) = 0  =>  dl = -G^{-1} (dG l + dc)
      Eigen::Matrix<double, 4, 10> rhs = Eigen::Matrix<double, 4, 10>::Zero();
      rhs(0, 0) = a[0];
      rhs(2, 0) = a[2];
      rhs(1, 1) = a[1];
      rhs(3, 1) = a[3];
      rhs(0, 2) = ell(0) + ell(1) + mu[0];
      rhs(1, 3) = ell(2) + ell(3) + mu[1];
      rhs(2, 4) = ell(0) + ell(1) + mu[0];
      rhs(3, 5) = ell(2) + ell(3) + mu[1];
      rhs(0, 6) = -ell(0);
      rhs(1, 7) = -ell(1);
      rhs(2, 8) = -ell(2);
      rhs(3, 9) = -ell(3);
      dell = -lu.solve(rhs);
    }
  } else if (start_.mode == InitialIntensity::Mode::Fixed) {
    // split the fixed excess evenly across the two components of each side
    double ex1 = start_.value - mu[0], ex2 = start_.value - mu[1];
    ell << 0.5 * ex1, 0.5 * ex1, 0.5 * ex2, 0.5 * ex2;
  }

  double A[4] = {0, 0, 0, 0}, B[4] = {0, 0, 0, 0}, E[4] = {1, 1, 1, 1};
  double prev = 0.0, ll = 0.0;
  std::array<double, 10> g{};
  double gl[4] = {0, 0, 0, 0};
  const std::size_t n = events_.times.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double t = events_.times[k];
    const double d = t - prev;
    for (int c = 0; c < 4; ++c) {
      const double e = std::exp(-b[c] * d);
      B[c] = e * (B[c] + d * A[c]);
      A[c] *= e;
      E[c] *= e;
    }
    prev = t;
    const int s = events_.sides[k];
    const int c0 = 2 * s, c1 = 2 * s + 1;
    const double lam = mu[s] + ell(c0) * E[c0] + ell(c1) * E[c1] + a[c0] * A[c0] + a[c1] * A[c1];
    if (!(lam > 0.0)) return kNaN;
    ll += std::log(lam);
    if (grad) {
      const double inv = 1.0 / lam;
      g[s] += inv;
      for (int c : {c0, c1}) {
        g[2 + c] += A[c] * inv;
        g[6 + c] += (-t * ell(c) * E[c] - a[c] * B[c]) * inv;
        gl[c] += E[c] * inv;
      }
    }
    // an event of side s feeds components (0, s) and (1, s)
    A[s] += 1.0;
    A[2 + s] += 1.0;
  }

  const std::size_t nside[2] = {n_up_, n_down_};
  const double dT = T - prev;
  double comp = (mu[0] + mu[1]) * T;
  for (int c = 0; c < 4; ++c) {
    const int j = c % 2;
    const double eT = std::exp(-b[c] * dT);
    const double aT = A[c] * eT;
    const double bT = eT * (B[c] + dT * A[c]);
    const double sk = static_cast<double>(nside[j]) - aT;
    const double em = -std::expm1(-b[c] * T);
    comp += ell(c) * em / b[c] + a[c] / b[c] * sk;
    if (grad) {
      const double ebT = std::exp(-b[c] * T);
      gl[c] -= em / b[c];
      g[2 + c] -= sk / b[c];
      g[6 + c] -= ell(c) * (T * ebT / b[c] - em / (b[c] * b[c])) + a[c] * (-sk / (b[c] * b[c]) + bT / b[c]);
    }
  }
  ll -= comp;
  if (grad) {
    g[0] -= T;
    g[1] -= T;
    for (int q = 0; q < 10; ++q) {
      double acc = g[q];
      for (int c = 0; c < 4; ++c) acc += gl[c] * dell(c, q);
      (*grad)[q] = acc;
    }
  }
  return ll;
}

double loglik_symmetric(const SymmetricHawkesParams& p, const EventStream& s, InitialIntensity start) {
  require_valid(p);
  validate_stream(s);
  double v = SymmetricLikelihood(s, start)({p.mu, p.alpha_s, p.alpha_c, p.beta});
  if (!std::isfinite(v)) fail_numerical("non-finite log-likelihood (intensity reached zero; corrupt input?)");
  return v;
}

double loglik_full(const FullHawkesParams& p, const EventStream& s, InitialIntensity start) {
  require_valid(p);
  validate_stream(s);
  double v = FullLikelihood(s, start)(full_to_vector(p));
  if (!std::isfinite(v)) fail_numerical("non-finite log-likelihood (intensity reached zero; corrupt input?)");
  return v;
}

SymmetricHawkesParams default_initial_guess(const EventStream& s, double tick, double s0) {
  SymmetricHawkesParams p;
  p.beta = 1.5;
  p.alpha_s = 0.3;
  p.alpha_c = 0.3;
  const double rate = std::max<double>(1.0, static_cast<double>(s.size())) / (2.0 * s.horizon);
  p.mu = rate * (1.0 - p.branching_ratio());
  p.tick = tick;
  p.s0 = s0;
  return p;
}

namespace {

struct SymObjective {
  const SymmetricLikelihood& lik;
  double scale;

  // x = log theta; returns -loglik + barrier
  double operator()(const std::vector<double>& x, std::vector<double>* grad) const {
    std::array<double, 4> th{};
    for (int i = 0; i < 4; ++i) th[i] = std::exp(x[i]);
    const double r = (th[1] + th[2]) / th[3];
    auto [pen, dpen] = stability_barrier(r, scale);
    if (!std::isfinite(pen)) return kNaN;
    std::array<double, 4> g{};
    double ll = lik(th, grad ? &g : nullptr);
    if (!std::isfinite(ll)) return kNaN;
    if (grad) {
      grad->resize(4);
      double dr[4] = {0.0, 1.0 / th[3], 1.0 / th[3], -r / th[3]};
      for (int i = 0; i < 4; ++i) (*grad)[i] = (-g[i] + dpen * dr[i]) * th[i];
    }
    return -ll + pen;
  }
};

Objective natural_negloglik(const SymmetricLikelihood& lik) {
  return [&lik](const std::vector<double>& x, std::vector<double>* grad) {
    std::array<double, 4> th{x[0], x[1], x[2], x[3]}, g{};
    double ll = lik(th, grad ? &g : nullptr);
    if (grad) {
      grad->resize(4);
      for (int i = 0; i < 4; ++i) (*grad)[i] = -g[i];
    }
    return -ll;
  };
}

FitResult finish_symmetric(const SymmetricLikelihood& lik, const std::array<double, 4>& th, int iterations,
                           bool optimizer_ok, FitMethod method, double rel_tick, const VolConvention& vol) {
  FitResult r;
  r.method = method;
  r.iterations = iterations;
  r.names = {"mu", "alpha_s", "alpha_c", "beta", "sigma_ann"};
  r.loglik = lik(th);
  std::array<double, 4> sg{};
  double sig = sigma_of(th, rel_tick, vol.year_seconds, &sg);
  r.estimates = {th[0], th[1], th[2], th[3], sig};
  auto f = natural_negloglik(lik);
  Eigen::MatrixXd info = hessian_from_gradient(f, {th[0], th[1], th[2], th[3]}, 1e-4);
  bool pd = false;
  auto se = se_or_nan(info, &r.covariance, &pd);
  se.push_back(pd ? delta_se(r.covariance, sg) : kNaN);
  r.std_errors = se;
  r.converged = optimizer_ok && pd && std::isfinite(r.loglik);
  return r;
}

// Concave 3-parameter subproblem at fixed beta, in log coordinates.
MinimizeResult solve_fixed_beta(const SymmetricLikelihood& lik, double beta, std::array<double, 3> start,
                                double scale, const MinimizeOptions& mopts) {
  Objective f = [&](const std::vector<double>& x, std::vector<double>* grad) {
    std::array<double, 4> th{std::exp(x[0]), std::exp(x[1]), std::exp(x[2]), beta};
    const double r = (th[1] + th[2]) / beta;
    auto [pen, dpen] = stability_barrier(r, scale);
    if (!std::isfinite(pen)) return kNaN;
    std::array<double, 4> g{};
    double ll = lik(th, grad ? &g : nullptr);
    if (!std::isfinite(ll)) return kNaN;
    if (grad) {
      grad->resize(3);
      (*grad)[0] = -g[0] * th[0];
      (*grad)[1] = (-g[1] + dpen / beta) * th[1];
      (*grad)[2] = (-g[2] + dpen / beta) * th[2];
    }
    return -ll + pen;
  };
  return minimize_bfgs(f, {std::log(start[0]), std::log(start[1]), std::log(start[2])}, mopts);
}

std::array<double, 3> feasible_start(std::array<double, 3> s, double beta) {
  const double r = (s[1] + s[2]) / beta;
  if (r > 0.9) {
    s[1] *= 0.9 / r;
    s[2] *= 0.9 / r;
  }
  for (double& v : s) v = std::max(v, 1e-6);
  return s;
}

}  // namespace

FitResult fit_symmetric(const EventStream& s, const SymmetricHawkesParams& init, const FitOptions& opts) {
  validate_stream(s);
  require_events(s.up_times.size(), s.down_times.size(), opts.min_events_per_side);
  require_valid(init);
  SymmetricLikelihood lik(s, opts.start);
  const double scale = static_cast<double>(std::max<std::size_t>(1, s.size()));

  if (opts.method == FitMethod::QuasiNewton) {
    SymObjective obj{lik, scale};
    Objective f = [&obj](const std::vector<double>& x, std::vector<double>* g) { return obj(x, g); };
    std::vector<double> x0 = {std::log(init.mu), std::log(std::max(init.alpha_s, 1e-6)),
                              std::log(std::max(init.alpha_c, 1e-6)), std::log(init.beta)};
    auto res = minimize_bfgs(f, x0, opts.minimize);
    std::array<double, 4> th{};
    for (int i = 0; i < 4; ++i) th[i] = std::exp(res.x[i]);
    return finish_symmetric(lik, th, res.iterations, res.converged, FitMethod::QuasiNewton, init.rel_tick(),
                            opts.vol);
  }

  auto betas = beta_grid_points(opts.grid);
  std::array<double, 3> start = feasible_start({init.mu, init.alpha_s, init.alpha_c}, betas.front());
  double best_ll = -kInf;
  std::array<double, 4> best{};
  int iterations = 0;
  bool all_ok = true;
  for (double b : betas) {
    start = feasible_start(start, b);
    auto res = solve_fixed_beta(lik, b, start, scale, opts.minimize);
    iterations += res.iterations;
    std::array<double, 4> th{std::exp(res.x[0]), std::exp(res.x[1]), std::exp(res.x[2]), b};
    start = {th[0], th[1], th[2]};
    double ll = lik(th);
    if (std::isfinite(ll) && ll > best_ll) {
      best_ll = ll;
      best = th;
      all_ok = res.converged;
    }
  }
  if (!std::isfinite(best_ll)) fail_numerical("beta grid: no feasible grid point");
  return finish_symmetric(lik, best, iterations, all_ok, FitMethod::BetaGrid, init.rel_tick(), opts.vol);
}

FitResult fit_symmetric_reparam(const EventStream& s, const SymmetricHawkesParams& init, const FitOptions& opts) {
  validate_stream(s);
  require_events(s.up_times.size(), s.down_times.size(), opts.min_events_per_side);
  require_valid(init);
  SymmetricLikelihood lik(s, opts.start);
  const double scale = static_cast<double>(std::max<std::size_t>(1, s.size()));
  const double dr = init.rel_tick(), year = opts.vol.year_seconds;

  // y = {sigma_ann, alpha_s, alpha_c, beta}
  auto negll_y = [&](const std::array<double, 4>& y, std::array<double, 4>* grad) {
    std::array<double, 4> dmu{};
    const double mu = mu_of(y, dr, year, grad ? &dmu : nullptr);
    if (!(mu > 0.0)) return kNaN;
    std::array<double, 4> th{mu, y[1], y[2], y[3]}, g{};
    double ll = lik(th, grad ? &g : nullptr);
    if (!std::isfinite(ll)) return kNaN;
    if (grad) {
      (*grad)[0] = -g[0] * dmu[0];
      for (int i = 1; i < 4; ++i) (*grad)[i] = -(g[i] + g[0] * dmu[i]);
    }
    return -ll;
  };

  Objective f = [&](const std::vector<double>& x, std::vector<double>* grad) {
    std::array<double, 4> y{};
    for (int i = 0; i < 4; ++i) y[i] = std::exp(x[i]);
    const double r = (y[1] + y[2]) / y[3];
    auto [pen, dpen] = stability_barrier(r, scale);
    if (!std::isfinite(pen)) return kNaN;
    std::array<double, 4> g{};
    double v = negll_y(y, grad ? &g : nullptr);
    if (!std::isfinite(v)) return kNaN;
    if (grad) {
      grad->resize(4);
      double drr[4] = {0.0, 1.0 / y[3], 1.0 / y[3], -r / y[3]};
      for (int i = 0; i < 4; ++i) (*grad)[i] = (g[i] + dpen * drr[i]) * y[i];
    }
    return v + pen;
  };

  const double sig0 = annualized_vol(init, opts.vol);
  std::vector<double> x0 = {std::log(sig0), std::log(std::max(init.alpha_s, 1e-6)),
                            std::log(std::max(init.alpha_c, 1e-6)), std::log(init.beta)};
  auto res = minimize_bfgs(f, x0, opts.minimize);
  std::array<double, 4> y{};
  for (int i = 0; i < 4; ++i) y[i] = std::exp(res.x[i]);

  FitResult r;
  r.method = FitMethod::QuasiNewton;
  r.iterations = res.iterations;
  r.names = {"mu", "alpha_s", "alpha_c", "beta", "sigma_ann"};
  std::array<double, 4> dmu{};
  const double mu = mu_of(y, dr, year, &dmu);
  r.estimates = {mu, y[1], y[2], y[3], y[0]};
  r.loglik = lik({mu, y[1], y[2], y[3]});
  Objective fy = [&](const std::vector<double>& x, std::vector<double>* grad) {
    std::array<double, 4> yy{x[0], x[1], x[2], x[3]}, g{};
    double v = negll_y(yy, grad ? &g : nullptr);
    if (grad) grad->assign(g.begin(), g.end());
    return v;
  };
  Eigen::MatrixXd info = hessian_from_gradient(fy, {y[0], y[1], y[2], y[3]}, 1e-4);
  bool pd = false;
  auto se = se_or_nan(info, &r.covariance, &pd);
  const double se_sigma = se[0];
  r.std_errors = {pd ? delta_se(r.covariance, dmu) : kNaN, se[1], se[2], se[3], se_sigma};
  r.converged = res.converged && pd && std::isfinite(r.loglik);
  return r;
}

FitResult fit_full(const EventStream& s, const FullHawkesParams& init, const FitOptions& opts) {
  validate_stream(s);
  require_events(s.up_times.size(), s.down_times.size(), opts.min_events_per_side);
  require_valid(init);
  FullLikelihood lik(s, opts.start);
  const double scale = static_cast<double>(std::max<std::size_t>(1, s.size()));

  Objective f = [&](const std::vector<double>& x, std::vector<double>* grad) {
    std::array<double, 10> th{};
    for (int i = 0; i < 10; ++i) th[i] = std::exp(x[i]);
    // Perron root of the branching matrix and its gradient
    const double qa = th[2] / th[6], qb = th[3] / th[7], qc = th[4] / th[8], qd = th[5] / th[9];
    const double disc = std::max(std::sqrt((qa - qd) * (qa - qd) + 4.0 * qb * qc), 1e-12);
    const double rad = 0.5 * (qa + qd + disc);
    auto [pen, dpen] = stability_barrier(rad, scale);
    if (!std::isfinite(pen)) return kNaN;
    std::array<double, 10> g{};
    double ll = lik(th, grad ? &g : nullptr);
    if (!std::isfinite(ll)) return kNaN;
    if (grad) {
      grad->resize(10);
      const double dq[4] = {0.5 * (1.0 + (qa - qd) / disc), qc / disc, qb / disc, 0.5 * (1.0 - (qa - qd) / disc)};
      std::array<double, 10> dr{};
      for (int c = 0; c < 4; ++c) {
        dr[2 + c] = dq[c] / th[6 + c];
        dr[6 + c] = -dq[c] * th[2 + c] / (th[6 + c] * th[6 + c]);
      }
      for (int i = 0; i < 10; ++i) (*grad)[i] = (-g[i] + dpen * dr[i]) * th[i];
    }
    return -ll + pen;
  };

  auto v0 = full_to_vector(init);
  std::vector<double> x0(10);
  for (int i = 0; i < 10; ++i) x0[i] = std::log(std::max(v0[i], 1e-6));
  auto res = minimize_bfgs(f, x0, opts.minimize);
  std::array<double, 10> th{};
  for (int i = 0; i < 10; ++i) th[i] = std::exp(res.x[i]);

  FitResult r;
  r.method = FitMethod::QuasiNewton;
  r.iterations = res.iterations;
  r.names = {"mu1", "mu2", "alpha11", "alpha12", "alpha21", "alpha22", "beta11", "beta12", "beta21", "beta22"};
  r.estimates.assign(th.begin(), th.end());
  r.loglik = lik(th);
  Objective fn = [&](const std::vector<double>& x, std::vector<double>* grad) {
    std::array<double, 10> t2{}, g{};
    std::copy(x.begin(), x.end(), t2.begin());
    double v = lik(t2, grad ? &g : nullptr);
    if (grad) {
      grad->resize(10);
      for (int i = 0; i < 10; ++i) (*grad)[i] = -g[i];
    }
    return -v;
  };
  Eigen::MatrixXd info = hessian_from_gradient(fn, r.estimates, 1e-4);
  bool pd = false;
  r.std_errors = se_or_nan(info, &r.covariance, &pd);
  r.converged = res.converged && pd && std::isfinite(r.loglik);
  return r;
}

SymmetricHawkesParams symmetric_from_fit(const FitResult& r, double tick, double s0) {
  SymmetricHawkesParams p;
  p.mu = r.value("mu");
  p.alpha_s = r.value("alpha_s");
  p.alpha_c = r.value("alpha_c");
  p.beta = r.value("beta");
  p.tick = tick;
  p.s0 = s0;
  return p;
}

HessianReport hessian_check(const EventStream& s, double beta_fixed, const std::array<double, 3>& point) {
  validate_stream(s);
  const double c = beta_fixed - point[1] - point[2];
  if (!(c > 0.0)) fail_validation("hessian_check point is not stable at the given beta");
  const double l0 = point[0] * beta_fixed / c;
  SymmetricLikelihood lik(s, InitialIntensity::fixed(l0));
  Objective f = [&](const std::vector<double>& x, std::vector<double>* grad) {
    std::array<double, 4> th{x[0], x[1], x[2], beta_fixed}, g{};
    double v = lik(th, grad ? &g : nullptr);
    if (grad) grad->assign(g.begin(), g.begin() + 3);
    return v;
  };
  Eigen::MatrixXd h = hessian_from_gradient(f, {point[0], point[1], point[2]}, 1e-6);
  HessianReport rep;
  rep.hessian = h;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(rep.hessian);
  rep.max_eigenvalue = es.eigenvalues().maxCoeff();
  return rep;
}

std::array<std::vector<double>, 2> compensator_increments(const FullHawkesParams& p, const EventStream& s,
                                                          InitialIntensity start) {
  std::array<double, 4> ex{};
  if (start.mode == InitialIntensity::Mode::Stationary) {
    ex = stationary_intensities_full(p);
  } else if (start.mode == InitialIntensity::Mode::Fixed) {
    ex = {0.5 * (start.value - p.mu1), 0.5 * (start.value - p.mu1), 0.5 * (start.value - p.mu2),
          0.5 * (start.value - p.mu2)};
  }
  const double b[4] = {p.beta[0][0], p.beta[0][1], p.beta[1][0], p.beta[1][1]};
  const double a[4] = {p.alpha[0][0], p.alpha[0][1], p.alpha[1][0], p.alpha[1][1]};
  const double mu[2] = {p.mu1, p.mu2};
  auto m = merge_events(s);
  std::array<std::vector<double>, 2> out;
  double acc[2] = {0.0, 0.0};
  bool seen[2] = {false, false};
  double prev = 0.0;
  for (std::size_t k = 0; k < m.times.size(); ++k) {
    const double d = m.times[k] - prev;
    for (int i = 0; i < 2; ++i) acc[i] += mu[i] * d;
    for (int c = 0; c < 4; ++c) {
      acc[c / 2] += ex[c] * -std::expm1(-b[c] * d) / b[c];
      ex[c] *= std::exp(-b[c] * d);
    }
    prev = m.times[k];
    const int j = m.sides[k];
    if (seen[j]) out[j].push_back(acc[j]);
    seen[j] = true;
    acc[j] = 0.0;
    ex[j] += a[j];
    ex[2 + j] += a[2 + j];
  }
  return out;
}

double ks_exponential_pvalue(std::vector<double> x) {
  if (x.empty()) fail_validation("ks test needs samples");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = -std::expm1(-x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  const double lam = (sn + 0.12 + 0.11 / sn) * d;
  if (lam < 1e-3) return 1.0;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lam * lam);
    p += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

std::string fit_csv_header() {
  return "date,mu,alpha_s,alpha_c,beta,sigma_ann,se_mu,se_alpha_s,se_alpha_c,se_beta,se_sigma_ann,loglik,"
         "iterations,converged,method";
}

std::string fit_csv_row(const std::string& date, const FitResult& r) {
  std::string row = date;
  for (const char* n : {"mu", "alpha_s", "alpha_c", "beta", "sigma_ann"}) row += "," + format_double(r.value(n));
  for (const char* n : {"mu", "alpha_s", "alpha_c", "beta", "sigma_ann"}) row += "," + format_double(r.std_error(n));
  row += "," + format_double(r.loglik) + "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," +
         to_string(r.method);
  return row;
}

}  // namespace hawkesvol
