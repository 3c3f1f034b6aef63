#include "hawkesvol/smle.hpp"

#include <cmath>
#include <limits>

#include "hawkesvol/error.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/rng.hpp"
#include "hawkesvol/simulate.hpp"

namespace hawkesvol {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_sum_exp_mean(const std::vector<double>& x) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : x) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : x) acc += std::exp(v - mx);
  return mx + std::log(acc / static_cast<double>(x.size()));
}

}  // namespace

void require_valid(const SmleConfig& c) {
  if (c.n_sub < 2) fail_validation("n_sub must be >= 2");
  if (c.m_paths < 2) fail_validation("m_paths must be >= 2");
  if (!(c.obs_interval > 0)) fail_validation("obs_interval must be > 0");
}

std::vector<double> resample_observations(const EventStream& s, double tick, double s0, const SmleConfig& cfg) {
  require_valid(cfg);
  if (s.horizon < 2.0 * cfg.obs_interval) fail_validation("insufficient span for resampling");
  auto path = price_path(s, tick, s0);
  const auto n = static_cast<std::size_t>(std::floor(s.horizon / cfg.obs_interval + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = path.value_at(cfg.obs_interval * static_cast<double>(i));
  return out;
}

std::vector<double> resample_observations(const PriceSeries& s, const SmleConfig& cfg) {
  require_valid(cfg);
  if (s.times.empty() || s.times.back() - s.times.front() < 2.0 * cfg.obs_interval)
    fail_validation("insufficient span for resampling");
  return sample_on_grid(s, s.times.front(), s.times.back(), cfg.obs_interval);
}

SmleWorkspace::SmleWorkspace(std::size_t gaps, const SmleConfig& cfg)
    : gaps_(gaps), paths_(static_cast<std::size_t>(cfg.m_paths)), per_path_(2 * static_cast<std::size_t>(cfg.n_sub - 1)) {
  require_valid(cfg);
  const double bytes = static_cast<double>(gaps_) * paths_ * per_path_ * sizeof(float);
  if (bytes > 2e9) fail_validation("simulated likelihood workspace too large; reduce m_paths or the sample");
  data_.resize(gaps_ * paths_ * per_path_);
  parallel_for(gaps_, [&](std::size_t g) {
    Rng rng = make_rng(cfg.seed, g);
    std::normal_distribution<double> norm;
    float* dst = data_.data() + g * paths_ * per_path_;
    for (std::size_t k = 0; k < paths_ * per_path_; ++k) dst[k] = static_cast<float>(norm(rng));
  });
}

std::vector<double> simulated_loglik_terms(const DiffusionParams& p, const std::vector<double>& obs,
                                           const SmleConfig& cfg, const SmleWorkspace& ws, SmleDiagnostics* diag) {
  require_valid(cfg);
  if (obs.size() < 2) fail_validation("simulated likelihood needs at least two observations");
  const std::size_t gaps = obs.size() - 1;
  if (ws.gaps() < gaps) fail_validation("workspace has fewer gaps than the observations");
  const std::size_t m = static_cast<std::size_t>(cfg.m_paths);
  const int steps = cfg.n_sub - 1;
  const double dt = cfg.obs_interval / cfg.n_sub;
  const double sdt = std::sqrt(dt);
  const double rho = p.rho, rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  // exponential Euler: exact decay of the mean-reverting parts over a substep
  const double decay_n = std::exp(-p.kappa1 * dt), decay_v = std::exp(-p.kappa2 * dt);
  const double drift_dt = -std::expm1(-p.kappa1 * dt) / p.kappa1;

  std::vector<double> gap_ll(gaps);
  std::vector<std::uint8_t> floored(gaps, 0);
  // carry-forward needs the previous gap's path averages, so that rule runs in order
  const bool carry = cfg.latent_init == LatentInit::CarryForward;
  double carry_n = 0.0, carry_v = p.theta;

  auto run_gap = [&](std::size_t g, double n0, double v0, double* avg_n, double* avg_v) {
    std::vector<double> logd(m);
    double sum_n = 0.0, sum_v = 0.0;
    const double target = obs[g + 1];
    for (std::size_t j = 0; j < m; ++j) {
      const float* z = ws.shocks(g, j);
      double s = obs[g], nn = n0, v = v0;
      for (int k = 0; k < steps; ++k) {
        const double z1 = z[2 * k], z2 = rho * z1 + rho_c * z[2 * k + 1];
        const double vp = v > 0.0 ? v : 0.0;
        const double sv = std::sqrt(vp) * sdt;
        s += nn * drift_dt + sv * z1;
        nn = decay_n * nn + p.phi * sv * z1;
        v = p.theta + decay_v * (vp - p.theta) + p.gamma * sv * z2;
      }
      const double vp = v > 0.0 ? v : 0.0;
      const double var = std::max(vp * dt, 1e-300);
      const double r = target - (s + nn * drift_dt);
      logd[j] = -kLogSqrt2Pi - 0.5 * std::log(var) - 0.5 * r * r / var;
      sum_n += nn;
      sum_v += vp;
    }
    double l = log_sum_exp_mean(logd);
    if (!(l >= cfg.log_density_floor)) {
      l = cfg.log_density_floor;
      floored[g] = 1;
    }
    gap_ll[g] = l;
    if (avg_n) *avg_n = sum_n / static_cast<double>(m);
    if (avg_v) *avg_v = sum_v / static_cast<double>(m);
  };

  if (carry) {
    for (std::size_t g = 0; g < gaps; ++g) {
      double an = 0.0, av = 0.0;
      run_gap(g, carry_n, carry_v, &an, &av);
      carry_n = an;
      carry_v = av;
    }
  } else {
    parallel_for(gaps, [&](std::size_t g) { run_gap(g, 0.0, p.theta, nullptr, nullptr); });
  }
  std::size_t nf = 0;
  for (std::size_t g = 0; g < gaps; ++g) nf += floored[g];
  if (diag) diag->floored += nf;
  return gap_ll;
}

double simulated_loglik(const DiffusionParams& p, const std::vector<double>& obs, const SmleConfig& cfg,
                        const SmleWorkspace& ws, SmleDiagnostics* diag) {
  double total = 0.0;
  for (double v : simulated_loglik_terms(p, obs, cfg, ws, diag)) total += v;
  return total;
}

double simulated_loglik(const DiffusionParams& p, const std::vector<double>& obs, const SmleConfig& cfg,
                        SmleDiagnostics* diag) {
  if (obs.size() < 2) fail_validation("simulated likelihood needs at least two observations");
  SmleWorkspace ws(obs.size() - 1, cfg);
  return simulated_loglik(p, obs, cfg, ws, diag);
}

double gaussian_loglik(const std::vector<double>& obs, double theta, double interval) {
  const double var = theta * interval;
  double ll = 0.0;
  for (std::size_t i = 1; i < obs.size(); ++i) {
    const double r = obs[i] - obs[i - 1];
    ll += -kLogSqrt2Pi - 0.5 * std::log(var) - 0.5 * r * r / var;
  }
  return ll;
}

HawkesChart hawkes_chart(const DiffusionParams& p, double delta) {
  HawkesChart c;
  const double sum = p.gamma / delta;  // a_s + a_c
  c.b = p.kappa2 + sum;
  c.a_s = 0.5 * (sum + c.b - p.kappa1);
  c.a_c = 0.5 * (sum - c.b + p.kappa1);
  c.m = p.theta * p.kappa2 / (2.0 * c.b * delta * delta);
  return c;
}

namespace {

DiffusionParams from_chart(const std::vector<double>& th, double delta, double s0, bool with_rho) {
  DiffusionParams p = map_params(th[0], th[1], th[2], th[3], delta, s0);
  p.rho = with_rho ? th[4] : 0.0;
  return p;
}

}  // namespace

SmleFit fit_diffusion(const std::vector<double>& obs, const DiffusionParams& init, const SmleConfig& cfg,
                      bool estimate_rho) {
  require_valid(cfg);
  require_valid(init);
  if (obs.size() < 2) fail_validation("simulated likelihood needs at least two observations");
  if (!(cfg.tick > 0)) fail_validation("SMLE needs the tick of the Hawkes chart");
  const double delta = cfg.tick;
  SmleWorkspace ws(obs.size() - 1, cfg);
  const std::size_t np = estimate_rho ? 5 : 4;
  const double scale = static_cast<double>(obs.size());

  // natural chart vector th = {m, a_s, a_c, b[, rho]}; optimizer coordinates are logs and atanh(rho)
  auto to_natural = [&](const std::vector<double>& x) {
    std::vector<double> th(np);
    for (int i = 0; i < 4; ++i) th[i] = std::exp(x[i]);
    if (estimate_rho) th[4] = std::tanh(x[4]);
    return th;
  };
  auto negll_natural = [&](const std::vector<double>& th) -> double {
    if (!(th[3] > th[1] + th[2])) return kNaN;
    DiffusionParams p;
    try {
      p = from_chart(th, delta, init.s0, estimate_rho);
    } catch (const Error&) {
      return kNaN;
    }
    return -simulated_loglik(p, obs, cfg, ws);
  };
  auto value = [&](const std::vector<double>& x) -> double {
    auto th = to_natural(x);
    const double r = (th[1] + th[2]) / th[3];
    if (r >= 0.999) return kNaN;
    double pen = 0.0;
    if (r > 0.95) {
      const double u = (r - 0.95) / (1.0 - r);
      pen = scale * u * u;
    }
    return negll_natural(th) + pen;
  };
  const HawkesChart c0 = hawkes_chart(init, delta);
  if (!(c0.m > 0) || !(c0.a_s > 0) || !(c0.a_c > 0) || !(c0.b > c0.a_s + c0.a_c))
    fail_validation("initial diffusion parameters have no valid Hawkes chart for this tick");
  std::vector<double> x0 = {std::log(c0.m), std::log(c0.a_s), std::log(c0.a_c), std::log(c0.b)};
  if (estimate_rho) x0.push_back(std::atanh(std::clamp(init.rho, -0.99, 0.99)));
  Objective f = [&](const std::vector<double>& x, std::vector<double>*) { return value(x); };
  auto res = minimize_simplex(f, x0, cfg.simplex);
  auto th = to_natural(res.x);

  SmleFit out;
  out.params = from_chart(th, delta, init.s0, estimate_rho);
  SmleDiagnostics diag;
  const double ll = simulated_loglik(out.params, obs, cfg, ws, &diag);
  out.diagnostics = diag;

  FitResult& r = out.fit;
  r.method = FitMethod::QuasiNewton;
  r.iterations = res.iterations;
  r.names = {"m", "a_s", "a_c", "b"};
  if (estimate_rho) r.names.push_back("rho");
  r.names.push_back("sigma_ann");
  r.estimates = th;
  const double sig = std::sqrt(return_variance_diffusion(out.params, 1.0e6) / 1.0e6 * cfg.vol.year_seconds);
  r.estimates.push_back(sig);
  r.loglik = ll;

  // outer product of per-gap scores in the chart (log m, log a_s, log a_c, log(b - a_s - a_c)[, atanh rho])
  std::vector<double> y0 = {std::log(th[0]), std::log(th[1]), std::log(th[2]), std::log(th[3] - th[1] - th[2])};
  if (estimate_rho) y0.push_back(std::atanh(th[4]));
  auto from_score_chart = [&](const std::vector<double>& y) {
    std::vector<double> t(np);
    for (int i = 0; i < 3; ++i) t[i] = std::exp(y[i]);
    t[3] = std::exp(y[3]) + t[1] + t[2];
    if (estimate_rho) t[4] = std::tanh(y[4]);
    return t;
  };
  std::vector<std::vector<double>> scores(np);
  bool ok = std::isfinite(y0[3]);
  for (std::size_t i = 0; i < np && ok; ++i) {
    std::vector<double> yp = y0, ym = y0;
    yp[i] += cfg.score_step;
    ym[i] -= cfg.score_step;
    try {
      auto up = simulated_loglik_terms(from_chart(from_score_chart(yp), delta, init.s0, estimate_rho), obs, cfg, ws);
      auto dn = simulated_loglik_terms(from_chart(from_score_chart(ym), delta, init.s0, estimate_rho), obs, cfg, ws);
      scores[i].resize(up.size());
      for (std::size_t g = 0; g < up.size(); ++g) scores[i][g] = (up[g] - dn[g]) / (2.0 * cfg.score_step);
    } catch (const Error&) {
      ok = false;
    }
  }
  Eigen::MatrixXd info = Eigen::MatrixXd::Constant(np, np, kNaN);
  if (ok) {
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < np; ++j) {
        double acc = 0.0;
        for (std::size_t g = 0; g < scores[i].size(); ++g) acc += scores[i][g] * scores[j][g];
        info(i, j) = acc;
      }
  }
  auto se_chart = ok ? standard_errors_from_information(info) : std::vector<double>{};
  const bool pd = !se_chart.empty() && info.allFinite();
  std::vector<double> se;
  if (pd) {
    const auto n = static_cast<Eigen::Index>(np);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < 3; ++i) jac(i, i) = th[i];
    jac(3, 1) = th[1];
    jac(3, 2) = th[2];
    jac(3, 3) = th[3] - th[1] - th[2];
    if (estimate_rho) jac(4, 4) = 1.0 - th[4] * th[4];
    Eigen::MatrixXd cov_chart = info.llt().solve(Eigen::MatrixXd::Identity(n, n));
    r.covariance = jac * cov_chart * jac.transpose();
    for (std::size_t i = 0; i < np; ++i) se.push_back(std::sqrt(r.covariance(i, i)));
    // delta method for sigma_ann
    std::vector<double> gs(np, 0.0), tp = th;
    for (std::size_t i = 0; i < np; ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(th[i]));
      tp[i] = th[i] + h;
      double up = kNaN, dn = kNaN;
      try {
        auto pu = from_chart(tp, delta, init.s0, estimate_rho);
        up = std::sqrt(return_variance_diffusion(pu, 1.0e6) / 1.0e6 * cfg.vol.year_seconds);
        tp[i] = th[i] - h;
        auto pd2 = from_chart(tp, delta, init.s0, estimate_rho);
        dn = std::sqrt(return_variance_diffusion(pd2, 1.0e6) / 1.0e6 * cfg.vol.year_seconds);
      } catch (const Error&) {
      }
      tp[i] = th[i];
      gs[i] = (up - dn) / (2.0 * h);
    }
    Eigen::VectorXd gv = Eigen::Map<Eigen::VectorXd>(gs.data(), static_cast<Eigen::Index>(np));
    se.push_back(std::sqrt(std::max(0.0, gv.dot(r.covariance * gv))));
    r.std_errors = se;
  } else {
    r.covariance = Eigen::MatrixXd::Constant(np, np, kNaN);
    r.std_errors.assign(np + 1, kNaN);
  }
  r.converged = res.converged && pd && std::isfinite(ll);
  return out;
}

std::string smle_csv_header(bool with_rho) {
  std::string h = "date,m,a_s,a_c,b";
  if (with_rho) h += ",rho";
  h += ",sigma_ann,se_m,se_a_s,se_a_c,se_b";
  if (with_rho) h += ",se_rho";
  h += ",se_sigma_ann,loglik,iterations,converged,floored";
  return h;
}

std::string smle_csv_row(const std::string& date, const SmleFit& f, bool with_rho) {
  std::string row = date;
  for (double v : f.fit.estimates) row += "," + format_double(v);
  for (double v : f.fit.std_errors) row += "," + format_double(v);
  (void)with_rho;
  row += "," + format_double(f.fit.loglik) + "," + std::to_string(f.fit.iterations) + "," +
         (f.fit.converged ? "1" : "0") + "," + std::to_string(f.diagnostics.floored);
  return row;
}

}  // namespace hawkesvol
