#include "hawkesvol/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "hawkesvol/error.hpp"
#include "hawkesvol/parallel.hpp"
#include "hawkesvol/rng.hpp"

namespace hawkesvol {

void require_valid(const DiffusionParams& p) {
  std::string bad;
  if (!(p.kappa1 > 0)) bad += " kappa1>0";
  if (!(p.kappa2 > 0)) bad += " kappa2>0";
  if (!(p.theta > 0)) bad += " theta>0";
  if (!(p.gamma >= 0)) bad += " gamma>=0";
  if (!std::isfinite(p.phi)) bad += " phi finite";
  if (!(std::abs(p.rho) <= 1.0)) bad += " |rho|<=1";
  if (!(p.s0 > 0)) bad += " s0>0";
  if (!bad.empty()) fail_validation("invalid diffusion parameters, need:" + bad);
}

DiffusionParams map_params(double m, double a_s, double a_c, double b, double delta, double s0) {
  if (!(b > a_s + a_c)) fail_validation("unstable: b must exceed a_s + a_c");
  if (!(m > 0) || !(a_s >= 0) || !(a_c >= 0) || !(delta > 0) || !(s0 > 0))
    fail_validation("map_params needs m > 0, a_s, a_c >= 0, delta > 0, s0 > 0");
  DiffusionParams p;
  p.kappa1 = b - a_s + a_c;
  p.kappa2 = b - a_s - a_c;
  p.theta = 2.0 * b * m * delta * delta / (b - a_s - a_c);
  p.gamma = delta * (a_s + a_c);
  p.phi = a_s - a_c;
  p.rho = 0.0;
  p.s0 = s0;
  const double check = p.gamma / delta - p.kappa1 + p.kappa2;
  if (std::abs(check - p.phi) > 1e-12 * std::max(1.0, std::abs(p.phi))) fail_numerical("parameter identity violated");
  return p;
}

double return_variance_diffusion(const DiffusionParams& p, double t) {
  if (!(t > 0)) fail_validation("return variance needs t > 0");
  const double k = p.kappa1, x = k * t;
  // -e^{-2x} + 4e^{-x} - 3 + 2x and x - 1 + e^{-x}, cancellation-free for small x
  double a, b;
  if (x < 1e-3) {
    a = x * x * x * (2.0 / 3.0 - x * 0.5 + x * x * 7.0 / 30.0);
    b = x * x * (0.5 - x / 6.0 + x * x / 24.0);
  } else {
    a = -std::exp(-2.0 * x) + 4.0 * std::exp(-x) - 3.0 + 2.0 * x;
    b = x + std::expm1(-x);
  }
  const double v = p.phi * p.phi * p.theta * a / (2.0 * k * k * k) + 2.0 * p.phi * p.theta * b / (k * k) + p.theta * t;
  return v / (p.s0 * p.s0);
}

double mean_signature_plot(const DiffusionParams& p, double tau) { return return_variance_diffusion(p, tau) / tau; }

double third_moment_K(const DiffusionParams& p, double t) {
  if (!(t > 0)) fail_validation("K needs t > 0");
  const double k1 = p.kappa1, k2 = p.kappa2, g = p.gamma, th = p.theta, ph = p.phi;
  // x - 1 + e^{-x} and x^2/2 - x + 1 - e^{-x} evaluated stably
  auto f1 = [](double x) { return x < 1e-3 ? x * x * (0.5 - x / 6.0 + x * x / 24.0) : x + std::expm1(-x); };
  auto f2 = [](double x) {
    return x < 1e-2 ? x * x * x * (1.0 / 6.0 - x / 24.0 + x * x / 120.0) : 0.5 * x * x - x - std::expm1(-x);
  };
  const double em1 = std::expm1(-k1 * t), em2 = std::expm1(-k2 * t), em12 = std::expm1(-(k1 + k2) * t);
  double br = 2.0 * g * th / (k2 * k2) * f1(k2 * t) + 2.0 * g * ph * th / (k1 * k1 * k1) * f2(k1 * t);
  double inner = (-k1 * k1 - k2 * k2 - k1 * k2) * t + 0.5 * (k1 * k1 * k2 + k1 * k2 * k2) * t * t -
                 (k2 * k2 + k1 * k2) / k1 * em1 - (k1 * k1 + k1 * k2) / k2 * em2 + k1 * k2 / (k1 + k2) * em12;
  br -= 2.0 * g * th * ph / (k1 * k1 * k2 * (k1 + k2)) * inner;
  return br / (p.s0 * p.s0 * p.s0);
}

double realized_third_moment(const std::vector<double>& prices, double s0) {
  double acc = 0.0;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    const double r0 = (prices[i - 1] - s0) / s0, r1 = (prices[i] - s0) / s0;
    acc += (r1 * r1 - r0 * r0) * (r1 - r0);
  }
  return acc;
}

DiffusionPaths simulate_paths(const DiffusionParams& p, const DiffusionSimSpec& spec) {
  require_valid(p);
  if (!(spec.dt > 0) || !(spec.horizon > 0)) fail_validation("diffusion simulation needs dt > 0 and horizon > 0");
  const auto steps = static_cast<std::size_t>(std::llround(spec.horizon / spec.dt));
  if (steps == 0) fail_validation("horizon shorter than one step");
  const double dt = spec.horizon / static_cast<double>(steps);
  const double sdt = std::sqrt(dt);
  std::vector<std::size_t> sample_steps;
  for (double ts : spec.sample_times) {
    auto k = static_cast<std::size_t>(std::llround(ts / dt));
    sample_steps.push_back(std::min(k, steps));
  }

  const std::size_t n = spec.n_paths;
  DiffusionPaths out;
  out.terminal_s.resize(n);
  out.terminal_n.resize(n);
  out.terminal_v.resize(n);
  if (!sample_steps.empty()) out.samples.assign(n, std::vector<double>(sample_steps.size()));
  if (spec.third_moment) out.third_moment.resize(n);
  if (spec.time_averages) {
    out.mean_v.resize(n);
    out.mean_n.resize(n);
  }
  std::vector<std::size_t> trunc(n, 0);
  const double rho = p.rho, rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double inv_s0 = 1.0 / p.s0;

  parallel_for(n, [&](std::size_t path) {
    Rng rng = make_rng(spec.seed, path);
    std::normal_distribution<double> norm;
    double s = p.s0, nn = 0.0, v = p.theta;
    double tm = 0.0, sum_v = 0.0, sum_n = 0.0;
    std::size_t next_sample = 0;
    std::size_t local_trunc = 0;
    auto record = [&](std::size_t k) {
      while (next_sample < sample_steps.size() && sample_steps[next_sample] == k) out.samples[path][next_sample++] = s;
    };
    record(0);
    for (std::size_t k = 0; k < steps; ++k) {
      const double z1 = norm(rng);
      const double z2 = rho * z1 + rho_c * norm(rng);
      const double vp = v > 0.0 ? v : 0.0;
      if (v < 0.0) ++local_trunc;
      const double sv = std::sqrt(vp) * sdt;
      const double r0 = (s - p.s0) * inv_s0;
      const double ds = nn * dt + sv * z1;
      if (spec.time_averages) {
        sum_v += vp;
        sum_n += nn;
      }
      s += ds;
      nn += -p.kappa1 * nn * dt + p.phi * sv * z1;
      v += p.kappa2 * (p.theta - vp) * dt + p.gamma * sv * z2;
      if (spec.third_moment) {
        const double r1 = (s - p.s0) * inv_s0;
        tm += (r1 * r1 - r0 * r0) * (r1 - r0);
      }
      record(k + 1);
    }
    out.terminal_s[path] = s;
    out.terminal_n[path] = nn;
    out.terminal_v[path] = v;
    if (spec.third_moment) out.third_moment[path] = tm;
    if (spec.time_averages) {
      out.mean_v[path] = sum_v / static_cast<double>(steps);
      out.mean_n[path] = sum_n / static_cast<double>(steps);
    }
    trunc[path] = local_trunc;
  });
  for (auto c : trunc) out.truncations += c;
  return out;
}

RhoEstimate estimate_rho(const std::vector<double>& rtm, const DiffusionParams& p, double t) {
  const double k = third_moment_K(p, t);
  if (!(std::abs(k) > 1e-300) || !std::isfinite(k)) fail_numerical("degenerate K: moment condition does not identify rho");
  if (rtm.size() < 2) fail_validation("rho estimate needs at least two samples");
  const double n = static_cast<double>(rtm.size());
  double mean = 0.0;
  for (double x : rtm) mean += x / k;
  mean /= n;
  double ss = 0.0;
  for (double x : rtm) ss += (x / k - mean) * (x / k - mean);
  RhoEstimate e;
  e.rho = mean;
  e.std_error = std::sqrt(ss / (n - 1.0) / n);
  e.k = k;
  e.n = rtm.size();
  return e;
}

std::vector<SurfacePoint> vol_surface(double theta, double s0, const std::vector<double>& kappa1_grid,
                                      const std::vector<double>& phi_grid, double t, const VolConvention& conv) {
  std::vector<SurfacePoint> out;
  for (double ph : phi_grid) {
    for (double k1 : kappa1_grid) {
      DiffusionParams p;
      p.kappa1 = k1;
      p.theta = theta;
      p.phi = ph;
      p.s0 = s0;
      out.push_back({k1, ph, std::sqrt(return_variance_diffusion(p, t) / t * conv.year_seconds)});
    }
  }
  return out;
}

KvMap to_kv(const DiffusionParams& p) {
  KvMap kv;
  kv.set("kappa1", p.kappa1);
  kv.set("kappa2", p.kappa2);
  kv.set("theta", p.theta);
  kv.set("gamma", p.gamma);
  kv.set("phi", p.phi);
  kv.set("rho", p.rho);
  kv.set("s0", p.s0);
  return kv;
}

DiffusionParams diffusion_from_kv(const KvMap& kv) {
  DiffusionParams p;
  if (kv.has("m")) {
    p = map_params(kv.get_double("m"), kv.get_double("a_s"), kv.get_double("a_c"), kv.get_double("b"),
                   kv.get_double("delta"), kv.get_double("s0", 1.0));
    p.rho = kv.get_double("rho", 0.0);
    return p;
  }
  p.kappa1 = kv.get_double("kappa1");
  p.kappa2 = kv.get_double("kappa2");
  p.theta = kv.get_double("theta");
  p.gamma = kv.get_double("gamma");
  p.phi = kv.get_double("phi");
  p.rho = kv.get_double("rho", 0.0);
  p.s0 = kv.get_double("s0", 1.0);
  return p;
}

}  // namespace hawkesvol
