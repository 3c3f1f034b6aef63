#include "hawkesvol/density_pde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hawkesvol/error.hpp"
#include "hawkesvol/kv_config.hpp"
#include "hawkesvol/parallel.hpp"

namespace hawkesvol {

using cplx = std::complex<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Pre-factored tridiagonal system; l[0] and r[last] unused.
struct Tridiag {
  std::vector<cplx> l, m, c;

  void factor(const std::vector<cplx>& lo, const std::vector<cplx>& d, const std::vector<cplx>& up) {
    const std::size_t n = d.size();
    l = lo;
    m.resize(n);
    c.resize(n);
    m[0] = 1.0 / d[0];
    c[0] = up[0] * m[0];
    for (std::size_t i = 1; i < n; ++i) {
      m[i] = 1.0 / (d[i] - lo[i] * c[i - 1]);
      c[i] = up[i] * m[i];
    }
  }

  // in-place solve on x[k * stride], k < n
  void solve(cplx* x, std::size_t stride) const {
    const std::size_t n = m.size();
    x[0] *= m[0];
    for (std::size_t i = 1; i < n; ++i) x[i * stride] = (x[i * stride] - l[i] * x[(i - 1) * stride]) * m[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i * stride] -= c[i] * x[(i + 1) * stride];
  }
};

// Band coefficients of the two split operators for one frequency.
struct Operators {
  int nn, nv;
  // along n for each v row j: lo/di/up indexed [j * nn + i]
  std::vector<cplx> n_lo, n_di, n_up;
  // along v for each n column i: [i * nv + j]
  std::vector<cplx> v_lo, v_di, v_up;
  double cross = 0.0;  // gamma rho phi / (4 dn dv)
  std::vector<double> excess;  // explicit psi^2 v / 2 correction per v row
};

// Exponentially fitted diffusion for a face with real drift a and diffusion d: d * x coth x, x = a h / (2 d).
double fitted(double d, double a, double h) {
  const double x = std::abs(a) * h / 2.0;
  if (d <= 0.0) return x;
  const double r = x / d;
  if (r < 1e-4) return d * (1.0 + r * r / 3.0);
  return x / std::tanh(r);
}

Operators build_operators(const DiffusionParams& p, const PdeGrid& g, double psi) {
  Operators op;
  const int nn = g.n_steps, nv = g.v_steps;
  op.nn = nn;
  op.nv = nv;
  const double dn = g.dn(), dv = g.dv();
  const cplx I(0.0, 1.0);
  // -psi^2 v / 2 is shared so that each one-dimensional operator is dissipative alone:
  // the n part needs all of it against i psi phi v, the v part needs rho^2 of it against i psi gamma rho v
  const double wn = p.phi != 0.0 ? 1.0 : 0.0;
  const double wv = p.phi != 0.0 ? p.rho * p.rho : 1.0;
  op.excess.resize(nv);
  for (int j = 0; j < nv; ++j) op.excess[j] = 0.5 * psi * psi * g.v_at(j) * (wn + wv - 1.0);
  op.n_lo.assign(static_cast<std::size_t>(nn) * nv, 0.0);
  op.n_di = op.n_lo;
  op.n_up = op.n_lo;
  for (int j = 0; j < nv; ++j) {
    const double v = g.v_at(j);
    const double diff = 0.5 * p.phi * p.phi * v;
    for (int i = 0; i < nn; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nn + i;
      cplx di = -I * psi * g.n_at(i) - wn * 0.5 * psi * psi * v;
      if (i + 1 < nn) {
        const double ar = p.kappa1 * (g.n_min + (i + 1) * dn);
        const cplx a = ar + I * psi * p.phi * v;
        const double df = fitted(diff, ar, dn);
        di += (0.5 * a - df / dn) / dn;
        op.n_up[k] = (0.5 * a + df / dn) / dn;
      } else {
        di += -2.0 * diff / (dn * dn);
      }
      if (i > 0) {
        const double ar = p.kappa1 * (g.n_min + i * dn);
        const cplx a = ar + I * psi * p.phi * v;
        const double df = fitted(diff, ar, dn);
        di -= (0.5 * a + df / dn) / dn;
        op.n_lo[k] = -(0.5 * a - df / dn) / dn;
      } else {
        di += -2.0 * diff / (dn * dn);
      }
      op.n_di[k] = di;
    }
  }
  op.v_lo.assign(static_cast<std::size_t>(nn) * nv, 0.0);
  op.v_di = op.v_lo;
  op.v_up = op.v_lo;
  auto E = [&](double v) { return 0.5 * p.gamma * p.gamma * v; };
  auto B = [&](double v) { return cplx(-p.kappa2 * (p.theta - v), psi * p.gamma * p.rho * v); };
  for (int j = 0; j < nv; ++j) {
    const double v = g.v_at(j);
    cplx di = -wv * 0.5 * psi * psi * v;
    cplx lo = 0.0, up = 0.0;
    // extra diffusion on each interior face, fitted to the real part of the total drift b + E'
    auto extra = [&](double vf) {
      const double ef = E(vf);
      return fitted(ef, B(vf).real() + 0.5 * p.gamma * p.gamma, dv) - ef;
    };
    if (j + 1 < nv) {
      const double vf = g.v_min + (j + 1) * dv;
      const cplx b = B(vf);
      const double x = extra(vf);
      di += (0.5 * b - (E(v) + x) / dv) / dv;
      up = (0.5 * b + (E(g.v_at(j + 1)) + x) / dv) / dv;
    } else {
      di += -(E(g.v_max + 0.5 * dv) + E(v)) / (dv * dv);
    }
    if (j > 0) {
      const double vf = g.v_min + j * dv;
      const cplx b = B(vf);
      const double x = extra(vf);
      di -= (0.5 * b + (E(v) + x) / dv) / dv;
      lo = -(0.5 * b - (E(g.v_at(j - 1)) + x) / dv) / dv;
    }
    for (int i = 0; i < nn; ++i) {
      const std::size_t k = static_cast<std::size_t>(i) * nv + j;
      op.v_lo[k] = lo;
      op.v_di[k] = di;
      op.v_up[k] = up;
    }
  }
  op.cross = p.gamma * p.rho * p.phi / (4.0 * dn * dv);
  return op;
}

// u layout: [i * nv + j]
void apply_n(const Operators& op, const std::vector<cplx>& u, std::vector<cplx>& out) {
  const int nn = op.nn, nv = op.nv;
  for (int i = 0; i < nn; ++i) {
    for (int j = 0; j < nv; ++j) {
      const std::size_t k = static_cast<std::size_t>(j) * nn + i;
      const std::size_t c = static_cast<std::size_t>(i) * nv + j;
      cplx s = op.n_di[k] * u[c];
      if (i > 0) s += op.n_lo[k] * u[c - nv];
      if (i + 1 < nn) s += op.n_up[k] * u[c + nv];
      out[c] = s;
    }
  }
}

void apply_v(const Operators& op, const std::vector<cplx>& u, std::vector<cplx>& out) {
  const int nn = op.nn, nv = op.nv;
  for (int i = 0; i < nn; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * nv;
    for (int j = 0; j < nv; ++j) {
      const std::size_t c = base + j;
      cplx s = op.v_di[c] * u[c];
      if (j > 0) s += op.v_lo[c] * u[c - 1];
      if (j + 1 < nv) s += op.v_up[c] * u[c + 1];
      out[c] = s;
    }
  }
}

void add_explicit(const Operators& op, const PdeGrid& g, const std::vector<cplx>& u, double scale,
                  std::vector<cplx>& out) {
  const int nn = op.nn, nv = op.nv;
  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < nv; ++j)
      if (op.excess[j] != 0.0) {
        const std::size_t c = static_cast<std::size_t>(i) * nv + j;
        out[c] += scale * op.excess[j] * u[c];
      }
  if (op.cross == 0.0) return;
  auto w = [&](int i, int j) -> cplx {
    if (i < 0 || i >= nn || j < 0 || j >= nv) return 0.0;
    return g.v_at(j) * u[static_cast<std::size_t>(i) * nv + j];
  };
  for (int i = 0; i < nn; ++i)
    for (int j = 0; j < nv; ++j)
      out[static_cast<std::size_t>(i) * nv + j] +=
          scale * op.cross * (w(i + 1, j + 1) - w(i + 1, j - 1) - w(i - 1, j + 1) + w(i - 1, j - 1));
}

struct Factored {
  std::vector<Tridiag> rows;  // per v row, along n
  std::vector<Tridiag> cols;  // per n column, along v
};

Factored factor(const Operators& op, double w) {
  Factored f;
  const int nn = op.nn, nv = op.nv;
  f.rows.resize(nv);
  f.cols.resize(nn);
  std::vector<cplx> lo(nn), di(nn), up(nn);
  for (int j = 0; j < nv; ++j) {
    for (int i = 0; i < nn; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nn + i;
      lo[i] = -w * op.n_lo[k];
      di[i] = 1.0 - w * op.n_di[k];
      up[i] = -w * op.n_up[k];
    }
    f.rows[j].factor(lo, di, up);
  }
  lo.resize(nv);
  di.resize(nv);
  up.resize(nv);
  for (int i = 0; i < nn; ++i) {
    for (int j = 0; j < nv; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * nv + j;
      lo[j] = -w * op.v_lo[k];
      di[j] = 1.0 - w * op.v_di[k];
      up[j] = -w * op.v_up[k];
    }
    f.cols[i].factor(lo, di, up);
  }
  return f;
}

std::vector<cplx> initial_bump(const DiffusionParams& p, const PdeGrid& g) {
  const int nn = g.n_steps, nv = g.v_steps;
  const double sn = g.dn(), sv = g.dv();
  std::vector<cplx> u(static_cast<std::size_t>(nn) * nv, 0.0);
  double total = 0.0;
  for (int i = 0; i < nn; ++i) {
    const double zn = g.n_at(i) / sn;
    for (int j = 0; j < nv; ++j) {
      const double zv = (g.v_at(j) - p.theta) / sv;
      const double w = std::exp(-0.5 * (zn * zn + zv * zv));
      u[static_cast<std::size_t>(i) * nv + j] = w;
      total += w;
    }
  }
  const double norm = 1.0 / (total * g.dn() * g.dv());
  for (auto& x : u) x *= norm;
  return u;
}

double max_abs(const std::vector<cplx>& u) {
  double m = 0.0;
  for (const auto& x : u) {
    const double a = std::abs(x);
    if (!(a <= m)) m = a;  // propagates NaN
  }
  return m;
}

std::vector<cplx> solve_one(const DiffusionParams& p, const PdeGrid& g, double psi) {
  const Operators op = build_operators(p, g, psi);
  const int nn = g.n_steps, nv = g.v_steps;
  const std::size_t size = static_cast<std::size_t>(nn) * nv;
  std::vector<cplx> u = initial_bump(p, g), a1(size), a2(size), y(size);
  const double start_max = max_abs(u);

  const double half = 0.5 * g.dt;
  const int damp = std::max(0, g.damping_steps);
  double rest = g.horizon - damp * half;
  if (rest < 0.0) rest = 0.0;
  const int main_steps = rest > 0.0 ? std::max(1, static_cast<int>(std::ceil(rest / g.dt - 1e-9))) : 0;
  const double dt_main = main_steps > 0 ? rest / main_steps : 0.0;

  auto run = [&](int count, double dt, double weight) {
    if (count <= 0) return;
    const Factored f = factor(op, weight * dt);
    for (int s = 0; s < count; ++s) {
      apply_n(op, u, a1);
      apply_v(op, u, a2);
      for (std::size_t c = 0; c < size; ++c) y[c] = u[c] + dt * (a1[c] + a2[c]);
      add_explicit(op, g, u, dt, y);
      for (std::size_t c = 0; c < size; ++c) y[c] -= weight * dt * a1[c];
      for (int j = 0; j < nv; ++j) f.rows[j].solve(y.data() + j, static_cast<std::size_t>(nv));
      for (std::size_t c = 0; c < size; ++c) y[c] -= weight * dt * a2[c];
      for (int i = 0; i < nn; ++i) f.cols[i].solve(y.data() + static_cast<std::size_t>(i) * nv, 1);
      u.swap(y);
      if (s % 25 == 24 || s + 1 == count) {
        const double m = max_abs(u);
        if (!std::isfinite(m) || m > 10.0 * start_max)
          fail_numerical("PDE solution blew up at psi=" + format_double(psi) +
                         "; reduce dt_pde or refine the (n, v) grid");
      }
    }
  };
  // time step is used as given for the damped phase; the total horizon is kept exact
  const double damp_time = std::min(g.horizon, damp * half);
  run(damp, damp > 0 ? damp_time / damp : 0.0, 1.0);
  run(main_steps, dt_main, 0.5);
  return u;
}

}  // namespace

std::vector<double> psi_grid(double extent, int intervals) {
  if (!(extent > 0) || intervals < 2 || intervals % 2 != 0)
    fail_validation("psi grid needs extent > 0 and an even interval count >= 2");
  std::vector<double> out(static_cast<std::size_t>(intervals) + 1);
  const double d = 2.0 * extent / intervals;
  const int mid = intervals / 2;
  for (int k = 0; k <= intervals; ++k) out[k] = (k - mid) * d;
  return out;
}

PdeGrid default_pde_grid(const DiffusionParams& p, double horizon, int psi_intervals) {
  require_valid(p);
  if (!(horizon > 0)) fail_validation("PDE horizon must be > 0");
  PdeGrid g;
  const double sd_n = std::sqrt(p.phi * p.phi * p.theta / (2.0 * p.kappa1));
  const double half_n = std::max(12.0 * sd_n, 0.01 * std::sqrt(p.theta));
  g.n_min = -half_n;
  g.n_max = half_n;
  const double sd_v = std::sqrt(p.gamma * p.gamma * p.theta / (2.0 * p.kappa2));
  g.v_max = p.theta + std::max(14.0 * sd_v, p.theta);
  g.horizon = horizon;
  g.dt = std::min(horizon / 400.0, 0.1 / std::max(p.kappa1, p.kappa2));
  g.psi = psi_grid(8.0 / std::sqrt(p.theta * horizon), psi_intervals);
  return g;
}

void require_valid(const PdeGrid& g, const DiffusionParams& p) {
  if (!(g.n_min < 0.0 && 0.0 < g.n_max)) fail_validation("PDE grid needs n_min < 0 < n_max");
  if (g.v_min != 0.0) fail_validation("PDE grid needs v_min = 0");
  if (!(g.v_max > p.theta)) fail_validation("PDE grid needs v_max > theta");
  if (g.n_steps < 4 || g.v_steps < 4) fail_validation("PDE grid needs at least 4 cells per axis");
  if (!(g.horizon > 0)) fail_validation("PDE horizon must be > 0");
  if (!(g.dt > 0) || g.dt > g.horizon) fail_validation("PDE time step must be in (0, horizon]");
  if (g.psi.size() < 3 || g.psi.size() % 2 == 0) fail_validation("psi grid needs an odd number of points");
  const std::size_t n = g.psi.size(), mid = n / 2;
  if (g.psi[mid] != 0.0) fail_validation("psi grid must contain 0 at its centre");
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 && !(g.psi[k] > g.psi[k - 1])) fail_validation("psi grid must be increasing");
    if (std::abs(g.psi[k] + g.psi[n - 1 - k]) > 1e-12 * std::abs(g.psi[k]) + 1e-300)
      fail_validation("psi grid must be symmetric about 0");
  }
  // the explicit cross-derivative term is the only conditionally stable part of the split scheme
  const double cross = std::abs(p.gamma * p.rho * p.phi) * g.v_max * g.dt / (g.dn() * g.dv());
  if (cross > 1.0)
    fail_validation("PDE time step violates the cross-derivative stability bound (" + format_double(cross) +
                    " > 1); reduce dt_pde");
}

PdeSolution solve_transformed_pde(const DiffusionParams& p, const PdeGrid& g) {
  require_valid(p);
  require_valid(g, p);
  PdeSolution sol;
  sol.grid = g;
  const std::size_t n = g.psi.size(), mid = n / 2;
  sol.fields.resize(n);
  parallel_for(n - mid, [&](std::size_t k) { sol.fields[mid + k] = solve_one(p, g, g.psi[mid + k]); });
  for (std::size_t k = 0; k < mid; ++k) {
    const auto& src = sol.fields[n - 1 - k];
    auto& dst = sol.fields[k];
    dst.resize(src.size());
    for (std::size_t c = 0; c < src.size(); ++c) dst[c] = std::conj(src[c]);
  }
  const double area = g.dn() * g.dv();
  sol.transform.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx s = 0.0;
    for (const auto& x : sol.fields[k]) s += x;
    sol.transform[k] = s * area;
  }
  sol.zero_freq_mass = sol.transform[mid].real();
  const auto& u0 = sol.fields[mid];
  double edge = 0.0;
  for (int i = 0; i < g.n_steps; ++i)
    for (int j = 0; j < g.v_steps; ++j)
      if (i == 0 || i == g.n_steps - 1 || j == g.v_steps - 1)
        edge += std::abs(u0[static_cast<std::size_t>(i) * g.v_steps + j]);
  sol.boundary_mass = edge * area;
  return sol;
}

std::vector<double> default_price_grid(const DiffusionParams& p, double horizon, int points) {
  if (points < 3) fail_validation("price grid needs at least 3 points");
  const double sd = std::sqrt(return_variance_diffusion(p, horizon)) * p.s0;
  std::vector<double> out(static_cast<std::size_t>(points));
  const double lo = p.s0 - 10.0 * sd, step = 20.0 * sd / (points - 1);
  for (int k = 0; k < points; ++k) out[k] = lo + k * step;
  return out;
}

PriceDensity invert_to_price_density(const PdeSolution& sol, const std::vector<double>& prices, double s0) {
  const auto& psi = sol.grid.psi;
  if (psi.size() < 3 || sol.transform.size() != psi.size()) fail_validation("inversion needs fields on a psi grid");
  if (prices.size() < 2) fail_validation("price grid needs at least 2 points");
  for (std::size_t k = 1; k < prices.size(); ++k)
    if (!(prices[k] > prices[k - 1])) fail_validation("price grid must be increasing");
  const double dpsi = psi[1] - psi[0];
  PriceDensity d;
  d.prices = prices;
  d.density.resize(prices.size());
  for (std::size_t m = 0; m < prices.size(); ++m) {
    const double x = prices[m] - s0;
    double acc = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
      const double w = (k == 0 || k + 1 == psi.size()) ? 0.5 : 1.0;
      acc += w * (std::polar(1.0, psi[k] * x) * sol.transform[k]).real();
    }
    d.density[m] = acc * dpsi / (2.0 * kPi);
  }
  double mass = 0.0;
  for (std::size_t m = 1; m < prices.size(); ++m)
    mass += 0.5 * (d.density[m] + d.density[m - 1]) * (prices[m] - prices[m - 1]);
  d.mass_defect = std::abs(1.0 - mass);
  if (!(d.mass_defect <= 0.01))
    fail_numerical("price density mass defect " + format_double(d.mass_defect) +
                   " exceeds 1%; widen the price grid or refine the psi and (n, v) grids");
  for (auto& v : d.density) v = std::max(v, 0.0);
  double clipped = 0.0;
  for (std::size_t m = 1; m < prices.size(); ++m)
    clipped += 0.5 * (d.density[m] + d.density[m - 1]) * (prices[m] - prices[m - 1]);
  for (auto& v : d.density) v /= clipped;
  return d;
}

double density_mean(const PriceDensity& d) {
  double s = 0.0;
  for (std::size_t m = 1; m < d.prices.size(); ++m) {
    const double h = d.prices[m] - d.prices[m - 1];
    s += 0.5 * h * (d.prices[m] * d.density[m] + d.prices[m - 1] * d.density[m - 1]);
  }
  return s;
}

double density_variance(const PriceDensity& d) {
  const double mu = density_mean(d);
  double s = 0.0;
  for (std::size_t m = 1; m < d.prices.size(); ++m) {
    const double h = d.prices[m] - d.prices[m - 1];
    const double a = d.prices[m] - mu, b = d.prices[m - 1] - mu;
    s += 0.5 * h * (a * a * d.density[m] + b * b * d.density[m - 1]);
  }
  return s;
}

std::vector<double> bin_probabilities(const PriceDensity& d, const std::vector<double>& edges) {
  const auto& x = d.prices;
  const auto& f = d.density;
  auto cdf = [&](double t) {
    if (t <= x.front()) return 0.0;
    double acc = 0.0;
    for (std::size_t m = 1; m < x.size(); ++m) {
      const double h = x[m] - x[m - 1];
      if (t >= x[m]) {
        acc += 0.5 * h * (f[m] + f[m - 1]);
        continue;
      }
      const double s = t - x[m - 1];
      acc += f[m - 1] * s + (f[m] - f[m - 1]) * s * s / (2.0 * h);
      break;
    }
    return acc;
  };
  std::vector<double> out;
  if (edges.size() < 2) return out;
  out.reserve(edges.size() - 1);
  double prev = cdf(edges[0]);
  for (std::size_t k = 1; k < edges.size(); ++k) {
    const double c = cdf(edges[k]);
    out.push_back(c - prev);
    prev = c;
  }
  return out;
}

std::string density_csv(const PriceDensity& d) {
  std::ostringstream os;
  os << "price,density\n";
  for (std::size_t m = 0; m < d.prices.size(); ++m)
    os << format_double(d.prices[m]) << ',' << format_double(d.density[m]) << '\n';
  return os.str();
}

}  // namespace hawkesvol
