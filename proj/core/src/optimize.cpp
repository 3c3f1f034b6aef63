#include "hawkesvol/optimize.hpp"

#include <algorithm>
#include <cmath>

#include <ceres/ceres.h>
#include <gsl/gsl_multimin.h>

namespace hawkesvol {

namespace {

class CeresAdapter : public ceres::FirstOrderFunction {
 public:
  CeresAdapter(const Objective& f, int n) : f_(f), n_(n) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    std::vector<double> x(parameters, parameters + n_);
    std::vector<double> g;
    double v = f_(x, gradient ? &g : nullptr);
    if (!std::isfinite(v)) return false;
    *cost = v;
    if (gradient) {
      for (int i = 0; i < n_; ++i) {
        if (!std::isfinite(g[i])) return false;
        gradient[i] = g[i];
      }
    }
    return true;
  }

  int NumParameters() const override { return n_; }

 private:
  const Objective& f_;
  int n_;
};

struct SimplexCall {
  const Objective* f;
  std::size_t n;
};

double simplex_value(const gsl_vector* v, void* params) {
  auto* call = static_cast<SimplexCall*>(params);
  std::vector<double> x(call->n);
  for (std::size_t i = 0; i < call->n; ++i) x[i] = gsl_vector_get(v, i);
  const double val = (*call->f)(x, nullptr);
  return std::isfinite(val) ? val : 1e300;
}

double step_for(double x, double rel) { return rel * std::max(1.0, std::abs(x)); }

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0, const MinimizeOptions& opts) {
  const int n = static_cast<int>(x0.size());
  ceres::GradientProblem problem(new CeresAdapter(f, n));
  ceres::GradientProblemSolver::Options o;
  o.line_search_direction_type = ceres::BFGS;
  o.line_search_type = ceres::WOLFE;
  o.max_num_iterations = opts.max_iterations;
  o.function_tolerance = opts.function_tolerance;
  o.gradient_tolerance = opts.gradient_tolerance;
  o.parameter_tolerance = opts.parameter_tolerance;
  o.logging_type = ceres::SILENT;
  o.minimizer_progress_to_stdout = false;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(o, problem, x0.data(), &summary);

  MinimizeResult r;
  r.x = x0;
  r.value = summary.final_cost;
  r.iterations = static_cast<int>(summary.iterations.size());
  r.converged = summary.termination_type == ceres::CONVERGENCE;
  return r;
}

namespace {

MinimizeResult simplex_run(const Objective& f, const std::vector<double>& x0, const SimplexOptions& opts) {
  const std::size_t n = x0.size();
  SimplexCall call{&f, n};
  gsl_multimin_function fn{&simplex_value, n, &call};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x, i, x0[i]);
    gsl_vector_set(step, i, opts.initial_step);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, step);
  MinimizeResult r;
  const int max_iter = std::max(1, opts.max_evaluations / 2);
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && r.iterations < max_iter) {
    ++r.iterations;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), opts.size_tolerance);
  }
  r.converged = status == GSL_SUCCESS;
  r.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(s->x, i);
  r.value = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return r;
}

}  // namespace

MinimizeResult minimize_simplex(const Objective& f, std::vector<double> x0, const SimplexOptions& opts) {
  MinimizeResult best = simplex_run(f, x0, opts);
  for (int k = 0; k < opts.max_restarts; ++k) {
    MinimizeResult next = simplex_run(f, best.x, opts);
    next.iterations += best.iterations;
    const bool gained = next.value < best.value - opts.restart_gain;
    if (next.value <= best.value) best = next;
    else best.iterations = next.iterations;
    if (!gained) break;
  }
  return best;
}

std::vector<double> numerical_gradient(const Objective& f, const std::vector<double>& x, double rel_step) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double h = step_for(x[i], rel_step);
    xp[i] = x[i] + h;
    double fp = f(xp, nullptr);
    xp[i] = x[i] - h;
    double fm = f(xp, nullptr);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd hessian_from_gradient(const Objective& f, const std::vector<double>& x, double rel_step) {
  const std::size_t n = x.size();
  Eigen::MatrixXd h(n, n);
  std::vector<double> xp = x, gp, gm;
  for (std::size_t i = 0; i < n; ++i) {
    double s = step_for(x[i], rel_step);
    xp[i] = x[i] + s;
    f(xp, &gp);
    xp[i] = x[i] - s;
    f(xp, &gm);
    xp[i] = x[i];
    for (std::size_t j = 0; j < n; ++j) h(j, i) = (gp[j] - gm[j]) / (2.0 * s);
  }
  return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd hessian_from_values(const Objective& f, const std::vector<double>& x, double rel_step) {
  const std::size_t n = x.size();
  Eigen::MatrixXd h(n, n);
  std::vector<double> xp = x;
  const double f0 = f(x, nullptr);
  std::vector<double> steps(n);
  for (std::size_t i = 0; i < n; ++i) steps[i] = step_for(x[i], rel_step);
  for (std::size_t i = 0; i < n; ++i) {
    const double si = steps[i];
    xp[i] = x[i] + si;
    double fp = f(xp, nullptr);
    xp[i] = x[i] - si;
    double fm = f(xp, nullptr);
    xp[i] = x[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (si * si);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sj = steps[j];
      double acc = 0.0;
      for (int a : {1, -1}) {
        for (int b : {1, -1}) {
          xp[i] = x[i] + a * si;
          xp[j] = x[j] + b * sj;
          acc += a * b * f(xp, nullptr);
        }
      }
      xp[i] = x[i];
      xp[j] = x[j];
      h(i, j) = h(j, i) = acc / (4.0 * si * sj);
    }
  }
  return h;
}

std::vector<double> standard_errors_from_information(const Eigen::MatrixXd& h) {
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) return {};
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(h.rows(), h.cols()));
  std::vector<double> se(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    if (!(cov(i, i) >= 0.0)) return {};
    se[i] = std::sqrt(cov(i, i));
  }
  return se;
}

}  // namespace hawkesvol
