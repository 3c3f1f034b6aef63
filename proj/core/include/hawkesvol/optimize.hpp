#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace hawkesvol {

// Returns the objective to minimize and fills grad when non-null.
// A non-finite return marks the point infeasible; line searches back off.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>* grad)>;

struct MinimizeOptions {
  int max_iterations = 500;
  double function_tolerance = 1e-9;
  double gradient_tolerance = 1e-6;
  double parameter_tolerance = 1e-12;
};

struct MinimizeResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// BFGS with a Wolfe line search.
MinimizeResult minimize_bfgs(const Objective& f, std::vector<double> x0,
                             const MinimizeOptions& opts = {});

struct SimplexOptions {
  int max_evaluations = 2000;
  double initial_step = 0.1;  // per coordinate
  double size_tolerance = 1e-4;
  int max_restarts = 0;       // fresh simplex around the best point while a run gains more than restart_gain
  double restart_gain = 1e-3;
};

// Nelder-Mead on values only (grad is never requested); for non-smooth objectives.
MinimizeResult minimize_simplex(const Objective& f, std::vector<double> x0, const SimplexOptions& opts = {});

// Central differences of values, step h_i = rel_step * max(1, |x_i|).
std::vector<double> numerical_gradient(const Objective& f, const std::vector<double>& x,
                                       double rel_step = 1e-6);

// Central differences of the supplied gradient, symmetrized.
Eigen::MatrixXd hessian_from_gradient(const Objective& f, const std::vector<double>& x,
                                      double rel_step = 1e-4);

// Second central differences of values only.
Eigen::MatrixXd hessian_from_values(const Objective& f, const std::vector<double>& x,
                                    double rel_step = 1e-4);

// Square roots of the diagonal of the inverse of h; empty if h is not positive definite.
std::vector<double> standard_errors_from_information(const Eigen::MatrixXd& h);

}  // namespace hawkesvol
