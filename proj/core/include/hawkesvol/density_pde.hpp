#pragma once

#include <complex>
#include <string>
#include <vector>

#include "hawkesvol/diffusion.hpp"

namespace hawkesvol {

struct PdeGrid {
  double n_min = -1.0, n_max = 1.0;
  int n_steps = 64;
  double v_min = 0.0, v_max = 1.0;
  int v_steps = 64;
  std::vector<double> psi;  // symmetric about 0, contains 0
  double dt = 0.05;
  double horizon = 1.0;
  int damping_steps = 4;  // implicit half steps at the start

  double dn() const { return (n_max - n_min) / n_steps; }
  double dv() const { return (v_max - v_min) / v_steps; }
  double n_at(int i) const { return n_min + (i + 0.5) * dn(); }
  double v_at(int j) const { return v_min + (j + 0.5) * dv(); }
};

std::vector<double> psi_grid(double extent, int intervals);

// Sized from the stationary spreads of n and V and the Gaussian proxy sqrt(theta * horizon).
PdeGrid default_pde_grid(const DiffusionParams& p, double horizon, int psi_intervals = 256);

void require_valid(const PdeGrid& g, const DiffusionParams& p);

struct PdeSolution {
  PdeGrid grid;
  // fields[k][i * v_steps + j] at psi[k], price shifted by s0
  std::vector<std::vector<std::complex<double>>> fields;
  std::vector<std::complex<double>> transform;  // integral over (n, v) per psi
  double zero_freq_mass = 0.0;
  double boundary_mass = 0.0;  // psi = 0 mass in the outermost cells
};

PdeSolution solve_transformed_pde(const DiffusionParams& p, const PdeGrid& g);

struct PriceDensity {
  std::vector<double> prices, density;
  double mass_defect = 0.0;  // |1 - integral| before clipping and renormalizing
};

std::vector<double> default_price_grid(const DiffusionParams& p, double horizon, int points = 801);
PriceDensity invert_to_price_density(const PdeSolution& sol, const std::vector<double>& prices, double s0);

double density_mean(const PriceDensity& d);
double density_variance(const PriceDensity& d);
// Probability mass of each bin [edges[k], edges[k+1]) by trapezoid integration with linear interpolation.
std::vector<double> bin_probabilities(const PriceDensity& d, const std::vector<double>& edges);

std::string density_csv(const PriceDensity& d);

}  // namespace hawkesvol
