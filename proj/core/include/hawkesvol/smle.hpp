#pragma once

#include <cstdint>
#include <vector>

#include "hawkesvol/diffusion.hpp"
#include "hawkesvol/event_stream.hpp"
#include "hawkesvol/mle.hpp"
#include "hawkesvol/realized_vol.hpp"

namespace hawkesvol {

enum class LatentInit { Stationary, CarryForward };

struct SmleConfig {
  double obs_interval = 60.0;
  int n_sub = 60;
  int m_paths = 256;
  std::uint64_t seed = 0;
  LatentInit latent_init = LatentInit::Stationary;
  double log_density_floor = -700.0;  // per-gap floor on the log of the averaged density
  double tick = 1.0;                  // delta of the Hawkes chart
  SimplexOptions simplex{1500, 0.1, 2e-3, 6, 1e-3};  // in log coordinates
  double score_step = 5e-2;     // log-coordinate step of the per-gap scores used for standard errors
  VolConvention vol;
};

void require_valid(const SmleConfig& c);

// Price at every obs_interval boundary: the last tick at or before the boundary.
std::vector<double> resample_observations(const EventStream& s, double tick, double s0, const SmleConfig& cfg);
std::vector<double> resample_observations(const PriceSeries& s, const SmleConfig& cfg);

// Pre-drawn shocks shared by every evaluation (common random numbers).
class SmleWorkspace {
 public:
  SmleWorkspace(std::size_t gaps, const SmleConfig& cfg);
  const float* shocks(std::size_t gap, std::size_t path) const {
    return data_.data() + (gap * paths_ + path) * per_path_;
  }
  std::size_t gaps() const { return gaps_; }

 private:
  std::size_t gaps_, paths_, per_path_;
  std::vector<float> data_;
};

struct SmleDiagnostics {
  std::size_t floored = 0;  // gaps whose log density hit the floor
};

double simulated_loglik(const DiffusionParams& p, const std::vector<double>& obs, const SmleConfig& cfg,
                        const SmleWorkspace& ws, SmleDiagnostics* diag = nullptr);
// Per-gap log densities.
std::vector<double> simulated_loglik_terms(const DiffusionParams& p, const std::vector<double>& obs,
                                           const SmleConfig& cfg, const SmleWorkspace& ws,
                                           SmleDiagnostics* diag = nullptr);
double simulated_loglik(const DiffusionParams& p, const std::vector<double>& obs, const SmleConfig& cfg,
                        SmleDiagnostics* diag = nullptr);

// Exact log-likelihood of i.i.d. Gaussian increments with variance theta * interval (gamma = phi = 0 case).
double gaussian_loglik(const std::vector<double>& obs, double theta, double interval);

struct HawkesChart {
  double m = 0.0, a_s = 0.0, a_c = 0.0, b = 0.0;
};

// Inverse of map_params for a given tick; uses kappa1, kappa2, theta, gamma.
HawkesChart hawkes_chart(const DiffusionParams& p, double delta);

struct SmleFit {
  FitResult fit;  // names m, a_s, a_c, b[, rho], sigma_ann
  DiffusionParams params;
  SmleDiagnostics diagnostics;
};

SmleFit fit_diffusion(const std::vector<double>& obs, const DiffusionParams& init, const SmleConfig& cfg,
                      bool estimate_rho);

std::string smle_csv_header(bool with_rho);
std::string smle_csv_row(const std::string& date, const SmleFit& f, bool with_rho);

}  // namespace hawkesvol
