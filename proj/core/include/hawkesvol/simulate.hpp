#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hawkesvol/event_stream.hpp"
#include "hawkesvol/params.hpp"

namespace hawkesvol {

enum class InitMode { Stationary, Explicit };

struct SimConfig {
  double horizon = kSessionSeconds;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
  InitMode init = InitMode::Stationary;
  // Explicit start. Symmetric model: total intensities {lambda1, lambda2}, each >= mu.
  // Full model: excess components {l11, l12, l21, l22}, each >= 0.
  std::vector<double> initial_values;
  std::size_t max_events = 10'000'000;
};

struct SimOutput {
  EventStream stream;
  // excess components {l11, l12, l21, l22} just after the last event, decayed to the horizon
  std::array<double, 4> final_excess{};
};

EventStream simulate(const SymmetricHawkesParams& p, const SimConfig& cfg);
EventStream simulate(const FullHawkesParams& p, const SimConfig& cfg);
SimOutput simulate_with_state(const FullHawkesParams& p, const std::array<double, 4>& initial_excess,
                              const SimConfig& cfg);

// Path i uses substream (cfg.seed, i); runs in parallel.
std::vector<EventStream> simulate_batch(const SymmetricHawkesParams& p, const SimConfig& cfg, std::size_t n_paths);

// Excess components at time 0 implied by the configuration.
std::array<double, 4> initial_excess(const FullHawkesParams& p, const SimConfig& cfg);
std::array<double, 4> initial_excess(const SymmetricHawkesParams& p, const SimConfig& cfg);

struct PricePath {
  double s0 = 0.0;
  std::vector<double> times;   // event times, increasing
  std::vector<double> prices;  // price just after each event
  double value_at(double t) const;
};

PricePath price_path(const EventStream& s, double tick, double s0);

// Counts of events at or before t.
std::size_t count_at(const std::vector<double>& times, double t);

struct PathIntensities {
  std::vector<double> times;
  std::vector<std::uint8_t> sides;
  std::vector<double> lambda1_left, lambda2_left;    // just before each event
  std::vector<double> lambda1_right, lambda2_right;  // just after each event
};

PathIntensities sample_path_intensities(const FullHawkesParams& p, const EventStream& s,
                                        const std::array<double, 4>& initial_excess);
PathIntensities sample_path_intensities(const SymmetricHawkesParams& p, const EventStream& s);

// Excess components at time t including events at or before t.
std::array<double, 4> excess_state_at(const FullHawkesParams& p, const EventStream& s, double t,
                                      const std::array<double, 4>& initial_excess);

// (lambda1(t), lambda2(t)) under stationary start.
std::array<double, 2> intensity_at(const SymmetricHawkesParams& p, const EventStream& s, double t);

}  // namespace hawkesvol
