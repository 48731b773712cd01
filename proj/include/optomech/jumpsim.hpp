#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "optomech/params.hpp"

namespace optomech::jumpsim {

enum class Channel : std::uint8_t {
  ThermalUp,    // n -> n + 1 at (omega_m/Q) n_bar (n + 1)
  ThermalDown,  // n -> n - 1 at (omega_m/Q) n (n_bar + 1)
  NonRwaPair,   // 0 -> 2, counter-rotating terms of the x^2 coupling
  Offset,       // 0 -> 1, linear coupling from the residual offset x0
};

const char* channel_name(Channel c);

struct JumpEvent {
  double time = 0.0;  // s
  unsigned n_after = 0;
  Channel channel = Channel::ThermalUp;
};

/// Phonon-number path starting in n = 0 at t = 0. Thermal events change n by
/// one; the two measurement channels act only from n = 0.
struct JumpTrajectory {
  std::vector<JumpEvent> events;
  double duration = 0.0;
  std::uint64_t seed = 0;
  bool measurement_channels = false;
  bool truncated = false;  // event limit reached; duration shortened to the next event time

  unsigned level_at(double t) const;
};

struct JumpRates {
  double thermal_unit = 0.0;  // omega_m / Q
  double n_bar = 0.0;
  double non_rwa_pair = 0.0;  // from n = 0 only
  double offset = 0.0;        // from n = 0 only

  double up(unsigned n) const { return thermal_unit * n_bar * (n + 1.0); }
  double down(unsigned n) const { return thermal_unit * n * (n_bar + 1.0); }
  double total_out(unsigned n) const;
};

/// Rates for p. T = 0 is accepted (empty bath); every other invariant is enforced.
JumpRates jump_rates(const ExperimentParams& p, bool include_measurement_channels);

/// Exact event-driven (competing exponential clocks) sampling on [0, duration).
/// Stops after max_events events, marking the trajectory truncated.
JumpTrajectory simulate_trajectory(const ExperimentParams& p, double duration, std::uint64_t seed,
                                   bool include_measurement_channels,
                                   std::size_t max_events = 200'000'000);

/// Lengths of completed stays in `level`; a stay cut off by the end of the
/// trajectory is not included.
std::vector<double> dwell_times(const JumpTrajectory& traj, unsigned level);

/// Time fraction spent in each of 0..max_level, plus one trailing entry for
/// everything above max_level.
std::vector<double> occupation_fractions(const JumpTrajectory& traj, unsigned max_level);

struct ReadoutTrace {
  double bin_width = 0.0;              // s
  std::vector<double> bin_centers;     // s
  std::vector<double> freq_estimates;  // rad/s
  std::vector<double> true_n_per_bin;  // time-weighted mean n
  double delta_omega = 0.0;            // rad/s per phonon
  double noise_sigma = 0.0;            // rad/s per bin
  bool bandwidth_ok = false;           // bin_width * omega_m >= 10 (when known)
};

/// Per-bin estimate delta_omega (n_bin + 1/2) + N(0, s_omega / bin_width).
/// Only whole bins inside the trajectory are produced.
ReadoutTrace binned_readout(const JumpTrajectory& traj, double delta_omega, double s_omega, double bin_width,
                            std::uint64_t seed);

/// Uses the per-phonon shift and PDH noise of p, and flags short bins.
ReadoutTrace binned_readout(const JumpTrajectory& traj, const ExperimentParams& p, double bin_width,
                            std::uint64_t seed);

struct DetectionStats {
  std::optional<double> detection_probability;  // P(estimate > threshold | n >= 1)
  std::optional<double> false_alarm_rate;       // P(estimate > threshold | n = 0), per bin
  std::size_t excited_bins = 0;
  std::size_t ground_bins = 0;
};

/// Classifies every bin against round(true_n). The threshold must lie
/// strictly between the n = 0 and n = 1 signal levels.
DetectionStats jump_detection_stats(const ReadoutTrace& trace, double threshold);

/// Gaussian peak of the estimates from bins that held a single level for
/// their whole width (maximum-likelihood mean and standard deviation).
struct LevelPeak {
  unsigned level = 0;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

std::vector<LevelPeak> level_peaks(const ReadoutTrace& trace, unsigned max_level);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::size_t> counts;

  double bin_width() const { return (hi - lo) / static_cast<double>(counts.size()); }
};

/// Samples outside [lo, hi) are dropped.
Histogram histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins);

}  // namespace optomech::jumpsim
