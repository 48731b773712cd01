#include "optomech/jumpsim.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "optomech/errors.hpp"
#include "optomech/mechanics.hpp"
#include "optomech/qnd.hpp"
#include "optomech/random.hpp"

namespace optomech::jumpsim {

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::ThermalUp:
      return "thermal_up";
    case Channel::ThermalDown:
      return "thermal_down";
    case Channel::NonRwaPair:
      return "non_rwa_pair";
    case Channel::Offset:
      return "offset";
  }
  return "unknown";
}

unsigned JumpTrajectory::level_at(double t) const {
  const auto it =
      std::upper_bound(events.begin(), events.end(), t, [](double v, const JumpEvent& e) { return v < e.time; });
  return it == events.begin() ? 0u : std::prev(it)->n_after;
}

double JumpRates::total_out(unsigned n) const {
  double total = up(n) + down(n);
  if (n == 0) total += non_rwa_pair + offset;
  return total;
}

JumpRates jump_rates(const ExperimentParams& p, bool include_measurement_channels) {
  auto violations = validate(p);
  std::erase_if(violations, [&](const Violation& v) { return v.field == "T" && p.T == 0.0; });
  if (!violations.empty()) throw ConfigError(violations.front().field, violations.front().message);

  JumpRates rates;
  rates.thermal_unit = p.omega_m / p.Q;
  rates.n_bar = mechanics::thermal_occupation(p.T, p.omega_m).n_bar;
  if (include_measurement_channels) {
    rates.non_rwa_pair = 1.0 / qnd::rwa_lifetime(p);
    if (const auto tau = qnd::linear_lifetime(p)) rates.offset = 1.0 / *tau;
  }
  return rates;
}

JumpTrajectory simulate_trajectory(const ExperimentParams& p, double duration, std::uint64_t seed,
                                   bool include_measurement_channels, std::size_t max_events) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw DomainError("duration must be > 0");
  const JumpRates rates = jump_rates(p, include_measurement_channels);

  JumpTrajectory traj;
  traj.duration = duration;
  traj.seed = seed;
  traj.measurement_channels = include_measurement_channels;

  DeterministicRng rng(seed);
  double t = 0.0;
  unsigned n = 0;
  while (true) {
    const double up = rates.up(n);
    const double down = rates.down(n);
    const double pair = n == 0 ? rates.non_rwa_pair : 0.0;
    const double offset = n == 0 ? rates.offset : 0.0;
    const double total = up + down + pair + offset;
    if (total <= 0.0) break;

    t += rng.exponential(total);
    if (t >= duration) break;
    if (traj.events.size() == max_events) {
      // The state is known exactly up to the next event time.
      traj.duration = t;
      traj.truncated = true;
      break;
    }

    const double pick = rng.uniform() * total;
    Channel channel;
    if (pick < up) {
      channel = Channel::ThermalUp;
      n += 1;
    } else if (pick < up + down) {
      channel = Channel::ThermalDown;
      n -= 1;
    } else if (pick < up + down + pair) {
      channel = Channel::NonRwaPair;
      n = 2;
    } else {
      channel = Channel::Offset;
      n = 1;
    }
    traj.events.push_back({t, n, channel});
  }
  return traj;
}

std::vector<double> dwell_times(const JumpTrajectory& traj, unsigned level) {
  std::vector<double> out;
  unsigned n = 0;
  double entered = 0.0;
  for (const auto& e : traj.events) {
    if (n == level) out.push_back(e.time - entered);
    n = e.n_after;
    entered = e.time;
  }
  return out;
}

std::vector<double> occupation_fractions(const JumpTrajectory& traj, unsigned max_level) {
  std::vector<double> time(max_level + 2, 0.0);
  unsigned n = 0;
  double start = 0.0;
  const auto add = [&](double end) { time[std::min(n, max_level + 1)] += end - start; };
  for (const auto& e : traj.events) {
    add(e.time);
    n = e.n_after;
    start = e.time;
  }
  add(traj.duration);
  for (auto& v : time) v /= traj.duration;
  return time;
}

ReadoutTrace binned_readout(const JumpTrajectory& traj, double delta_omega, double s_omega, double bin_width,
                            std::uint64_t seed) {
  if (!(bin_width > 0.0)) throw DomainError("bin_width must be > 0");
  if (!(s_omega >= 0.0)) throw DomainError("s_omega must be >= 0");

  ReadoutTrace out;
  out.bin_width = bin_width;
  out.delta_omega = delta_omega;
  out.noise_sigma = std::sqrt(s_omega / bin_width);
  const auto bins = static_cast<std::size_t>(std::floor(traj.duration / bin_width));
  out.bin_centers.resize(bins);
  out.true_n_per_bin.assign(bins, 0.0);
  out.freq_estimates.resize(bins);

  // Events before a bin's start were consumed by earlier bins.
  unsigned n = 0;
  std::size_t ev = 0;
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = bin_width * static_cast<double>(b);
    const double hi = lo + bin_width;
    out.bin_centers[b] = lo + 0.5 * bin_width;
    double weighted = 0.0;
    double pos = lo;
    const unsigned level_at_start = n;
    const std::size_t first_event = ev;
    while (ev < traj.events.size() && traj.events[ev].time < hi) {
      weighted += n * (traj.events[ev].time - pos);
      pos = traj.events[ev].time;
      n = traj.events[ev].n_after;
      ++ev;
    }
    weighted += n * (hi - pos);
    out.true_n_per_bin[b] = ev == first_event ? level_at_start : weighted / bin_width;
  }

  DeterministicRng rng(seed);
  for (std::size_t b = 0; b < bins; ++b) {
    const double noise = out.noise_sigma > 0.0 ? out.noise_sigma * rng.normal() : 0.0;
    out.freq_estimates[b] = delta_omega * (out.true_n_per_bin[b] + 0.5) + noise;
  }
  return out;
}

ReadoutTrace binned_readout(const JumpTrajectory& traj, const ExperimentParams& p, double bin_width,
                            std::uint64_t seed) {
  const double dw = qnd::detuning_per_phonon(p);
  const double s_omega = qnd::pdh_noise_psd(p).s_omega;
  auto out = binned_readout(traj, dw, s_omega, bin_width, seed);
  out.bandwidth_ok = bin_width * p.omega_m >= 10.0;
  return out;
}

DetectionStats jump_detection_stats(const ReadoutTrace& trace, double threshold) {
  const double lo = 0.5 * trace.delta_omega;
  const double hi = 1.5 * trace.delta_omega;
  if (!(threshold > std::min(lo, hi) && threshold < std::max(lo, hi))) {
    throw DomainError("threshold must lie between the n=0 and n=1 signal levels");
  }
  std::size_t hits = 0;
  std::size_t alarms = 0;
  DetectionStats stats;
  for (std::size_t i = 0; i < trace.freq_estimates.size(); ++i) {
    const bool flagged = trace.freq_estimates[i] > threshold;
    if (std::lround(trace.true_n_per_bin[i]) >= 1) {
      ++stats.excited_bins;
      hits += flagged;
    } else {
      ++stats.ground_bins;
      alarms += flagged;
    }
  }
  if (stats.excited_bins > 0) {
    stats.detection_probability = static_cast<double>(hits) / static_cast<double>(stats.excited_bins);
  }
  if (stats.ground_bins > 0) {
    stats.false_alarm_rate = static_cast<double>(alarms) / static_cast<double>(stats.ground_bins);
  }
  return stats;
}

std::vector<LevelPeak> level_peaks(const ReadoutTrace& trace, unsigned max_level) {
  std::vector<LevelPeak> peaks(max_level + 1);
  std::vector<double> sum(max_level + 1, 0.0);
  std::vector<double> sum_sq(max_level + 1, 0.0);
  for (unsigned k = 0; k <= max_level; ++k) peaks[k].level = k;
  for (std::size_t i = 0; i < trace.freq_estimates.size(); ++i) {
    const double n = trace.true_n_per_bin[i];
    if (n != std::floor(n) || n > max_level) continue;
    const auto k = static_cast<std::size_t>(n);
    ++peaks[k].count;
    sum[k] += trace.freq_estimates[i];
    sum_sq[k] += trace.freq_estimates[i] * trace.freq_estimates[i];
  }
  for (unsigned k = 0; k <= max_level; ++k) {
    if (peaks[k].count == 0) continue;
    const auto c = static_cast<double>(peaks[k].count);
    peaks[k].mean = sum[k] / c;
    peaks[k].stddev = std::sqrt(std::max(0.0, sum_sq[k] / c - peaks[k].mean * peaks[k].mean));
  }
  return peaks;
}

Histogram histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins) {
  if (!(hi > lo) || bins == 0) throw DomainError("histogram needs lo < hi and at least one bin");
  Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
  const double width = h.bin_width();
  for (double v : values) {
    if (v < lo || v >= hi) continue;
    const auto k = std::min(bins - 1, static_cast<std::size_t>((v - lo) / width));
    ++h.counts[k];
  }
  return h;
}

}  // namespace optomech::jumpsim
