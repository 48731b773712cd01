#include <doctest.h>

#include <cstdlib>
#include <set>

#include "../common/dwell.hpp"
#include "../common/stats.hpp"
#include "optomech/constants.hpp"
#include "optomech/errors.hpp"
#include "optomech/jumpsim.hpp"
#include "optomech/params.hpp"
#include "optomech/qnd.hpp"
#include "optomech/random.hpp"
#include "test_support.hpp"

using namespace optomech;
using namespace optomech::jumpsim;
using testing::rel;

namespace {

// Temperature giving the requested high-temperature occupation.
ExperimentParams bath_with_occupation(double n_bar, double Q) {
  auto p = table1_row1();
  p.T = n_bar * kHbar * p.omega_m / kBoltzmann;
  p.Q = Q;
  return p;
}

JumpTrajectory empty_trajectory(double duration) {
  JumpTrajectory t;
  t.duration = duration;
  return t;
}

// Alternates n = 0 and n = 1 every `dwell` seconds.
JumpTrajectory square_wave(double dwell, std::size_t periods) {
  JumpTrajectory t;
  for (std::size_t i = 1; i < 2 * periods; ++i) {
    t.events.push_back({dwell * static_cast<double>(i), static_cast<unsigned>(i % 2), Channel::ThermalUp});
  }
  t.duration = dwell * static_cast<double>(2 * periods);
  return t;
}

double gaussian_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

TEST_SUITE("jumpsim") {
  TEST_CASE("generator statistics and seed derivation") {
    DeterministicRng rng(42);
    std::vector<double> u, e, g;
    for (int i = 0; i < 200000; ++i) {
      u.push_back(rng.uniform());
      e.push_back(rng.exponential(4.0));
      g.push_back(rng.normal());
    }
    CHECK(*std::min_element(u.begin(), u.end()) >= 0.0);
    CHECK(*std::max_element(u.begin(), u.end()) < 1.0);
    CHECK(std::abs(stats::mean(u) - 0.5) < 0.003);
    CHECK(std::abs(stats::mean(e) - 0.25) < 0.003);
    CHECK(std::abs(stats::mean(g)) < 0.01);
    CHECK(std::abs(stats::variance(g) - 1.0) < 0.01);
    CHECK(stats::ks_exponential(e, 4.0) < stats::ks_critical_1pct(e.size()));

    DeterministicRng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(derive_seed(5, i));
    CHECK(seeds.size() == 1000);
    CHECK(derive_seed(5, 1) == derive_seed(5, 1));
    CHECK(derive_seed(5, 1) != derive_seed(6, 1));
  }

  TEST_CASE("rates") {
    const auto p = table1_row1();
    const auto off = jump_rates(p, false);
    const auto on = jump_rates(p, true);
    CHECK(rel(off.thermal_unit, p.omega_m / p.Q) < 1e-15);
    CHECK(off.non_rwa_pair == 0.0);
    CHECK(off.offset == 0.0);
    CHECK(rel(on.total_out(0), 1.0 / qnd::jump_budget(p).tau_total) < 1e-12);
    for (unsigned n : {0u, 1u, 5u}) {
      CHECK(rel(off.up(n) + off.down(n), off.thermal_unit * (n * (off.n_bar + 1) + off.n_bar * (n + 1))) < 1e-14);
      CHECK(rel(off.total_out(n), 1.0 / qnd::thermal_lifetime(n, p)) < 1e-12);
    }
    auto cold = p;
    cold.T = 0.0;
    CHECK(jump_rates(cold, false).n_bar == 0.0);
    auto bad = p;
    bad.Q = -1.0;
    CHECK_THROWS_AS(jump_rates(bad, false), ValidationError);
  }

  TEST_CASE("empty bath gives no events") {
    auto p = table1_row1();
    p.T = 0.0;
    const auto traj = simulate_trajectory(p, 100.0, 1, false);
    CHECK(traj.events.empty());
    CHECK(traj.duration == 100.0);
    CHECK_FALSE(traj.truncated);
    CHECK(traj.level_at(50.0) == 0u);
    CHECK_THROWS_AS(simulate_trajectory(p, 0.0, 1, false), DomainError);
  }

  TEST_CASE("trajectories are reproducible and well formed") {
    const auto p = table1_row1();
    const double tau0 = qnd::jump_budget(p).tau_total;
    const auto a = simulate_trajectory(p, 5 * tau0, 99, true);
    const auto b = simulate_trajectory(p, 5 * tau0, 99, true);
    const auto c = simulate_trajectory(p, 5 * tau0, 100, true);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t i = 0; i < a.events.size(); ++i) {
      CHECK(a.events[i].time == b.events[i].time);
      CHECK(a.events[i].n_after == b.events[i].n_after);
    }
    CHECK((a.events.size() != c.events.size() || a.events.front().time != c.events.front().time));

    unsigned n = 0;
    double last = 0.0;
    for (const auto& e : a.events) {
      CHECK(e.time > last);
      CHECK(e.time < a.duration);
      const int step = static_cast<int>(e.n_after) - static_cast<int>(n);
      switch (e.channel) {
        case Channel::ThermalUp: CHECK(step == 1); break;
        case Channel::ThermalDown: CHECK(step == -1); break;
        case Channel::NonRwaPair: CHECK((n == 0 && e.n_after == 2)); break;
        case Channel::Offset: CHECK((n == 0 && e.n_after == 1)); break;
      }
      n = e.n_after;
      last = e.time;
    }
    CHECK(a.level_at(a.duration) == n);
  }

  TEST_CASE("event limit truncates the trajectory") {
    const auto p = table1_row1();
    const auto t = simulate_trajectory(p, 10.0, 3, true, 1000);
    CHECK(t.truncated);
    CHECK(t.events.size() == 1000);
    CHECK(t.duration > t.events.back().time);
    CHECK(t.duration < 10.0);
    const auto full = simulate_trajectory(p, t.duration, 3, true, 1001);
    CHECK_FALSE(full.truncated);
    CHECK(full.events.size() == 1000);
  }

  TEST_CASE("ground-state dwell times are exponential at the analytic rate") {
    const auto p = table1_row1();
    const double tau0 = qnd::jump_budget(p).tau_total;
    std::vector<double> dwell;
    for (std::uint64_t k = 0; dwell.size() < 10000; ++k) {
      const auto traj = simulate_trajectory(p, 40 * tau0, derive_seed(17, k), true);
      for (double d : dwell::stays_entered_before(traj, 0, 20 * tau0)) dwell.push_back(d);
    }
    const double mean = stats::mean(dwell);
    const double n = static_cast<double>(dwell.size());
    CHECK(std::abs(mean / tau0 - 1) < 0.05);
    // Rate estimate N / sum within three standard errors of 1/tau0.
    CHECK(std::abs(1.0 / mean - 1.0 / tau0) < 3.0 / (mean * std::sqrt(n)));
    CHECK(stats::ks_exponential(dwell, 1.0 / tau0) < stats::ks_critical_1pct(dwell.size()));
  }

  TEST_CASE("excited-state dwell times with channels off") {
    const auto p = bath_with_occupation(2.0, 20.0);
    const auto rates = jump_rates(p, false);
    const auto traj = simulate_trajectory(p, 4e5 * p.Q / p.omega_m, 8, false);
    for (unsigned level : {1u, 3u}) {
      const auto dwell = dwell_times(traj, level);
      REQUIRE(dwell.size() > 10000);
      CHECK(stats::ks_exponential(dwell, rates.total_out(level)) < stats::ks_critical_1pct(dwell.size()));
    }
  }

  TEST_CASE("stationary occupation is Bose-Einstein") {
    const double n_bar = 1.5;
    const auto p = bath_with_occupation(n_bar, 10.0);
    const double relax = p.Q / p.omega_m;
    const std::size_t samples = 20000;
    const double spacing = 10 * relax;
    const auto traj = simulate_trajectory(p, 50 * relax + spacing * samples, 2024, false);
    REQUIRE_FALSE(traj.truncated);

    std::vector<double> observed(11, 0.0), expected(11, 0.0);
    for (std::size_t i = 0; i < samples; ++i) {
      const unsigned n = traj.level_at(50 * relax + spacing * static_cast<double>(i));
      observed[std::min(n, 10u)] += 1.0;
    }
    double below = 0.0;
    for (unsigned n = 0; n < 10; ++n) {
      const double prob = std::pow(n_bar, n) / std::pow(n_bar + 1, n + 1);
      expected[n] = prob * samples;
      below += prob;
    }
    expected[10] = (1.0 - below) * samples;
    const auto chi = stats::chi_square(observed, expected);
    CHECK(chi.dof >= 8);
    CHECK(chi.statistic < stats::chi2_critical_1pct(chi.dof));

    // Time-weighted fractions agree with the same law.
    const auto frac = occupation_fractions(traj, 3);
    REQUIRE(frac.size() == 5);
    for (unsigned n = 0; n <= 3; ++n) {
      CHECK(std::abs(frac[n] - std::pow(n_bar, n) / std::pow(n_bar + 1, n + 1)) < 0.01);
    }
    CHECK(std::abs(frac[4] - std::pow(n_bar / (n_bar + 1), 4)) < 0.01);
  }

  TEST_CASE("dwell times and occupation on a known trace") {
    JumpTrajectory t;
    t.events = {{1.0, 1, Channel::ThermalUp}, {1.5, 2, Channel::ThermalUp}, {3.0, 1, Channel::ThermalDown},
                {3.25, 0, Channel::ThermalDown}};
    t.duration = 4.0;
    CHECK(dwell_times(t, 0) == std::vector<double>{1.0});
    CHECK(dwell_times(t, 1) == std::vector<double>{0.5, 0.25});
    CHECK(dwell_times(t, 2) == std::vector<double>{1.5});
    CHECK(occupation_fractions(t, 1) == std::vector<double>{0.4375, 0.1875, 0.375});
    CHECK(t.level_at(0.5) == 0u);
    CHECK(t.level_at(1.0) == 1u);
    CHECK(t.level_at(3.1) == 1u);
  }

  TEST_CASE("noiseless readout") {
    const auto traj = square_wave(1e-3, 10);
    const auto r = binned_readout(traj, 0.2, 0.0, 1e-4, 1);
    REQUIRE(r.freq_estimates.size() == 200);
    CHECK(r.noise_sigma == 0.0);
    for (std::size_t i = 0; i < r.freq_estimates.size(); ++i) {
      CHECK(std::abs(r.freq_estimates[i] - 0.2 * (r.true_n_per_bin[i] + 0.5)) < 1e-15);
    }
    // Bins straddling a jump carry the time-weighted mean.
    const auto half = binned_readout(traj, 0.2, 0.0, 1.5e-3, 1);
    CHECK(std::abs(half.true_n_per_bin[0] - 1.0 / 3.0) < 1e-12);
    const auto stats = jump_detection_stats(r, 0.2);
    CHECK(*stats.detection_probability == 1.0);
    CHECK(*stats.false_alarm_rate == 0.0);
    CHECK(stats.excited_bins == 100);
    CHECK(stats.ground_bins == 100);
  }

  TEST_CASE("readout noise variance") {
    const double s = 2.5e-6, bw = 7e-5;
    const auto r = binned_readout(empty_trajectory(bw * 10000.5), 0.09, s, bw, 77);
    REQUIRE(r.freq_estimates.size() == 10000);
    CHECK(rel(r.noise_sigma * r.noise_sigma, s / bw) < 1e-14);
    CHECK(std::abs(stats::variance(r.freq_estimates) / (s / bw) - 1) < 0.05);
    CHECK(std::abs(stats::mean(r.freq_estimates) - 0.045) < 4 * r.noise_sigma / 100);
    const auto again = binned_readout(empty_trajectory(bw * 10000.5), 0.09, s, bw, 77);
    CHECK(again.freq_estimates == r.freq_estimates);
    CHECK_THROWS_AS(binned_readout(empty_trajectory(1.0), 0.09, s, 0.0, 1), DomainError);
  }

  TEST_CASE("parameter overload flags short bins") {
    const auto p = table1_row1();
    const auto traj = empty_trajectory(1e-2);
    CHECK(binned_readout(traj, p, 1e-4, 1).bandwidth_ok);
    CHECK_FALSE(binned_readout(traj, p, 1e-6, 1).bandwidth_ok);
    const auto r = binned_readout(traj, p, 1e-4, 1);
    CHECK(rel(r.delta_omega, qnd::detuning_per_phonon(p)) < 1e-15);
    CHECK(rel(r.noise_sigma, std::sqrt(qnd::pdh_noise_psd(p).s_omega / 1e-4)) < 1e-15);
  }

  TEST_CASE("false-alarm rate matches the Gaussian tail") {
    const double dw = 1.0, sigma = 0.4;
    const double bw = 1e-3;
    const auto r = binned_readout(empty_trajectory(bw * 100000), dw, sigma * sigma * bw, bw, 5);
    for (double z : {0.5, 1.0, 2.0}) {
      const auto st = jump_detection_stats(r, 0.5 * dw + z * sigma);
      CHECK(std::abs(*st.false_alarm_rate / gaussian_tail(z) - 1) < 0.1);
      CHECK_FALSE(st.detection_probability.has_value());
    }
  }

  TEST_CASE("detection improves from row 1 to row 2 at equal false-alarm rate") {
    double detection[2], alarm[2];
    int i = 0;
    for (const auto& p : {table1_row1(), table1_row2()}) {
      const auto b = qnd::jump_budget(p);
      const auto traj = square_wave(50 * b.tau_total, 200);
      const auto r = binned_readout(traj, p, b.tau_total, 31);
      const auto st = jump_detection_stats(r, 0.5 * b.delta_omega + 0.5 * r.noise_sigma);
      detection[i] = *st.detection_probability;
      alarm[i] = *st.false_alarm_rate;
      // Bin width tau0 makes delta_omega / sigma = sqrt(SNR).
      CHECK(std::abs(detection[i] - gaussian_tail(0.5 - std::sqrt(b.snr))) < 0.02);
      ++i;
    }
    CHECK(std::abs(alarm[0] - alarm[1]) < 0.02);
    CHECK(detection[1] > detection[0] + 0.1);
  }

  TEST_CASE("threshold outside the signal levels is rejected") {
    const auto r = binned_readout(square_wave(1e-3, 2), 0.2, 0.0, 1e-4, 1);
    CHECK_THROWS_AS(jump_detection_stats(r, 0.1), DomainError);
    CHECK_THROWS_AS(jump_detection_stats(r, 0.31), DomainError);
    CHECK_THROWS_AS(jump_detection_stats(r, -1.0), DomainError);
  }

  TEST_CASE("level peaks resolve the row-2 phonon ladder") {
    const auto p = table1_row2();
    const auto b = qnd::jump_budget(p);
    std::vector<double> all;
    std::vector<double> sum(2, 0.0), count(2, 0.0);
    for (std::uint64_t k = 0; k < 4000; ++k) {
      const auto traj = simulate_trajectory(p, 3 * b.tau_total, derive_seed(9, 2 * k), true);
      const auto r = binned_readout(traj, p, b.tau_total / 4, derive_seed(9, 2 * k + 1));
      for (const auto& pk : level_peaks(r, 1)) {
        sum[pk.level] += pk.mean * static_cast<double>(pk.count);
        count[pk.level] += static_cast<double>(pk.count);
      }
    }
    REQUIRE(count[1] > 1000);
    const double sep = sum[1] / count[1] - sum[0] / count[0];
    CHECK(std::abs(sep / b.delta_omega - 1) < 0.05);
  }

  TEST_CASE("level peaks on a synthetic trace") {
    // Dyadic times keep every bin edge exact.
    const double bw = 0x1.0p-10;
    const auto traj = square_wave(16 * bw, 500);
    const auto r = binned_readout(traj, 1.0, 0.25 * bw, bw, 4);
    const auto peaks = level_peaks(r, 2);
    REQUIRE(peaks.size() == 3);
    CHECK(peaks[0].count == 8000);
    CHECK(peaks[1].count == 8000);
    CHECK(peaks[2].count == 0);
    CHECK(std::abs(peaks[0].mean - 0.5) < 0.03);
    CHECK(std::abs(peaks[1].mean - 1.5) < 0.03);
    CHECK(std::abs(peaks[1].stddev - 0.5) < 0.02);
  }

  TEST_CASE("histogram") {
    const auto h = histogram({0.0, 0.1, 0.5, 0.99, 1.0, -0.2}, 0.0, 1.0, 4);
    CHECK(h.counts == std::vector<std::size_t>{2, 0, 1, 1});
    CHECK(h.bin_width() == 0.25);
    CHECK_THROWS_AS(histogram({}, 1.0, 1.0, 3), DomainError);
    CHECK_THROWS_AS(histogram({}, 0.0, 1.0, 0), DomainError);
  }
}
