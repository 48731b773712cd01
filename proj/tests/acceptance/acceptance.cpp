#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "../common/dwell.hpp"
#include "../common/stats.hpp"
#include "../common/synthetic.hpp"
#include "optomech/cavity.hpp"
#include "optomech/constants.hpp"
#include "optomech/cooling.hpp"
#include "optomech/errors.hpp"
#include "optomech/jumpsim.hpp"
#include "optomech/mechanics.hpp"
#include "optomech/params.hpp"
#include "optomech/qnd.hpp"
#include "optomech/random.hpp"

using namespace optomech;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome table_row_1() {
  const auto b = qnd::jump_budget(table1_row1());
  const bool ok = rel(b.snr, 1.0) <= 0.05 && rel(b.tau_total, 0.3e-3) <= 0.05;
  return {ok, fmt("SNR=%.4f (target 1.0 +-5%%), tau0=%.4g s (target 3e-4 +-5%%)", b.snr, b.tau_total)};
}

Outcome table_row_2() {
  const auto b = qnd::jump_budget(table1_row2());
  return {rel(b.snr, 4.0) <= 0.05, fmt("SNR=%.4f (target 4.0 +-5%%)", b.snr)};
}

Outcome mechanics_numbers() {
  const double w = 2 * kPi * 134e3;
  const double q = mechanics::q_from_ringdown(2.67, w);
  const double k = mechanics::spring_constant(4e-11, w);
  // 1.1e6 is the two-figure rounding of the stated expected value 1.124e6, which
  // itself sits 2.2% from 1.1e6; the 2% band is taken around 1.124e6.
  const bool q_ok = rel(q, 1.124e6) <= 0.02 && std::round(q / 1e5) == 11.0;
  return {q_ok && rel(k, 28.0) <= 0.03,
          fmt("Q=%.4g (expected 1.124e6 +-2%%, rounds to 1.1e6; %.2f%% from 1.1e6), k=%.4g N/m (28 +-3%%)", q,
              100 * rel(q, 1.1e6), k)};
}

Outcome cooling_factor() {
  const double q_eff = 6.82e-3 * 1.1e6 / 294.0;
  const double t = cooling::teff_from_q(294.0, q_eff, 1.1e6);
  const double factor = 294.0 / t;
  const bool ok = rel(t, 6.82e-3) < 1e-12 && rel(factor, 4.4e4) <= 0.05;
  return {ok, fmt("Q_eff=%.4g gives T_eff=%.4g K, cooling factor %.4g (4.4e4 +-5%%)", q_eff, t, factor)};
}

Outcome finesse_ringdown() {
  using cavity::RingdownDirection;
  double worst = 0.0;
  for (double F = 1.0; F < 1e8; F *= 1.37) {
    const double tau = cavity::finesse_ringdown(F, 0.067, RingdownDirection::FinesseToTau);
    worst = std::max(worst, rel(cavity::finesse_ringdown(tau, 0.067, RingdownDirection::TauToFinesse), F));
  }
  const double tau = cavity::finesse_ringdown(16100, 0.067, RingdownDirection::FinesseToTau);
  const bool ok = worst <= 1e-12 && rel(tau, 1.145e-6) <= 1e-3;
  return {ok, fmt("worst round-trip error %.2g, F=16100 -> tau=%.5g s", worst, tau)};
}

Outcome identity_suite() {
  double worst_route = 0.0;
  const auto base = table1_row1();
  std::vector<ExperimentParams> cases{base, table1_row2()};
  for (double ratio : {0.3, 0.03}) {
    auto p = base;
    p.F = kPi * kSpeedOfLight / (p.L * ratio * p.omega_m);
    cases.push_back(p);
  }
  for (const auto& p : cases) {
    const auto n = qnd::pdh_noise_psd(p);
    worst_route = std::max({worst_route, rel(n.s_omega, n.kappa / (16 * n.n_bar_photons)),
                            rel(qnd::detuning_per_phonon(p), qnd::detuning_per_phonon_closed_form(p)),
                            rel(qnd::rwa_lifetime(p), 1.0 / qnd::rwa_rate(p)),
                            rel(*qnd::linear_lifetime(p), 1.0 / qnd::linear_rate(p))});
  }

  // Residuals at kappa/omega_m <= 0.075 and their scaling across a 4-point sweep.
  const std::vector<double> ratios{0.075, 0.0375, 0.01875, 0.009375};
  std::vector<double> r_total, r_linear;
  for (double ratio : ratios) {
    auto p = base;
    p.F = kPi * kSpeedOfLight / (p.L * ratio * p.omega_m);
    const auto c = qnd::consistency_ratios(p);
    r_total.push_back(c.total_to_linear.relative_residual);
    r_linear.push_back(c.linear_to_rwa->relative_residual);
  }
  const auto row1 = qnd::consistency_ratios(base);
  bool small = row1.total_to_linear.relative_residual < 0.01 && row1.linear_to_rwa->relative_residual < 0.01;
  bool quadratic = true;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    small = small && r_total[i] < 0.01 && r_linear[i] < 0.01;
    if (i == 0) continue;
    const double expected = std::pow(ratios[i] / ratios[i - 1], 2);
    quadratic = quadratic && std::abs(r_total[i] / r_total[i - 1] / expected - 1) < 0.05 &&
                std::abs(r_linear[i] / r_linear[i - 1] / expected - 1) < 0.05;
  }
  const bool ok = worst_route <= 1e-9 && small && quadratic;
  return {ok, fmt("worst dual-form/route error %.2g; residuals at kappa/omega_m=0.075: %.3g, %.3g; "
                  "O(kappa^2) shrink %s",
                  worst_route, r_total[0], r_linear[0], quadratic ? "yes" : "no")};
}

Outcome oracle_equivalence() {
  const double L = 0.067, lam = 1.064e-6, rc = 0.31, F = 16100;
  const cavity::TransmissionModel model(rc, F, L, lam);
  const double fsr = cavity::free_spectral_range(L);

  double worst_ridge = 0.0, worst_map = 0.0;
  std::vector<double> xs(101), det(101);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = lam / 2 * static_cast<double>(i) / 100.0;
  for (std::size_t i = 0; i < det.size(); ++i) det[i] = fsr * static_cast<double>(i) / 100.0;
  const auto map = cavity::transmission_map(model, det, xs, 0);
  for (std::size_t ix = 0; ix < xs.size(); ++ix) {
    const double expected = cavity::dispersive_detuning(xs[ix], rc, L, lam);
    double nearest = 0.0;
    for (double p : model.resonances(xs[ix], 0.0, fsr)) {
      if (nearest == 0.0 || std::abs(p - expected) < std::abs(nearest - expected)) nearest = p;
    }
    worst_ridge = std::max(worst_ridge, rel(nearest, expected));
    // The brightest map cell in each column sits within one detuning step of the band.
    std::size_t arg = 0;
    for (std::size_t id = 1; id < det.size(); ++id) {
      if (map.at(id, ix) > map.at(arg, ix)) arg = id;
    }
    worst_map = std::max(worst_map, std::abs(det[arg] - expected) / (det[1] - det[0]));
  }

  // Periodicity: shifting x by lambda/2 costs only the rounding of x + lambda/2.
  constexpr double eps = std::numeric_limits<double>::epsilon();
  bool periodic = true;
  double worst_shift = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double x = xs[i];
    const double w = cavity::dispersive_detuning(x, rc, L, lam);
    const double phase = 4 * kPi * x / lam;
    const double slope = (kSpeedOfLight / L) * rc * std::abs(std::sin(phase)) * 4 * kPi / lam /
                         std::sqrt(1 - std::pow(rc * std::cos(phase), 2));
    const double diff = std::abs(cavity::dispersive_detuning(x + lam / 2, rc, L, lam) - w);
    periodic = periodic && diff <= 4 * eps * (slope * (x + lam) + w);
    worst_shift = std::max(worst_shift, diff / w);
  }
  const bool ok = worst_ridge <= 1e-6 && worst_map <= 1.0 && periodic;
  return {ok, fmt("101x101 grid: worst ridge error %.2g, map argmax within %.2f detuning steps; "
                  "lambda/2 shift changes omega by at most %.2g (relative)",
                  worst_ridge, worst_map, worst_shift)};
}

Outcome round_trip_fitting() {
  const double m = 4e-11, w0 = 2 * kPi * 134e3, q = 25.5, g = w0 / q, T = 6.82e-3;
  const double floor = 1e-3 * cooling::psd_model(w0, m, T, w0, g);
  const cooling::PsdFitContext ctx{m, w0, 294.0, 1.1e6};
  std::mt19937_64 gen(20240601);
  int good = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto s = synthetic::noisy_psd(m, T, w0, g, floor, 400, 10, 0.05, &gen);
    try {
      const auto fit = *cooling::fit_psd(s.freq_hz, s.psd, ctx).fit;
      if (rel(fit.omega_eff, w0) <= 0.05 && rel(fit.gamma_eff, g) <= 0.05 && rel(fit.t_eff_model, T) <= 0.05) ++good;
    } catch (const Error&) {
    }
  }
  double worst_area = 0.0;
  for (double t : {6.82e-3, 294.0}) {
    const auto s = synthetic::dense_psd(m, t, w0, g, 20001, 1e4);
    worst_area = std::max(worst_area, rel(cooling::teff_from_area({s.freq_hz, s.psd, 0.0, std::nullopt}, m, w0), t));
  }
  const bool ok = good >= 190 && worst_area <= 0.01;
  return {ok, fmt("%d/200 noisy trials within 5%% on omega, gamma, T_eff; noiseless area T_eff error %.2g", good,
                  worst_area)};
}

Outcome monte_carlo() {
  // Ground-state dwell with measurement channels on at row 1.
  const auto p1 = table1_row1();
  const double tau0 = qnd::jump_budget(p1).tau_total;
  std::vector<double> dwell;
  for (std::uint64_t k = 0; dwell.size() < 20000; ++k) {
    const auto traj = jumpsim::simulate_trajectory(p1, 40 * tau0, derive_seed(1, k), true);
    for (double d : dwell::stays_entered_before(traj, 0, 20 * tau0)) dwell.push_back(d);
  }
  const double dwell_err = rel(stats::mean(dwell), tau0);
  const bool ks = stats::ks_exponential(dwell, 1.0 / tau0) < stats::ks_critical_1pct(dwell.size());

  // Stationary law with channels off: sampled every 10 relaxation times.
  auto pb = table1_row1();
  const double n_bar = 1.5;
  pb.T = n_bar * kHbar * pb.omega_m / kBoltzmann;
  pb.Q = 10.0;
  const double relax = pb.Q / pb.omega_m;
  const std::size_t samples = 50000;
  const auto traj = jumpsim::simulate_trajectory(pb, 50 * relax + 10 * relax * samples, 2, false);
  std::vector<double> observed(11, 0.0), expected(11, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    observed[std::min(traj.level_at(50 * relax + 10 * relax * static_cast<double>(i)), 10u)] += 1.0;
  }
  double below = 0.0;
  for (unsigned n = 0; n < 10; ++n) {
    const double prob = std::pow(n_bar, n) / std::pow(n_bar + 1, n + 1);
    expected[n] = prob * static_cast<double>(samples);
    below += prob;
  }
  expected[10] = (1.0 - below) * static_cast<double>(samples);
  const auto chi = stats::chi_square(observed, expected);
  const bool be = !traj.truncated && chi.statistic < stats::chi2_critical_1pct(chi.dof);

  // Row-2 readout at bin width tau0/4: peaks of bins held at n = 0 and at n = 1.
  const auto p2 = table1_row2();
  const auto b2 = qnd::jump_budget(p2);
  double sum[2] = {0, 0}, count[2] = {0, 0};
  for (std::uint64_t k = 0; k < 8000; ++k) {
    const auto t = jumpsim::simulate_trajectory(p2, 3 * b2.tau_total, derive_seed(3, 2 * k), true);
    const auto r = jumpsim::binned_readout(t, p2, b2.tau_total / 4, derive_seed(3, 2 * k + 1));
    for (const auto& pk : jumpsim::level_peaks(r, 1)) {
      sum[pk.level] += pk.mean * static_cast<double>(pk.count);
      count[pk.level] += static_cast<double>(pk.count);
    }
  }
  const double sep = sum[1] / count[1] - sum[0] / count[0];
  const double sep_err = rel(sep, b2.delta_omega);

  const bool ok = dwell.size() >= 10000 && dwell_err <= 0.05 && ks && be && sep_err <= 0.05;
  return {ok, fmt("n=0 dwell over %zu visits off by %.2f%% (KS %s); Bose-Einstein chi2=%.2f on %zu dof "
                  "(1%% critical %.2f); row-2 peak separation %.4f vs delta_omega %.4f (%.2f%%)",
                  dwell.size(), 100 * dwell_err, ks ? "ok" : "rejects", chi.statistic, chi.dof,
                  stats::chi2_critical_1pct(chi.dof), sep, b2.delta_omega, 100 * sep_err)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> checks{table_row_1,      table_row_2,    mechanics_numbers,
                                                      cooling_factor,   finesse_ringdown, identity_suite,
                                                      oracle_equivalence, round_trip_fitting, monte_carlo};
  bool all = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Outcome o;
    try {
      o = checks[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s criterion %zu: %s\n", o.pass ? "PASS" : "FAIL", i + 1, o.detail.c_str());
  }
  std::printf("%s criterion 10: excluded items (measured cooling curves, external ground-state predictions, "
              "absolute beta_M) are covered by criteria 1-9, which %s\n",
              all ? "PASS" : "FAIL", all ? "all pass" : "do not all pass");
  return all ? 0 : 1;
}
