#include "optomech/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "optomech/cavity.hpp"
#include "optomech/constants.hpp"
#include "optomech/cooling.hpp"
#include "optomech/errors.hpp"
#include "optomech/io.hpp"
#include "optomech/jumpsim.hpp"
#include "optomech/mechanics.hpp"
#include "optomech/params.hpp"
#include "optomech/qnd.hpp"
#include "optomech/random.hpp"
#include "optomech/sweep.hpp"

namespace optomech::cli {

namespace {

using io::Json;
using io::Metadata;

double parse_double(std::string_view text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ConfigError(what, "cannot parse number '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(s.substr(0, pos));
    if (pos == std::string_view::npos) return out;
    s = s.substr(pos + 1);
  }
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

// --config / --preset / --set, shared by every command that takes ExperimentParams.
struct ParamSource {
  std::string config;
  std::string preset;
  std::vector<std::string> overrides;

  void attach(CLI::App* sub) {
    sub->add_option("--config", config, "Parameter file (key = value lines, SI units)");
    sub->add_option("--preset", preset, "Built-in parameter set")
        ->check(CLI::IsMember({"table1-row1", "table1-row2"}));
    sub->add_option("--set", overrides, "Override one parameter, e.g. --set P_in=2e-6 (repeatable)");
  }

  bool given() const { return !config.empty() || !preset.empty(); }

  ExperimentParams resolve() const {
    if (!config.empty() && !preset.empty()) throw ValidationError("--config and --preset are mutually exclusive");
    if (!given()) throw ValidationError("one of --config or --preset is required");
    ExperimentParams p = !config.empty()                 ? load_config(config)
                         : preset == "table1-row1" ? table1_row1()
                                                         : table1_row2();
    for (const auto& o : overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw ConfigError(o, "override must be key=value");
      const std::string key = o.substr(0, eq);
      set_param(p, key, parse_double(std::string_view(o).substr(eq + 1), key));
    }
    require_valid(p);
    return p;
  }
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    io::write_file(path, content);
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json with_metadata(const Metadata& meta, Json body) {
  Json j = Json::object();
  j["metadata"] = io::to_json(meta);
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

void add_number(Metadata& meta, const std::string& key, double v) { meta.emplace_back(key, io::format_number(v)); }

// ---------------------------------------------------------------------------

struct BandCmd {
  ParamSource params;
  std::optional<double> r_c, length, lambda, x_min, x_max;
  std::size_t samples = 201;
  std::size_t bands = 3;
  std::string output;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("--rc", r_c, "Membrane field reflectivity (overrides the parameter set)");
    sub->add_option("--length", length, "Cavity length L in m (default 0.067)");
    sub->add_option("--lambda", lambda, "Wavelength in m (default 1.064e-6)");
    sub->add_option("--x-min", x_min, "First membrane position in m (default 0)");
    sub->add_option("--x-max", x_max, "Last membrane position in m (default lambda)");
    sub->add_option("--samples", samples, "Number of x samples")->capture_default_str();
    sub->add_option("--bands", bands, "Number of bands")->capture_default_str();
    sub->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  void execute(std::ostream& out) const {
    double rc = 0.0, L = 0.067, lam = 1.064e-6;
    if (params.given()) {
      const auto p = params.resolve();
      rc = p.r_c;
      L = p.L;
      lam = p.lambda;
    } else if (!r_c) {
      throw ValidationError("--rc is required without --config or --preset");
    }
    if (r_c) rc = *r_c;
    if (length) L = *length;
    if (lambda) lam = *lambda;
    const double lo = x_min.value_or(0.0);
    const double hi = x_max.value_or(lam);

    const auto bs = cavity::band_structure(rc, L, lam, lo, hi, samples, bands);
    Metadata meta = io::base_metadata("bandstructure");
    add_number(meta, "param.r_c", rc);
    add_number(meta, "param.L", L);
    add_number(meta, "param.lambda", lam);
    add_number(meta, "x_min_m", lo);
    add_number(meta, "x_max_m", hi);
    std::ostringstream ss;
    io::write_band_structure_csv(ss, bs, meta);
    emit(output, ss.str(), out);
  }
};

struct TransmissionCmd {
  ParamSource params;
  std::optional<double> r_c, finesse, length, lambda, n_index, thickness;
  std::optional<double> det_min, det_max, x_min, x_max;
  std::size_t det_count = 101;
  std::size_t x_count = 101;
  unsigned workers = default_workers();
  std::string output;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("--rc", r_c, "Membrane field reflectivity (zero-thickness sheet model)");
    auto* idx = sub->add_option("--index", n_index, "Membrane refractive index (slab model)");
    auto* thk = sub->add_option("--thickness", thickness, "Membrane thickness in m (slab model)");
    idx->needs(thk);
    thk->needs(idx);
    sub->add_option("--finesse", finesse, "Cavity finesse");
    sub->add_option("--length", length, "Cavity length L in m (default 0.067)");
    sub->add_option("--lambda", lambda, "Wavelength in m (default 1.064e-6)");
    sub->add_option("--detuning-min", det_min, "First detuning in rad/s (default 0)");
    sub->add_option("--detuning-max", det_max, "Last detuning in rad/s (default one free spectral range)");
    sub->add_option("--detuning-count", det_count, "Detuning samples")->capture_default_str();
    sub->add_option("--x-min", x_min, "First membrane position in m (default 0)");
    sub->add_option("--x-max", x_max, "Last membrane position in m (default lambda/2)");
    sub->add_option("--x-count", x_count, "Position samples")->capture_default_str();
    sub->add_option("--workers", workers, "Worker threads");
    sub->add_option("-o,--output", output, "Output CSV (default stdout)");
  }

  static std::vector<double> grid(double lo, double hi, std::size_t n) {
    if (n == 0) throw ValidationError("grid needs at least one sample");
    std::vector<double> g(n, lo);
    for (std::size_t i = 1; i < n; ++i) {
      g[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
  }

  void execute(std::ostream& out) const {
    double rc = 0.0, F = 0.0, L = 0.067, lam = 1.064e-6;
    bool have_rc = false, have_f = false;
    if (params.given()) {
      const auto p = params.resolve();
      rc = p.r_c;
      F = p.F;
      L = p.L;
      lam = p.lambda;
      have_rc = have_f = true;
    }
    if (r_c) rc = *r_c, have_rc = true;
    if (finesse) F = *finesse, have_f = true;
    if (length) L = *length;
    if (lambda) lam = *lambda;
    if (!have_f) throw ValidationError("--finesse is required without --config or --preset");
    const bool slab_model = n_index.has_value();
    if (slab_model && r_c) throw ValidationError("--rc and --index/--thickness are mutually exclusive");
    if (!slab_model && !have_rc) throw ValidationError("one of --rc or --index/--thickness is required");

    const MembraneSpec spec{n_index.value_or(1.0), thickness.value_or(0.0)};
    const cavity::TransmissionModel model =
        slab_model ? cavity::TransmissionModel(spec, F, L, lam) : cavity::TransmissionModel(rc, F, L, lam);
    const double fsr = cavity::free_spectral_range(L);
    auto map = cavity::transmission_map(model, grid(det_min.value_or(0.0), det_max.value_or(fsr), det_count),
                                        grid(x_min.value_or(0.0), x_max.value_or(lam / 2.0), x_count), workers);

    Metadata meta = io::base_metadata("transmission-map");
    meta.emplace_back("membrane_model", slab_model ? "slab" : "sheet");
    if (slab_model) {
      add_number(meta, "membrane.n_index", spec.n_index);
      add_number(meta, "membrane.d", spec.d);
    }
    add_number(meta, "param.r_c", slab_model ? std::abs(model.membrane_signed_reflectivity()) : rc);
    add_number(meta, "param.F", F);
    add_number(meta, "param.L", L);
    add_number(meta, "param.lambda", lam);
    add_number(meta, "omega_fsr_rad_s", fsr);
    add_number(meta, "analytic_offset_m", model.analytic_offset());
    std::ostringstream ss;
    io::write_transmission_csv(ss, map, meta);
    emit(output, ss.str(), out);
  }
};

struct RingdownCmd {
  std::string input;
  std::optional<double> switch_off;
  double length = 0.067;
  std::string output;

  void attach(CLI::App* sub) {
    sub->add_option("-i,--input", input, "CSV with columns t_s and power (or amplitude)")->required();
    sub->add_option("--switch-off", switch_off, "Only fit samples at or after this time in s");
    sub->add_option("--length", length, "Cavity length L in m, for the finesse")->capture_default_str();
    sub->add_option("-o,--output", output, "Output JSON (default stdout)");
  }

  void execute(std::ostream& out) const {
    const auto table = io::read_csv(input);
    const auto& t = table.column("t_s");
    const auto& y = table.column(table.has_column("power") ? "power" : "amplitude");
    const auto fit = cavity::fit_ringdown(t, y, switch_off.value_or(-std::numeric_limits<double>::infinity()));

    Metadata meta = io::base_metadata("ringdown-fit");
    meta.emplace_back("input", input);
    add_number(meta, "param.L", length);
    Json body = Json::object();
    body["tau"] = fit.fitted_tau;
    body["amplitude"] = fit.fitted_amplitude;
    body["offset"] = fit.fitted_offset;
    body["residual_rms"] = fit.residual_rms;
    body["samples"] = fit.t.size();
    body["finesse"] = cavity::finesse_ringdown(fit.fitted_tau, length, cavity::RingdownDirection::TauToFinesse);
    emit(output, dump(with_metadata(meta, body)), out);
  }
};

struct MechRingdownCmd {
  ParamSource params;
  std::string input;
  std::optional<double> omega_m, mass;
  bool with_offset = false;
  std::string output;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("-i,--input", input, "CSV with columns t_s and amplitude")->required();
    sub->add_option("--omega-m", omega_m, "Mechanical angular frequency in rad/s");
    sub->add_option("--mass", mass, "Motional mass in kg, for the spring constant");
    sub->add_flag("--with-offset", with_offset, "Fit an additive offset");
    sub->add_option("-o,--output", output, "Output JSON (default stdout)");
  }

  void execute(std::ostream& out) const {
    std::optional<double> w = omega_m, m = mass;
    Metadata meta = io::base_metadata("mech-ringdown-fit");
    meta.emplace_back("input", input);
    if (params.given()) {
      const auto p = params.resolve();
      if (!w) w = p.omega_m;
      if (!m) m = p.m;
    }
    if (!w) throw ValidationError("--omega-m is required without --config or --preset");
    add_number(meta, "param.omega_m", *w);
    if (m) add_number(meta, "param.m", *m);

    const auto table = io::read_csv(input);
    const auto fit = mechanics::fit_mech_ringdown(table.column("t_s"), table.column("amplitude"), with_offset);
    Json body = Json::object();
    body["tau"] = fit.tau;
    body["amplitude"] = fit.amplitude;
    body["offset"] = fit.offset;
    body["residual_rms"] = fit.residual_rms;
    body["q"] = mechanics::q_from_ringdown(fit.tau, *w);
    if (m) body["spring_constant"] = mechanics::spring_constant(*m, *w);
    emit(output, dump(with_metadata(meta, body)), out);
  }
};

struct CoolFitCmd {
  ParamSource params;
  std::string input;
  std::optional<double> mass, omega_m, bath_t, q;
  std::vector<std::string> masks;
  std::string output;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("-i,--input", input, "CSV with columns freq_hz and psd_m2_per_hz")->required();
    sub->add_option("--mass", mass, "Motional mass in kg");
    sub->add_option("--omega-m", omega_m, "Intrinsic angular frequency for the area estimator (default: fitted)");
    sub->add_option("--bath-temperature", bath_t, "Bath temperature in K, for T_eff from Q");
    sub->add_option("--q", q, "Intrinsic quality factor, for T_eff from Q");
    sub->add_option("--mask", masks, "Exclude a band lo:hi in Hz (repeatable)");
    sub->add_option("-o,--output", output, "Output JSON (default stdout)");
  }

  void execute(std::ostream& out) const {
    cooling::PsdFitContext ctx;
    Metadata meta = io::base_metadata("cool-fit");
    meta.emplace_back("input", input);
    if (params.given()) {
      const auto p = params.resolve();
      ctx = {p.m, p.omega_m, p.T, p.Q};
    }
    if (mass) ctx.m = *mass;
    if (omega_m) ctx.omega_m = *omega_m;
    if (bath_t) ctx.T_bath = *bath_t;
    if (q) ctx.Q = *q;
    if (!(ctx.m > 0.0)) throw ValidationError("--mass is required without --config or --preset");
    add_number(meta, "param.m", ctx.m);
    add_number(meta, "param.omega_m", ctx.omega_m);
    add_number(meta, "param.T", ctx.T_bath);
    add_number(meta, "param.Q", ctx.Q);

    std::vector<cooling::FrequencyBand> bands;
    for (const auto& m : masks) {
      const auto parts = split(m, ':');
      if (parts.size() != 2) throw ConfigError("mask", "expected lo:hi, got '" + m + "'");
      bands.push_back({parse_double(parts[0], "mask"), parse_double(parts[1], "mask")});
      meta.emplace_back("mask_hz", m);
    }

    const auto table = io::read_csv(input);
    const auto trace = cooling::fit_psd(table.column("freq_hz"), table.column("psd_m2_per_hz"), ctx, bands);
    emit(output, dump(with_metadata(meta, io::to_json(*trace.fit))), out);
  }
};

struct BudgetCmd {
  ParamSource params;
  std::string output;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("-o,--output", output, "Output JSON (default stdout)");
  }

  void execute(std::ostream& out) const {
    const auto p = params.resolve();
    const auto budget = qnd::jump_budget(p);
    Metadata meta = io::base_metadata("qnd-budget");
    if (!params.config.empty()) meta.emplace_back("config", params.config);
    if (!params.preset.empty()) meta.emplace_back("preset", params.preset);
    io::append_params(meta, p);

    Json body = Json::object();
    body["params"] = io::to_json(p);
    body["budget"] = io::to_json(budget);
    Json derived = Json::object();
    derived["shot_thermal_ratio"] = cooling::shot_thermal_ratio(p);
    derived["gap_exact"] = cavity::mode_gap(p.r_c, p.L).exact;
    derived["kappa_over_omega_m"] = budget.kappa / p.omega_m;
    derived["tau_total_times_omega_m"] = budget.tau_total * p.omega_m;
    body["derived"] = derived;
    body["snr"] = budget.snr;
    emit(output, dump(with_metadata(meta, body)), out);
  }
};

struct JumpSimCmd {
  ParamSource params;
  double duration = 0.0;
  std::uint64_t seed = 0;
  bool thermal_only = false;
  std::size_t max_events = 1'000'000;
  std::string output;
  std::string readout;
  std::optional<double> bin_width;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("--duration", duration, "Simulated time in s")->required();
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_flag("--thermal-only", thermal_only, "Disable the 0->2 and 0->1 measurement channels");
    sub->add_option("--max-events", max_events, "Stop after this many events (trajectory marked truncated)")
        ->capture_default_str();
    sub->add_option("-o,--output", output, "Trajectory CSV (default stdout)");
    sub->add_option("--readout", readout, "Also write a binned frequency readout CSV here");
    sub->add_option("--bin-width", bin_width, "Readout bin width in s (default tau0/4)");
  }

  void execute(std::ostream& out) const {
    const auto p = params.resolve();
    const auto traj = jumpsim::simulate_trajectory(p, duration, seed, !thermal_only, max_events);

    Metadata meta = io::base_metadata("jump-sim");
    io::append_params(meta, p);
    meta.emplace_back("seed", std::to_string(seed));
    meta.emplace_back("rng", DeterministicRng::kAlgorithm);
    add_number(meta, "requested_duration_s", duration);
    add_number(meta, "max_events", static_cast<double>(max_events));

    std::ostringstream ss;
    io::write_trajectory_csv(ss, traj, meta);
    emit(output, ss.str(), out);

    if (!readout.empty()) {
      const double bw = bin_width.value_or(qnd::jump_budget(p).tau_total / 4.0);
      const std::uint64_t readout_seed = derive_seed(seed, 1);
      const auto trace = jumpsim::binned_readout(traj, p, bw, readout_seed);
      Metadata rmeta = meta;
      rmeta.emplace_back("readout_seed", std::to_string(readout_seed));
      rmeta.emplace_back("bandwidth_ok", trace.bandwidth_ok ? "true" : "false");
      std::ostringstream rs;
      io::write_readout_csv(rs, trace, rmeta);
      io::write_file(readout, rs.str());
    }
  }
};

struct JumpStatsCmd {
  ParamSource params;
  std::string input;
  std::optional<double> threshold, delta_omega;
  std::size_t bins = 60;
  unsigned max_level = 3;
  std::string output;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("-i,--input", input, "Readout CSV from jump-sim --readout")->required();
    sub->add_option("--threshold", threshold, "Detection threshold in rad/s (default delta_omega)");
    sub->add_option("--delta-omega", delta_omega, "Detuning per phonon in rad/s (default from the input header)");
    sub->add_option("--bins", bins, "Histogram bins")->capture_default_str();
    sub->add_option("--max-level", max_level, "Highest phonon level for per-level peaks")->capture_default_str();
    sub->add_option("-o,--output", output, "Output JSON (default stdout)");
  }

  void execute(std::ostream& out) const {
    const auto table = io::read_csv(input);
    std::optional<double> dw = delta_omega;
    Metadata meta = io::base_metadata("jump-stats");
    meta.emplace_back("input", input);
    if (!dw && params.given()) {
      const auto p = params.resolve();
      io::append_params(meta, p);
      dw = qnd::detuning_per_phonon(p);
    }
    if (!dw) {
      if (const auto v = table.meta("delta_omega_rad_s")) dw = parse_double(*v, "delta_omega_rad_s");
    }
    if (!dw) throw ValidationError("delta_omega unknown: pass --delta-omega, --config or a readout with a header");
    for (const auto& [k, v] : table.metadata) {
      if (k == "seed" || k == "readout_seed" || k.rfind("param.", 0) == 0) meta.emplace_back("source." + k, v);
    }

    const auto trace = io::readout_from_csv(table, *dw);
    const double thr = threshold.value_or(*dw);
    add_number(meta, "delta_omega_rad_s", *dw);
    add_number(meta, "threshold_rad_s", thr);
    const auto stats = jumpsim::jump_detection_stats(trace, thr);

    Json body = io::to_json(stats);
    Json peaks = Json::array();
    for (const auto& lp : jumpsim::level_peaks(trace, max_level)) {
      peaks.push_back({{"level", lp.level}, {"count", lp.count}, {"mean", lp.mean}, {"stddev", lp.stddev}});
    }
    body["level_peaks"] = peaks;
    if (peaks.size() >= 2 && peaks[0]["count"].get<std::size_t>() > 0 && peaks[1]["count"].get<std::size_t>() > 0) {
      const double sep = peaks[1]["mean"].get<double>() - peaks[0]["mean"].get<double>();
      body["peak_separation"] = sep;
      body["peak_separation_over_delta_omega"] = sep / *dw;
    }
    if (!trace.freq_estimates.empty()) {
      const auto [lo_it, hi_it] = std::minmax_element(trace.freq_estimates.begin(), trace.freq_estimates.end());
      // Upper edge nudged so the largest estimate falls in the last bin.
      const double lo = *lo_it;
      const double hi = *hi_it > *lo_it ? std::nextafter(*hi_it, std::numeric_limits<double>::infinity()) : lo + 1.0;
      const auto h = jumpsim::histogram(trace.freq_estimates, lo, hi, bins);
      body["histogram"] = {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
    }
    emit(output, dump(with_metadata(meta, body)), out);
  }
};

sweep::SweepAxis parse_axis(const std::string& spec) {
  const auto groups = split(spec, ',');
  const auto head = split(groups[0], ':');
  if (head.size() != 4 && head.size() != 5) {
    throw ConfigError("axis", "expected param:min:max:count[:lin|log], got '" + spec + "'");
  }
  sweep::SweepAxis axis;
  axis.param = std::string(head[0]);
  axis.min = parse_double(head[1], axis.param);
  axis.max = parse_double(head[2], axis.param);
  const double count = parse_double(head[3], axis.param);
  if (!(count >= 2.0) || count != std::floor(count)) throw ConfigError(axis.param, "axis count must be an integer >= 2");
  axis.count = static_cast<std::size_t>(count);
  if (head.size() == 5) {
    if (head[4] == "log") {
      axis.scale = sweep::Scale::Logarithmic;
    } else if (head[4] != "lin") {
      throw ConfigError(axis.param, "scale must be lin or log");
    }
  }
  for (std::size_t g = 1; g < groups.size(); ++g) {
    const auto link = split(groups[g], ':');
    if (link.size() != 3) throw ConfigError("axis", "linked parameter must be param:min:max");
    const std::string name(link[0]);
    axis.linked.push_back({name, parse_double(link[1], name), parse_double(link[2], name)});
  }
  return axis;
}

struct SweepCmd {
  ParamSource params;
  std::vector<std::string> axes;
  unsigned refine = 0;
  unsigned workers = default_workers();
  std::string output;
  std::string best;

  void attach(CLI::App* sub) {
    params.attach(sub);
    sub->add_option("--axis", axes,
                    "Axis param:min:max:count[:lin|log], optionally followed by linked parameters "
                    ",param:min:max that move with it (repeatable, up to 3)")
        ->required();
    sub->add_option("--refine", refine, "Golden-section refinement iterations around the best grid point (0: grid only)")
        ->capture_default_str();
    sub->add_option("--workers", workers, "Worker threads");
    sub->add_option("-o,--output", output, "Sweep CSV (default stdout)");
    sub->add_option("--best", best, "Write the best feasible point as JSON here");
  }

  void execute(std::ostream& out) const {
    const auto base = params.resolve();
    std::vector<sweep::SweepAxis> parsed;
    for (const auto& a : axes) parsed.push_back(parse_axis(a));
    sweep::check_axes(parsed);

    Metadata meta = io::base_metadata("sweep");
    io::append_params(meta, base);
    for (const auto& a : axes) meta.emplace_back("axis", a);
    const auto result = sweep::grid_sweep(base, parsed, workers);
    std::ostringstream ss;
    io::write_sweep_csv(ss, result, meta);
    emit(output, ss.str(), out);

    if (best.empty()) return;
    Json body = Json::object();
    if (refine > 0) {
      const auto opt = sweep::maximize_snr(base, parsed, refine, workers);
      body["feasible"] = opt.feasible;
      body["coarse_snr"] = opt.coarse_snr;
      body["evaluations"] = opt.evaluations;
      body["refine_iterations"] = refine;
      if (opt.feasible) {
        body["params"] = io::to_json(opt.params);
        body["budget"] = io::to_json(*opt.budget);
      }
    } else {
      body["feasible"] = result.best.has_value();
      if (result.best) {
        const auto& pt = result.points[*result.best];
        body["grid_index"] = *result.best;
        body["params"] = io::to_json(pt.params);
        body["budget"] = io::to_json(*pt.budget);
      }
    }
    io::write_file(best, dump(with_metadata(meta, body)));
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Membrane-in-the-middle optomechanics toolkit", "optomech"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough(false);

  BandCmd band;
  TransmissionCmd trans;
  RingdownCmd ring;
  MechRingdownCmd mech;
  CoolFitCmd cool;
  BudgetCmd budget;
  JumpSimCmd jsim;
  JumpStatsCmd jstats;
  SweepCmd sweep_cmd;

  auto* s_band = app.add_subcommand("bandstructure", "Cavity frequency bands versus membrane position (CSV)");
  band.attach(s_band);
  auto* s_trans = app.add_subcommand("transmission-map", "Transfer-matrix transmission over detuning and position (CSV)");
  trans.attach(s_trans);
  auto* s_ring = app.add_subcommand("ringdown-fit", "Fit an optical ringdown and report tau and finesse (JSON)");
  ring.attach(s_ring);
  auto* s_mech = app.add_subcommand("mech-ringdown-fit", "Fit a mechanical amplitude ringdown and report Q (JSON)");
  mech.attach(s_mech);
  auto* s_cool = app.add_subcommand("cool-fit", "Fit a displacement PSD and estimate effective temperatures (JSON)");
  cool.attach(s_cool);
  auto* s_budget = app.add_subcommand("qnd-budget", "Phonon-jump detection budget and SNR (JSON)");
  budget.attach(s_budget);
  auto* s_jsim = app.add_subcommand("jump-sim", "Simulate a phonon-number trajectory and optional readout (CSV)");
  jsim.attach(s_jsim);
  auto* s_jstats = app.add_subcommand("jump-stats", "Detection statistics and level peaks of a readout (JSON)");
  jstats.attach(s_jstats);
  auto* s_sweep = app.add_subcommand("sweep", "Grid sweep and SNR maximization (CSV, JSON)");
  sweep_cmd.attach(s_sweep);

  std::vector<const char*> argv{"optomech"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (s_band->parsed()) band.execute(out);
    else if (s_trans->parsed()) trans.execute(out);
    else if (s_ring->parsed()) ring.execute(out);
    else if (s_mech->parsed()) mech.execute(out);
    else if (s_cool->parsed()) cool.execute(out);
    else if (s_budget->parsed()) budget.execute(out);
    else if (s_jsim->parsed()) jsim.execute(out);
    else if (s_jstats->parsed()) jstats.execute(out);
    else if (s_sweep->parsed()) sweep_cmd.execute(out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace optomech::cli
