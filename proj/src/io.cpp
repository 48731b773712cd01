#include "optomech/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "optomech/constants.hpp"
#include "optomech/errors.hpp"

namespace optomech::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line = line.substr(comma + 1);
  }
  return out;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Metadata base_metadata(std::string_view command) {
  return {{"tool", "optomech"}, {"version", kVersion}, {"command", std::string(command)}};
}

void append_params(Metadata& meta, const ExperimentParams& p) {
  for (auto key : kParamKeys) meta.emplace_back("param." + std::string(key), format_number(get_param(p, key)));
}

const std::vector<double>& CsvTable::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError(std::string(name), "CSV column missing");
  return columns[static_cast<std::size_t>(it - header.begin())];
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::optional<std::string> CsvTable::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    const std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon != std::string_view::npos) {
        table.metadata.emplace_back(std::string(trim(body.substr(0, colon))),
                                    std::string(trim(body.substr(colon + 1))));
      }
      continue;
    }

    const auto cells = split(line);
    if (table.header.empty()) {
      for (auto c : cells) table.header.emplace_back(c);
      table.columns.resize(cells.size());
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ConfigError("", "CSV line " + std::to_string(line_no) + ": expected " +
                                std::to_string(table.header.size()) + " fields");
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
      if (ec != std::errc{} || ptr != cells[i].data() + cells[i].size() || cells[i].empty()) {
        throw ConfigError(table.header[i], "CSV line " + std::to_string(line_no) + ": cannot parse '" +
                                               std::string(cells[i]) + "'");
      }
      table.columns[i].push_back(v);
    }
  }
  if (table.header.empty()) throw ConfigError("", "CSV has no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

void write_metadata(std::ostream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << ": " << v << '\n';
}

void write_csv(std::ostream& out, const Metadata& meta, std::span<const std::string> header,
               std::span<const std::vector<double>> columns) {
  write_metadata(out, meta);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_number(columns[c][r]);
    out << '\n';
  }
}

void write_band_structure_csv(std::ostream& out, const cavity::BandStructure& bands, const Metadata& meta) {
  std::vector<std::string> header{"x_m"};
  std::vector<std::vector<double>> cols{bands.x};
  for (const auto& b : bands.bands) {
    header.push_back(b.label.name());
    cols.push_back(b.omega);
  }
  Metadata m = meta;
  m.emplace_back("omega_fsr_rad_s", format_number(bands.omega_fsr));
  write_csv(out, m, header, cols);
}

void write_transmission_csv(std::ostream& out, const cavity::TransmissionMap& map, const Metadata& meta) {
  write_metadata(out, meta);
  out << "detuning_rad_s,x_m,intensity\n";
  for (std::size_t ix = 0; ix < map.x_grid.size(); ++ix) {
    for (std::size_t id = 0; id < map.detuning_grid.size(); ++id) {
      out << format_number(map.detuning_grid[id]) << ',' << format_number(map.x_grid[ix]) << ','
          << format_number(map.at(id, ix)) << '\n';
    }
  }
}

void write_trajectory_csv(std::ostream& out, const jumpsim::JumpTrajectory& traj, const Metadata& meta) {
  Metadata m = meta;
  m.emplace_back("duration_s", format_number(traj.duration));
  m.emplace_back("truncated", traj.truncated ? "true" : "false");
  m.emplace_back("measurement_channels", traj.measurement_channels ? "on" : "off");
  m.emplace_back("events", std::to_string(traj.events.size()));
  write_metadata(out, m);
  out << "t_s,n\n0,0\n";
  for (const auto& e : traj.events) out << format_number(e.time) << ',' << e.n_after << '\n';
}

void write_readout_csv(std::ostream& out, const jumpsim::ReadoutTrace& trace, const Metadata& meta) {
  Metadata m = meta;
  m.emplace_back("bin_width_s", format_number(trace.bin_width));
  m.emplace_back("delta_omega_rad_s", format_number(trace.delta_omega));
  m.emplace_back("noise_sigma_rad_s", format_number(trace.noise_sigma));
  const std::vector<std::string> header{"t_s", "freq_estimate_rad_s", "true_n"};
  const std::vector<std::vector<double>> cols{trace.bin_centers, trace.freq_estimates, trace.true_n_per_bin};
  write_csv(out, m, header, cols);
}

jumpsim::ReadoutTrace readout_from_csv(const CsvTable& table, double delta_omega) {
  jumpsim::ReadoutTrace trace;
  trace.bin_centers = table.column("t_s");
  trace.freq_estimates = table.column("freq_estimate_rad_s");
  trace.true_n_per_bin = table.column("true_n");
  trace.delta_omega = delta_omega;
  if (const auto bw = table.meta("bin_width_s")) {
    trace.bin_width = std::stod(*bw);
  } else if (trace.bin_centers.size() >= 2) {
    trace.bin_width = trace.bin_centers[1] - trace.bin_centers[0];
  } else if (trace.bin_centers.size() == 1) {
    trace.bin_width = 2.0 * trace.bin_centers[0];
  }
  return trace;
}

void write_sweep_csv(std::ostream& out, const sweep::SweepResult& result, const Metadata& meta) {
  write_metadata(out, meta);
  out << "index";
  for (auto key : kParamKeys) out << ',' << key;
  out << ",delta_omega,kappa,n_bar_photons,s_omega,tau_thermal,tau_rwa,tau_lin,tau_total,snr,gap"
         ",qnd_time_ok,gap_ok,classical_bath_ok,good_cavity,feasible,error\n";
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& pt = result.points[i];
    out << i;
    for (auto key : kParamKeys) out << ',' << format_number(get_param(pt.params, key));
    if (pt.budget) {
      const auto& b = *pt.budget;
      for (double v : {b.delta_omega, b.kappa, b.n_bar_photons, b.s_omega, b.tau_thermal, b.tau_rwa}) {
        out << ',' << format_number(v);
      }
      out << ',' << (b.tau_lin ? format_number(*b.tau_lin) : "inf");
      for (double v : {b.tau_total, b.snr, b.gap}) out << ',' << format_number(v);
      for (bool f : {b.flags.qnd_time_ok, b.flags.gap_ok, b.flags.classical_bath_ok, b.flags.good_cavity,
                     pt.feasible()}) {
        out << ',' << (f ? 1 : 0);
      }
      out << ",\n";
    } else {
      out << ",,,,,,,,,,,0,0,0,0,0,\"";
      for (char ch : pt.error) out << (ch == '"' ? '\'' : ch);
      out << "\"\n";
    }
  }
}

Json to_json(const Metadata& meta) {
  Json j = Json::object();
  for (const auto& [k, v] : meta) j[k] = v;
  return j;
}

Json to_json(const ExperimentParams& p) {
  Json j = Json::object();
  for (auto key : kParamKeys) j[std::string(key)] = get_param(p, key);
  return j;
}

Json to_json(const qnd::QndBudget& b) {
  Json j = Json::object();
  j["delta_omega"] = b.delta_omega;
  j["kappa"] = b.kappa;
  j["n_bar_photons"] = b.n_bar_photons;
  j["n_bar_phonons"] = b.n_bar_phonons;
  j["x_m"] = b.x_m;
  j["s_omega"] = b.s_omega;
  j["tau_thermal"] = b.tau_thermal;
  j["tau_rwa"] = b.tau_rwa;
  j["tau_lin"] = optional_number(b.tau_lin);
  j["tau_total"] = b.tau_total;
  j["snr"] = b.snr;
  j["gap"] = b.gap;
  j["flags"] = {{"qnd_time_ok", b.flags.qnd_time_ok},
                {"gap_ok", b.flags.gap_ok},
                {"classical_bath_ok", b.flags.classical_bath_ok},
                {"good_cavity", b.flags.good_cavity}};
  return j;
}

Json to_json(const cooling::PsdFit& fit) {
  Json j = Json::object();
  j["omega_eff"] = fit.omega_eff;
  j["gamma_eff"] = fit.gamma_eff;
  j["q_eff"] = fit.q_eff;
  j["t_eff_area"] = fit.t_eff_area;
  j["t_eff_q"] = optional_number(fit.t_eff_q);
  j["floor"] = fit.floor;
  j["residual_rms"] = fit.residual_rms;
  j["t_eff_model"] = fit.t_eff_model;
  return j;
}

Json to_json(const jumpsim::DetectionStats& stats) {
  Json j = Json::object();
  j["detection_probability"] = optional_number(stats.detection_probability);
  j["false_alarm_rate"] = optional_number(stats.false_alarm_rate);
  j["excited_bins"] = stats.excited_bins;
  j["ground_bins"] = stats.ground_bins;
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("", "cannot write " + path.string());
  out << contents;
}

}  // namespace optomech::io
