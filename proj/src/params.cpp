#include "optomech/params.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "optomech/errors.hpp"

namespace optomech {

namespace {

double* field(ExperimentParams& p, std::string_view key) {
  if (key == "L") return &p.L;
  if (key == "lambda") return &p.lambda;
  if (key == "F") return &p.F;
  if (key == "P_in") return &p.P_in;
  if (key == "T") return &p.T;
  if (key == "m") return &p.m;
  if (key == "omega_m") return &p.omega_m;
  if (key == "Q") return &p.Q;
  if (key == "r_c") return &p.r_c;
  if (key == "x0") return &p.x0;
  return nullptr;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double get_param(const ExperimentParams& p, std::string_view key) {
  const double* f = field(const_cast<ExperimentParams&>(p), key);
  if (f == nullptr) throw ConfigError(std::string(key), "unknown parameter");
  return *f;
}

void set_param(ExperimentParams& p, std::string_view key, double value) {
  double* f = field(p, key);
  if (f == nullptr) throw ConfigError(std::string(key), "unknown parameter");
  *f = value;
}

std::vector<Violation> validate(const ExperimentParams& p) {
  std::vector<Violation> out;
  auto positive = [&](std::string_view key, double v) {
    if (!(std::isfinite(v) && v > 0.0)) out.push_back({std::string(key), std::string(key) + " must be > 0"});
  };
  // Keys are visited in ASCII order so the result needs no sorting.
  if (!(std::isfinite(p.F) && p.F >= 1.0)) out.push_back({"F", "F must be >= 1"});
  positive("L", p.L);
  positive("P_in", p.P_in);
  positive("Q", p.Q);
  positive("T", p.T);
  positive("lambda", p.lambda);
  positive("m", p.m);
  positive("omega_m", p.omega_m);
  if (!std::isfinite(p.r_c) || p.r_c < 0.0) {
    out.push_back({"r_c", "r_c must be >= 0"});
  } else if (p.r_c >= 1.0) {
    out.push_back({"r_c", "r_c must be < 1"});
  }
  if (!std::isfinite(p.x0) || p.x0 < 0.0) {
    out.push_back({"x0", "x0 must be >= 0"});
  } else if (std::isfinite(p.lambda) && p.lambda > 0.0 && p.x0 >= p.lambda / 8.0) {
    out.push_back({"x0", "x0 must be < lambda/8"});
  }
  return out;
}

void require_valid(const ExperimentParams& p) {
  const auto violations = validate(p);
  if (!violations.empty()) throw ConfigError(violations.front().field, violations.front().message);
}

ExperimentParams parse_config(std::string_view text) {
  std::map<std::string, double, std::less<>> values;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view raw = trim(line.substr(eq + 1));
    if (std::find(kParamKeys.begin(), kParamKeys.end(), key) == kParamKeys.end()) {
      throw ConfigError(key, "unknown key");
    }
    if (values.contains(key)) throw ConfigError(key, "duplicate key");

    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc{} || ptr != raw.data() + raw.size() || raw.empty()) {
      throw ConfigError(key, "cannot parse number '" + std::string(raw) + "'");
    }
    values.emplace(key, v);
  }

  ExperimentParams p;
  for (auto key : kParamKeys) {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError(std::string(key), "missing key");
    set_param(p, key, it->second);
  }
  require_valid(p);
  return p;
}

ExperimentParams load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string format_config(const ExperimentParams& p) {
  std::string out;
  for (auto key : kParamKeys) {
    out += key;
    out += " = ";
    out += format_double(get_param(p, key));
    out += '\n';
  }
  return out;
}

void save_config(const ExperimentParams& p, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("", "cannot write config file " + path.string());
  out << "# optomech experiment parameters (SI units)\n" << format_config(p);
}

ExperimentParams table1_row1() {
  return ExperimentParams{.L = 0.067,
                          .lambda = 532e-9,
                          .F = 3e5,
                          .P_in = 1e-5,
                          .T = 0.3,
                          .m = 5e-14,
                          .omega_m = 6.2832e5,
                          .Q = 1.2e7,
                          .r_c = 0.999,
                          .x0 = 5e-13};
}

ExperimentParams table1_row2() {
  auto p = table1_row1();
  p.F = 6e5;
  p.P_in = 1e-6;
  p.r_c = 0.9999;
  return p;
}

std::vector<Violation> validate(const MembraneSpec& spec) {
  std::vector<Violation> out;
  if (!(std::isfinite(spec.d) && spec.d > 0.0)) out.push_back({"d", "d must be > 0"});
  if (!(std::isfinite(spec.n_index) && spec.n_index >= 1.0)) out.push_back({"n_index", "n_index must be >= 1"});
  return out;
}

}  // namespace optomech
