#include "optomech/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "optomech/errors.hpp"

namespace optomech::sweep {

namespace {

double interpolate(double lo, double hi, double f, Scale scale) {
  if (f <= 0.0) return lo;
  if (f >= 1.0) return hi;
  if (scale == Scale::Logarithmic) return lo * std::exp(f * std::log(hi / lo));
  return lo + f * (hi - lo);
}

std::optional<qnd::QndBudget> evaluate(const ExperimentParams& p, std::string* error) {
  try {
    return qnd::jump_budget(p);
  } catch (const Error& e) {
    if (error != nullptr) *error = e.what();
    return std::nullopt;
  }
}

double objective(const std::optional<qnd::QndBudget>& b) {
  return b && b->flags.all() ? b->snr : -std::numeric_limits<double>::infinity();
}

}  // namespace

double SweepAxis::value_at(double f) const { return interpolate(min, max, f, scale); }

void SweepAxis::apply(ExperimentParams& p, double f) const {
  set_param(p, param, value_at(f));
  for (const auto& l : linked) set_param(p, l.param, interpolate(l.min, l.max, f, scale));
}

void check_axes(std::span<const SweepAxis> axes) {
  if (axes.empty()) throw ValidationError("sweep needs at least one axis");
  if (axes.size() > 3) throw ValidationError("sweeps over more than 3 axes are unsupported");
  std::set<std::string> seen;
  const auto claim = [&](const std::string& name) {
    if (std::find(kParamKeys.begin(), kParamKeys.end(), name) == kParamKeys.end()) {
      throw ConfigError(name, "unknown sweep parameter");
    }
    if (!seen.insert(name).second) throw ConfigError(name, "parameter swept more than once");
  };
  for (const auto& a : axes) {
    claim(a.param);
    if (a.count < 2) throw ConfigError(a.param, "axis count must be >= 2");
    if (!(a.min < a.max)) throw ConfigError(a.param, "axis needs min < max");
    const bool log = a.scale == Scale::Logarithmic;
    if (log && !(a.min > 0.0)) throw ConfigError(a.param, "logarithmic axis needs min > 0");
    for (const auto& l : a.linked) {
      claim(l.param);
      if (log && !(l.min > 0.0 && l.max > 0.0)) throw ConfigError(l.param, "logarithmic link needs positive bounds");
    }
  }
}

SweepResult grid_sweep(const ExperimentParams& base, std::span<const SweepAxis> axes, unsigned workers) {
  check_axes(axes);
  SweepResult result;
  result.axes.assign(axes.begin(), axes.end());

  std::size_t total = 1;
  for (const auto& a : axes) total *= a.count;
  result.points.resize(total);

  for (std::size_t flat = 0; flat < total; ++flat) {
    auto& pt = result.points[flat];
    pt.index.resize(axes.size());
    pt.params = base;
    std::size_t rem = flat;
    for (std::size_t k = axes.size(); k-- > 0;) {
      pt.index[k] = rem % axes[k].count;
      rem /= axes[k].count;
    }
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const double f = static_cast<double>(pt.index[k]) / static_cast<double>(axes[k].count - 1);
      axes[k].apply(pt.params, f);
    }
  }

  const auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      result.points[i].budget = evaluate(result.points[i].params, &result.points[i].error);
    }
  };
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(total, 1)));
  if (workers == 1) {
    run(0, total);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t begin = 0; begin < total; begin += chunk) pool.emplace_back(run, begin, std::min(total, begin + chunk));
  }

  for (std::size_t i = 0; i < total; ++i) {
    const auto& pt = result.points[i];
    if (!pt.feasible()) continue;
    if (!result.best || pt.budget->snr > result.points[*result.best].budget->snr) result.best = i;
  }
  return result;
}

Optimum maximize_snr(const ExperimentParams& base, std::span<const SweepAxis> axes, unsigned refine_iters,
                     unsigned workers) {
  const auto coarse = grid_sweep(base, axes, workers);
  Optimum out;
  out.evaluations = coarse.points.size();
  if (!coarse.best) return out;

  const auto& start = coarse.points[*coarse.best];
  out.feasible = true;
  out.params = start.params;
  out.budget = start.budget;
  out.coarse_snr = start.budget->snr;

  std::vector<double> pos(axes.size());
  for (std::size_t k = 0; k < axes.size(); ++k) {
    pos[k] = static_cast<double>(start.index[k]) / static_cast<double>(axes[k].count - 1);
  }

  const auto params_at = [&](const std::vector<double>& where) {
    ExperimentParams p = base;
    for (std::size_t k = 0; k < axes.size(); ++k) axes[k].apply(p, where[k]);
    return p;
  };

  constexpr double inv_phi = 0.6180339887498949;
  for (unsigned iter = 0; iter < refine_iters; ++iter) {
    bool improved = false;
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const double cell = 1.0 / static_cast<double>(axes[k].count - 1);
      double a = std::max(0.0, pos[k] - cell);
      double b = std::min(1.0, pos[k] + cell);

      std::vector<double> probe = pos;
      double best_f = pos[k];
      double best_val = objective(out.budget);
      std::optional<qnd::QndBudget> best_budget;
      const auto f_at = [&](double f) {
        probe[k] = f;
        const auto budget = evaluate(params_at(probe), nullptr);
        ++out.evaluations;
        const double v = objective(budget);
        if (v > best_val) {
          best_val = v;
          best_f = f;
          best_budget = budget;
        }
        return v;
      };

      double c = b - inv_phi * (b - a);
      double d = a + inv_phi * (b - a);
      double fc = f_at(c);
      double fd = f_at(d);
      for (int i = 0; i < 60; ++i) {
        if (fc >= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - inv_phi * (b - a);
          fc = f_at(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + inv_phi * (b - a);
          fd = f_at(d);
        }
      }
      if (best_budget) {
        pos[k] = best_f;
        out.budget = best_budget;
        out.params = params_at(pos);
        improved = true;
      }
    }
    if (!improved) break;
  }
  return out;
}

}  // namespace optomech::sweep
