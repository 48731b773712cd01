#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "optomech/params.hpp"
#include "optomech/qnd.hpp"

namespace optomech::sweep {

enum class Scale { Linear, Logarithmic };

/// A parameter moved in lockstep with an axis (same index, same scale), e.g.
/// to co-set P_in and r_c with F.
struct LinkedParam {
  std::string param;
  double min = 0.0;
  double max = 0.0;
};

struct SweepAxis {
  std::string param;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 2;
  Scale scale = Scale::Linear;
  std::vector<LinkedParam> linked;

  /// Value at fractional position f in [0, 1] of the axis (in scale space).
  /// f = 0 and f = 1 return min and max exactly.
  double value_at(double f) const;
  /// Applies the axis and its linked parameters at position f.
  void apply(ExperimentParams& p, double f) const;
};

/// Throws ValidationError for a malformed axis set (unknown or repeated
/// parameter, count < 2, min >= max, non-positive log bounds, > 3 axes).
void check_axes(std::span<const SweepAxis> axes);

struct GridPoint {
  std::vector<std::size_t> index;  // per axis
  ExperimentParams params;
  std::optional<qnd::QndBudget> budget;
  std::string error;  // set when the budget could not be evaluated

  bool feasible() const { return budget.has_value() && budget->flags.all(); }
};

struct SweepResult {
  std::vector<SweepAxis> axes;
  std::vector<GridPoint> points;  // row-major, first axis slowest
  std::optional<std::size_t> best;  // highest SNR among feasible points, lowest index on ties
};

SweepResult grid_sweep(const ExperimentParams& base, std::span<const SweepAxis> axes, unsigned workers = 1);

struct Optimum {
  bool feasible = false;
  ExperimentParams params;
  std::optional<qnd::QndBudget> budget;
  double coarse_snr = 0.0;  // best feasible SNR on the coarse grid
  std::size_t evaluations = 0;
};

/// Coarse grid, then `refine_iters` rounds of coordinate-wise golden-section
/// search within one grid cell of the incumbent. A candidate replaces the
/// incumbent only if feasible with strictly higher SNR.
Optimum maximize_snr(const ExperimentParams& base, std::span<const SweepAxis> axes, unsigned refine_iters,
                     unsigned workers = 1);

}  // namespace optomech::sweep
