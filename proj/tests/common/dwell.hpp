#pragma once

#include <vector>

#include "optomech/jumpsim.hpp"

namespace dwell {

// Completed stays in `level` that began before `entry_cutoff`. With a margin of
// many mean dwell times between the cutoff and the end of the trajectory, the
// stays are not biased toward short ones by the end of the record.
inline std::vector<double> stays_entered_before(const optomech::jumpsim::JumpTrajectory& traj, unsigned level,
                                                double entry_cutoff) {
  std::vector<double> out;
  unsigned n = 0;
  double entered = 0.0;
  for (const auto& e : traj.events) {
    if (n == level && entered < entry_cutoff) out.push_back(e.time - entered);
    if (e.time >= entry_cutoff && n != level) break;
    n = e.n_after;
    entered = e.time;
  }
  return out;
}

}  // namespace dwell
