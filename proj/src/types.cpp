#include "radt/types.hpp"

#include <algorithm>
#include <cmath>

namespace radt {

AvoidBox box_from_centroid(std::span<const double> centroid, double width) {
  if (width < 0.0) throw ArgumentError("box width must be nonnegative");
  AvoidBox box;
  box.lower.reserve(centroid.size());
  box.upper.reserve(centroid.size());
  for (double c : centroid) {
    box.lower.push_back(c - width / 2.0);
    box.upper.push_back(c + width / 2.0);
  }
  return box;
}

AvoidBox box_from_centroid(std::span<const double> centroid,
                           std::span<const double> widths) {
  if (centroid.size() != widths.size())
    throw ArgumentError("centroid/width dimension mismatch");
  AvoidBox box;
  box.lower.reserve(centroid.size());
  box.upper.reserve(centroid.size());
  for (std::size_t i = 0; i < centroid.size(); ++i) {
    if (widths[i] < 0.0) throw ArgumentError("box width must be nonnegative");
    box.lower.push_back(centroid[i] - widths[i] / 2.0);
    box.upper.push_back(centroid[i] + widths[i] / 2.0);
  }
  return box;
}

bool box_contains(const AvoidBox& box, std::span<const double> s) {
  if (box.dim() != s.size())
    throw ArgumentError("box/state dimension mismatch: box has " +
                        std::to_string(box.dim()) + ", state has " +
                        std::to_string(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < box.lower[i] || s[i] > box.upper[i]) return false;
  }
  return true;
}

int avoid_success(const Trajectory& traj, const std::vector<AvoidBox>& boxes) {
  for (const auto& s : traj.states) {
    for (const auto& box : boxes) {
      if (box_contains(box, s)) return 0;
    }
  }
  return 1;
}

std::vector<std::uint8_t> per_step_violation(const Trajectory& traj,
                                             const std::vector<AvoidBox>& boxes) {
  std::vector<std::uint8_t> ok(traj.states.size(), 1);
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    for (const auto& box : boxes) {
      if (box_contains(box, traj.states[t])) {
        ok[t] = 0;
        break;
      }
    }
  }
  return ok;
}

LabeledTrajectory make_labeled(Trajectory traj, std::vector<AvoidBox> boxes,
                               StateVec goal) {
  LabeledTrajectory lt;
  lt.per_step_ok = per_step_violation(traj, boxes);
  lt.prompt.z = avoid_success(traj, boxes);
  lt.prompt.avoid_boxes = std::move(boxes);
  lt.prompt.goal = std::move(goal);
  lt.trajectory = std::move(traj);
  return lt;
}

long long verify_pairing(const PairedDataset& ds) {
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    const auto& p = ds.pairs[i];
    if (!p.orig.trajectory.same_content(p.copy.trajectory))
      return static_cast<long long>(i);
    if (p.orig.prompt.z + p.copy.prompt.z != 1)
      return static_cast<long long>(i);
  }
  return -1;
}

}  // namespace radt
