#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "radt/errors.hpp"

namespace radt {

using StateVec = std::vector<double>;
using ActionVec = std::vector<double>;

struct EpisodeMeta {
  std::uint64_t seed = 0;
  std::string env_id;
};

/// One episode: T states and the T actions taken from them, interleaved as
/// (s_1, a_1, ..., s_T, a_T). The unit of relabeling, training and evaluation.
struct Trajectory {
  std::vector<StateVec> states;
  std::vector<ActionVec> actions;
  EpisodeMeta meta;

  std::size_t length() const { return states.size(); }
  std::size_t state_dim() const { return states.empty() ? 0 : states.front().size(); }

  bool same_content(const Trajectory& other) const {
    return states == other.states && actions == other.actions;
  }
};

/// Axis-aligned box in state space; the lower/upper pair concatenates into
/// the 2*d_s box-coordinate vector used as an avoid token.
struct AvoidBox {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const { return lower.size(); }

  /// Flat [l_1..l_d, u_1..u_d] vector, the wire/token representation.
  std::vector<double> coordinate_vector() const {
    std::vector<double> v(lower);
    v.insert(v.end(), upper.begin(), upper.end());
    return v;
  }
};

/// Box of the given width centered on `centroid` (degenerate when width 0).
AvoidBox box_from_centroid(std::span<const double> centroid, double width);

/// Per-dimension widths; used where some state dimensions are unbounded
/// (e.g. velocity coordinates that never constrain membership).
AvoidBox box_from_centroid(std::span<const double> centroid,
                           std::span<const double> widths);

/// Inclusive membership on both bounds, so width-0 boxes contain their
/// centroid (this also makes the epsilon-box construction for discrete
/// states behave as exact-match).
bool box_contains(const AvoidBox& box, std::span<const double> s);

/// The six-token-type prompt. The start/end tokens i_b, i_g and e are
/// structural and realized in the embedding step; only the payload lives here.
struct PromptSpec {
  int z = 1;  // avoid success indicator, in {0,1}
  std::vector<AvoidBox> avoid_boxes;
  StateVec goal;

  std::size_t n_avoid() const { return avoid_boxes.size(); }
};

/// 1 iff no state of the trajectory is inside any box.
int avoid_success(const Trajectory& traj, const std::vector<AvoidBox>& boxes);

/// Element t is 1 if states[t] is outside all boxes, 0 if it violates one.
std::vector<std::uint8_t> per_step_violation(const Trajectory& traj,
                                             const std::vector<AvoidBox>& boxes);

struct LabeledTrajectory {
  Trajectory trajectory;
  PromptSpec prompt;
  std::vector<std::uint8_t> per_step_ok;  // the k_t sequence
};

/// Builds the label from the raw pieces, enforcing z == min_t per_step_ok.
LabeledTrajectory make_labeled(Trajectory traj, std::vector<AvoidBox> boxes,
                               StateVec goal);

struct PairedDataset {
  struct Pair {
    LabeledTrajectory orig;
    LabeledTrajectory copy;
  };
  std::vector<Pair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

/// Checks states/actions identical and z complementary on every pair;
/// returns the index of the first offending pair, or -1 when all hold.
long long verify_pairing(const PairedDataset& ds);

}  // namespace radt
