#pragma once

#include <array>
#include <functional>

#include "radt/env.hpp"

namespace radt {

/// Point-mass navigator in the classic U-maze, encoded as a 5x5 occupancy
/// grid of unit cells. Walls are hard constraints (motion is blocked by
/// axis-separated projection); avoid circles are soft and never block.
/// State is [x, y, vx, vy].
struct MazeConfig {
  int max_episode_steps = 300;
  double goal_tolerance = 0.45;  // cell units
  int n_avoid = 1;
  double avoid_radius = 0.2;
  double accel = 0.2;
  double damping = 0.1;
  double dt = 0.1;
  double v_max = 1.0;
};

struct MazeEnvState {
  StateVec position;  // 2-vector
  StateVec velocity;  // 2-vector
  StateVec goal;      // 2-vector (position subspace)
  std::vector<std::pair<StateVec, double>> avoid_circles;  // (center, radius)
  int step_count = 0;
};

class MazeEnv final : public Env {
 public:
  explicit MazeEnv(MazeConfig cfg = {});

  const EnvSpec& spec() const override { return spec_; }
  StateVec reset(std::uint64_t seed) override;
  StepResult step(const ActionVec& action) override;
  StateVec goal() const override;
  std::vector<AvoidBox> episode_avoid_boxes() const override;
  ActionVec sample_random_action(Rng& rng) const override;

  const MazeEnvState& env_state() const { return state_; }
  const MazeConfig& config() const { return cfg_; }

  /// Grid occupancy; (row, col) in [0,5).
  static bool is_wall_cell(int row, int col);
  /// True when the continuous point lies in a free cell.
  static bool is_free(double x, double y);

  /// Free-space membership on the position subspace, for restricted
  /// avoid-centroid sampling.
  std::function<bool(double, double)> free_space_predicate() const {
    return [](double x, double y) { return is_free(x, y); };
  }

  AvoidBox circle_to_box(const StateVec& center, double radius) const;

 private:
  StateVec observation() const;
  StateVec sample_free_position(Rng& rng, double margin) const;

  MazeConfig cfg_;
  EnvSpec spec_;
  MazeEnvState state_;
};

}  // namespace radt
