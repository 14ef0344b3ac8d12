#pragma once

#include <optional>

#include "radt/env.hpp"

namespace radt {

/// Point end-effector in a 3D workspace: position moves by a clipped action
/// delta each step. Avoid boxes are soft (never block motion); the episode
/// ends on reaching the goal or on the step cap.
struct ReachConfig {
  double workspace_lo = 0.0;
  double workspace_hi = 0.3;
  double step_scale = 0.05;
  double goal_tolerance = 0.05;
  int max_episode_steps = 50;
  double box_width = 0.16;
  int n_avoid = 1;
};

struct ReachEnvState {
  StateVec position;  // 3-vector
  StateVec goal;      // 3-vector
  std::vector<AvoidBox> avoid_boxes;
  int step_count = 0;
};

class ReachEnv final : public Env {
 public:
  explicit ReachEnv(ReachConfig cfg = {});

  const EnvSpec& spec() const override { return spec_; }
  StateVec reset(std::uint64_t seed) override;
  StepResult step(const ActionVec& action) override;
  StateVec goal() const override { return state_.goal; }
  std::vector<AvoidBox> episode_avoid_boxes() const override {
    return state_.avoid_boxes;
  }
  ActionVec sample_random_action(Rng& rng) const override;

  const ReachEnvState& env_state() const { return state_; }
  const ReachConfig& config() const { return cfg_; }

 private:
  ReachConfig cfg_;
  EnvSpec spec_;
  ReachEnvState state_;
};

}  // namespace radt
