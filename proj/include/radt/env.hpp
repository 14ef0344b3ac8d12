#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "radt/rng.hpp"
#include "radt/types.hpp"

namespace radt {

struct EnvSpec {
  std::string env_id;
  int d_s = 0;
  int d_a = 0;
  int max_episode_steps = 1;
  double goal_tolerance = 0.0;  // continuous envs only
  std::vector<std::pair<double, double>> state_bounds;
};

struct StepResult {
  StateVec state;
  bool reached = false;
  bool done = false;
};

/// Common episodic interface. One instance is owned by one episode driver;
/// run independent instances in parallel for data generation and evaluation.
class Env {
 public:
  virtual ~Env() = default;

  virtual const EnvSpec& spec() const = 0;
  virtual StateVec reset(std::uint64_t seed) = 0;
  virtual StepResult step(const ActionVec& action) = 0;

  /// Goal of the current episode (valid after reset).
  virtual StateVec goal() const = 0;

  /// Avoid regions sampled by the environment for the current episode,
  /// already in box form. Empty when the env has none.
  virtual std::vector<AvoidBox> episode_avoid_boxes() const = 0;

  virtual ActionVec sample_random_action(Rng& rng) const = 0;

  /// True for environments whose random data is one long stream chopped
  /// into fixed-length trajectories rather than episodic resets.
  virtual bool stream_data() const { return false; }
};

/// Random-policy data generation. Episodic envs cut trajectories at done and
/// reset; stream envs walk continuously and split every max_episode_steps
/// states. Trajectory lengths sum to n_steps either way.
std::vector<Trajectory> random_rollout(Env& env, std::uint64_t seed, int n_steps);

}  // namespace radt
