#include "radt/reach_env.hpp"

#include <algorithm>
#include <cmath>

namespace radt {

namespace {
double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

double dist3(const StateVec& a, const StateVec& b) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d);
}
}  // namespace

ReachEnv::ReachEnv(ReachConfig cfg) : cfg_(cfg) {
  spec_.env_id = "reach";
  spec_.d_s = 3;
  spec_.d_a = 3;
  spec_.max_episode_steps = cfg_.max_episode_steps;
  spec_.goal_tolerance = cfg_.goal_tolerance;
  spec_.state_bounds.assign(3, {cfg_.workspace_lo, cfg_.workspace_hi});
}

StateVec ReachEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  state_.position.resize(3);
  state_.goal.resize(3);
  for (int i = 0; i < 3; ++i)
    state_.position[i] = rng.uniform(cfg_.workspace_lo, cfg_.workspace_hi);
  for (int i = 0; i < 3; ++i)
    state_.goal[i] = rng.uniform(cfg_.workspace_lo, cfg_.workspace_hi);
  state_.avoid_boxes.clear();
  for (int j = 0; j < cfg_.n_avoid; ++j) {
    StateVec centroid(3);
    for (int i = 0; i < 3; ++i)
      centroid[i] = rng.uniform(cfg_.workspace_lo, cfg_.workspace_hi);
    state_.avoid_boxes.push_back(box_from_centroid(centroid, cfg_.box_width));
  }
  state_.step_count = 0;
  return state_.position;
}

StepResult ReachEnv::step(const ActionVec& action) {
  if (action.size() != 3) throw ArgumentError("reach action must be 3-dimensional");
  for (int i = 0; i < 3; ++i) {
    double a = clamp(action[i], -1.0, 1.0);
    state_.position[i] = clamp(state_.position[i] + a * cfg_.step_scale,
                               cfg_.workspace_lo, cfg_.workspace_hi);
  }
  state_.step_count += 1;
  StepResult r;
  r.state = state_.position;
  r.reached = dist3(state_.position, state_.goal) <= cfg_.goal_tolerance;
  r.done = r.reached || state_.step_count >= cfg_.max_episode_steps;
  return r;
}

ActionVec ReachEnv::sample_random_action(Rng& rng) const {
  ActionVec a(3);
  for (auto& x : a) x = rng.uniform(-1.0, 1.0);
  return a;
}

std::vector<Trajectory> random_rollout(Env& env, std::uint64_t seed, int n_steps) {
  if (n_steps < 1) throw ArgumentError("n_steps must be >= 1");
  std::vector<Trajectory> out;
  Rng action_rng(Rng::derive_seed(seed, "rollout-actions"));

  if (env.stream_data()) {
    // One continuous walk, split into fixed-length trajectories.
    const int chunk = env.spec().max_episode_steps;
    StateVec s = env.reset(Rng::derive_seed(seed, "rollout-reset", 0));
    Trajectory cur;
    cur.meta = {seed, env.spec().env_id};
    for (int t = 0; t < n_steps; ++t) {
      ActionVec a = env.sample_random_action(action_rng);
      cur.states.push_back(s);
      cur.actions.push_back(a);
      s = env.step(a).state;
      if (static_cast<int>(cur.length()) == chunk) {
        out.push_back(std::move(cur));
        cur = Trajectory{};
        cur.meta = {seed, env.spec().env_id};
      }
    }
    if (cur.length() > 0) out.push_back(std::move(cur));
    return out;
  }

  int taken = 0;
  std::uint64_t episode = 0;
  while (taken < n_steps) {
    StateVec s = env.reset(Rng::derive_seed(seed, "rollout-reset", episode));
    Trajectory cur;
    cur.meta = {Rng::derive_seed(seed, "rollout-reset", episode), env.spec().env_id};
    bool done = false;
    while (!done && taken < n_steps) {
      ActionVec a = env.sample_random_action(action_rng);
      cur.states.push_back(s);
      cur.actions.push_back(a);
      StepResult r = env.step(a);
      s = std::move(r.state);
      done = r.done;
      ++taken;
    }
    out.push_back(std::move(cur));
    ++episode;
  }
  return out;
}

}  // namespace radt
