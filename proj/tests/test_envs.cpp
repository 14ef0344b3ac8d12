#include <cmath>

#include "doctest.h"
#include "radt/maze_env.hpp"
#include "radt/reach_env.hpp"
#include "support/helpers.hpp"

using namespace radt;

TEST_CASE("reach reset determinism and bounds") {
  ReachEnv env;
  StateVec a = env.reset(77);
  StateVec goal_a = env.goal();
  AvoidBox box_a = env.env_state().avoid_boxes[0];
  StateVec b = env.reset(77);
  CHECK(a == b);
  CHECK(env.goal() == goal_a);
  CHECK(env.env_state().avoid_boxes[0].lower == box_a.lower);

  for (int i = 0; i < 1000; ++i) {
    env.reset(1000 + i);
    for (int d = 0; d < 3; ++d) {
      CHECK(env.goal()[d] >= env.config().workspace_lo);
      CHECK(env.goal()[d] <= env.config().workspace_hi);
      CHECK(env.env_state().position[d] >= env.config().workspace_lo);
      CHECK(env.env_state().position[d] <= env.config().workspace_hi);
    }
  }
}

TEST_CASE("reach box width follows config") {
  ReachEnv env;  // default width 0.16
  env.reset(5);
  const AvoidBox& b = env.env_state().avoid_boxes[0];
  for (int d = 0; d < 3; ++d)
    CHECK(b.upper[d] - b.lower[d] == doctest::Approx(0.16));
}

TEST_CASE("reach step kinematics") {
  ReachEnv env;
  env.reset(3);
  StateVec before = env.env_state().position;
  StepResult r = env.step(ActionVec{0.0, 0.0, 0.0});
  CHECK(r.state == before);
  CHECK(env.env_state().step_count == 1);

  // Scripted controller reaches within ceil(max-dim distance / step_scale).
  env.reset(4);
  StateVec pos = env.env_state().position;
  StateVec goal = env.goal();
  double maxdiff = 0;
  for (int d = 0; d < 3; ++d) maxdiff = std::max(maxdiff, std::abs(goal[d] - pos[d]));
  int bound = static_cast<int>(std::ceil(maxdiff / env.config().step_scale)) + 1;
  bool reached = false;
  for (int t = 0; t < bound && !reached; ++t) {
    ActionVec a(3);
    for (int d = 0; d < 3; ++d) {
      double want = (goal[d] - env.env_state().position[d]) / env.config().step_scale;
      a[d] = std::clamp(want, -1.0, 1.0);
    }
    reached = env.step(a).reached;
  }
  CHECK(reached);
}

TEST_CASE("reach avoid box is passable") {
  // Soft-constraint evidence: some random episode enters the box.
  ReachEnv env;
  Rng rng(99);
  bool entered = false;
  for (int ep = 0; ep < 1000 && !entered; ++ep) {
    StateVec s = env.reset(50000 + ep);
    const AvoidBox& box = env.env_state().avoid_boxes[0];
    for (int t = 0; t < env.spec().max_episode_steps; ++t) {
      StepResult r = env.step(env.sample_random_action(rng));
      if (box_contains(box, r.state)) {
        entered = true;
        break;
      }
      if (r.done) break;
    }
  }
  CHECK(entered);
}

TEST_CASE("reach random_rollout accounting and determinism") {
  ReachEnv env;
  auto trajs = random_rollout(env, 11, 50);
  std::size_t total = 0;
  for (const auto& t : trajs) total += t.length();
  CHECK(total == 50);

  ReachEnv env2;
  auto again = random_rollout(env2, 11, 50);
  REQUIRE(again.size() == trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    CHECK(trajs[i].states == again[i].states);
    CHECK(trajs[i].actions == again[i].actions);
  }
}

TEST_CASE("maze wall blocking keeps the agent on the free side") {
  MazeEnv env;
  env.reset(1);
  // Drive hard left for many steps: x can never cross into the wall column.
  for (int t = 0; t < 200; ++t) {
    env.step(ActionVec{-1.0, 0.0});
    CHECK(MazeEnv::is_free(env.env_state().position[0], env.env_state().position[1]));
  }
}

TEST_CASE("maze avoid circles are soft") {
  MazeEnv env;
  Rng rng(5);
  bool entered = false;
  for (int ep = 0; ep < 1000 && !entered; ++ep) {
    env.reset(90000 + ep);
    auto boxes = env.episode_avoid_boxes();
    for (int t = 0; t < 60; ++t) {
      StepResult r = env.step(env.sample_random_action(rng));
      for (const auto& b : boxes)
        if (box_contains(b, r.state)) entered = true;
      if (entered || r.done) break;
    }
  }
  CHECK(entered);
}

TEST_CASE("maze damping decays velocity to a fixed point") {
  MazeEnv env;
  env.reset(12);
  env.step(ActionVec{1.0, 1.0});  // pick up some speed
  env.step(ActionVec{1.0, 1.0});
  int iters = 0;
  while (iters < 10000) {
    env.step(ActionVec{0.0, 0.0});
    double vx = env.env_state().velocity[0], vy = env.env_state().velocity[1];
    if (std::abs(vx) < 1e-9 && std::abs(vy) < 1e-9) break;
    ++iters;
  }
  CHECK(iters < 10000);
}

TEST_CASE("maze generated states never sit inside walls") {
  MazeEnv env;
  auto trajs = random_rollout(env, 31, 3000);
  for (const auto& t : trajs)
    for (const auto& s : t.states) CHECK(MazeEnv::is_free(s[0], s[1]));
}

TEST_CASE("maze episode avoid boxes circumscribe the circles") {
  MazeEnv env;
  env.reset(8);
  auto boxes = env.episode_avoid_boxes();
  REQUIRE(boxes.size() == 1);
  const auto& [center, radius] = env.env_state().avoid_circles[0];
  CHECK(boxes[0].upper[0] - boxes[0].lower[0] == doctest::Approx(2 * radius));
  CHECK((boxes[0].lower[0] + boxes[0].upper[0]) / 2 == doctest::Approx(center[0]));
  // Velocity dims span the full range: membership is position-only.
  CHECK(boxes[0].lower[2] == -env.config().v_max);
  CHECK(boxes[0].upper[3] == env.config().v_max);
}
