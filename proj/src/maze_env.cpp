#include "radt/maze_env.hpp"

#include <algorithm>
#include <cmath>

namespace radt {

namespace {

// Classic U-maze: free corridor along the top, right gap, bottom.
constexpr std::array<std::array<int, 5>, 5> kUMaze = {{
    {1, 1, 1, 1, 1},
    {1, 0, 0, 0, 1},
    {1, 1, 1, 0, 1},
    {1, 0, 0, 0, 1},
    {1, 1, 1, 1, 1},
}};

constexpr double kWallMargin = 1e-3;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

bool MazeEnv::is_wall_cell(int row, int col) {
  if (row < 0 || row >= 5 || col < 0 || col >= 5) return true;
  return kUMaze[row][col] != 0;
}

bool MazeEnv::is_free(double x, double y) {
  int col = static_cast<int>(std::floor(x));
  int row = static_cast<int>(std::floor(y));
  return !is_wall_cell(row, col);
}

MazeEnv::MazeEnv(MazeConfig cfg) : cfg_(cfg) {
  spec_.env_id = "maze";
  spec_.d_s = 4;
  spec_.d_a = 2;
  spec_.max_episode_steps = cfg_.max_episode_steps;
  spec_.goal_tolerance = cfg_.goal_tolerance;
  spec_.state_bounds = {{0.0, 5.0}, {0.0, 5.0},
                        {-cfg_.v_max, cfg_.v_max}, {-cfg_.v_max, cfg_.v_max}};
}

StateVec MazeEnv::observation() const {
  return {state_.position[0], state_.position[1], state_.velocity[0],
          state_.velocity[1]};
}

StateVec MazeEnv::sample_free_position(Rng& rng, double margin) const {
  for (;;) {
    double x = rng.uniform(0.0, 5.0);
    double y = rng.uniform(0.0, 5.0);
    int col = static_cast<int>(std::floor(x));
    int row = static_cast<int>(std::floor(y));
    if (is_wall_cell(row, col)) continue;
    // Keep a margin to the cell border so sampled points stay clear of walls.
    double fx = x - col, fy = y - row;
    if (fx < margin || fx > 1.0 - margin || fy < margin || fy > 1.0 - margin)
      continue;
    return {x, y};
  }
}

StateVec MazeEnv::reset(std::uint64_t seed) {
  Rng rng(seed);
  state_.position = sample_free_position(rng, 0.1);
  state_.velocity = {0.0, 0.0};
  state_.goal = sample_free_position(rng, 0.1);
  state_.avoid_circles.clear();
  for (int j = 0; j < cfg_.n_avoid; ++j)
    state_.avoid_circles.emplace_back(sample_free_position(rng, 0.0),
                                      cfg_.avoid_radius);
  state_.step_count = 0;
  return observation();
}

StepResult MazeEnv::step(const ActionVec& action) {
  if (action.size() != 2) throw ArgumentError("maze action must be 2-dimensional");
  for (int i = 0; i < 2; ++i) {
    double a = clamp(action[i], -1.0, 1.0);
    double v = (state_.velocity[i] + a * cfg_.accel) * (1.0 - cfg_.damping);
    state_.velocity[i] = clamp(v, -cfg_.v_max, cfg_.v_max);
  }

  // Axis-separated wall resolution: blocked motion projects the position to
  // the wall boundary and zeroes the velocity on that axis.
  double x = state_.position[0], y = state_.position[1];
  double nx = x + state_.velocity[0] * cfg_.dt;
  if (!is_free(nx, y)) {
    double boundary = (nx > x) ? std::floor(nx) : std::ceil(nx);
    nx = (nx > x) ? boundary - kWallMargin : boundary + kWallMargin;
    if (!is_free(nx, y)) nx = x;  // diagonal corner case: stay put
    state_.velocity[0] = 0.0;
  }
  double ny = y + state_.velocity[1] * cfg_.dt;
  if (!is_free(nx, ny)) {
    double boundary = (ny > y) ? std::floor(ny) : std::ceil(ny);
    ny = (ny > y) ? boundary - kWallMargin : boundary + kWallMargin;
    if (!is_free(nx, ny)) ny = y;
    state_.velocity[1] = 0.0;
  }
  state_.position = {nx, ny};
  state_.step_count += 1;

  double dx = nx - state_.goal[0], dy = ny - state_.goal[1];
  StepResult r;
  r.state = observation();
  r.reached = std::sqrt(dx * dx + dy * dy) <= cfg_.goal_tolerance;
  r.done = r.reached || state_.step_count >= cfg_.max_episode_steps;
  return r;
}

StateVec MazeEnv::goal() const {
  // Full-state goal: target position with zero velocity.
  return {state_.goal[0], state_.goal[1], 0.0, 0.0};
}

AvoidBox MazeEnv::circle_to_box(const StateVec& center, double radius) const {
  // Circumscribing box on the position dims; velocity dims span their full
  // range so membership depends on position only.
  AvoidBox b;
  b.lower = {center[0] - radius, center[1] - radius, -cfg_.v_max, -cfg_.v_max};
  b.upper = {center[0] + radius, center[1] + radius, cfg_.v_max, cfg_.v_max};
  return b;
}

std::vector<AvoidBox> MazeEnv::episode_avoid_boxes() const {
  std::vector<AvoidBox> boxes;
  boxes.reserve(state_.avoid_circles.size());
  for (const auto& [c, r] : state_.avoid_circles) boxes.push_back(circle_to_box(c, r));
  return boxes;
}

ActionVec MazeEnv::sample_random_action(Rng& rng) const {
  return {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
}

}  // namespace radt
