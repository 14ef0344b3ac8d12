#pragma once

#include <optional>
#include <string>
#include <vector>

#include "radt/cardio_env.hpp"
#include "radt/env.hpp"
#include "radt/model.hpp"

namespace radt::eval {

struct EvalConfig {
  int n_episodes = 60;
  std::uint64_t seed = 0;
};

/// Action source for rollouts; the model-backed policy is one instance,
/// random and scripted baselines are others.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(std::uint64_t /*seed*/) {}
  virtual ActionVec act(const PromptSpec& prompt,
                        const std::vector<StateVec>& history_states,
                        const std::vector<ActionVec>& history_actions,
                        const StateVec& current_state) = 0;
};

class ModelPolicy final : public Policy {
 public:
  explicit ModelPolicy(nn::ModelParams& params) : params_(&params) {}
  ActionVec act(const PromptSpec& prompt,
                const std::vector<StateVec>& history_states,
                const std::vector<ActionVec>& history_actions,
                const StateVec& current_state) override {
    return nn::predict_action(*params_, prompt, history_states, history_actions,
                              current_state);
  }

 private:
  nn::ModelParams* params_;
};

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(const Env& env) : env_(&env), rng_(0) {}
  void begin_episode(std::uint64_t seed) override {
    rng_ = Rng(Rng::derive_seed(seed, "random-policy"));
  }
  ActionVec act(const PromptSpec&, const std::vector<StateVec>&,
                const std::vector<ActionVec>&, const StateVec&) override {
    return env_->sample_random_action(rng_);
  }

 private:
  const Env* env_;
  Rng rng_;
};

/// 1 iff the arrived state is inside any avoid box.
int step_cost(const StateVec& s_next, const std::vector<AvoidBox>& boxes);

/// Length-normalized cost: mean step cost over the trajectory's transitions
/// (the arrival states s_2..s_T; the initial state contributes none).
double mnc(const Trajectory& traj, const std::vector<AvoidBox>& boxes);

struct RolloutResult {
  Trajectory trajectory;  // arrival states included; the final action is the
                          // policy's prediction at the terminal state
  bool reached = false;
  PromptSpec prompt;      // always built with z = 1
};

/// One evaluation episode: reset, build the z=1 prompt from the episode's
/// goal and avoid boxes, act until done.
RolloutResult rollout(Env& env, Policy& policy, std::uint64_t seed,
                      const std::optional<std::vector<AvoidBox>>& avoid_override =
                          std::nullopt);

struct EpisodeRecord {
  int env_steps = 0;
  double cost = 0.0;  // per-episode MNC
  bool reached = false;
  int n_boxes = 0;
};

struct EvalReport {
  double sr = 0.0;
  double mnc = 0.0;  // mean over episodes
  std::vector<EpisodeRecord> episodes;

  std::string to_json() const;
  std::string to_csv() const;
};

EvalReport evaluate(Env& env, Policy& policy, const EvalConfig& cfg,
                    const std::optional<std::vector<AvoidBox>>& avoid_override =
                        std::nullopt);

/// Fraction of trajectories containing the state (exact match).
double percent_visited(const std::vector<Trajectory>& trajs, const StateVec& s);

/// Consecutive duplicate states merged.
std::vector<StateVec> collapse_trajectory(const Trajectory& traj);

struct CaseStudyPhase {
  double percent_visited = 0.0;
  double mean_collapsed_states = 0.0;
  double mean_uncollapsed_states = 0.0;
  double mean_env_steps = 0.0;
  double mean_steps_inside = 0.0;
  double reach_rate = 0.0;
};

struct CaseStudyReport {
  std::string avoid_state_bits;
  bool avoid_phase_ran = false;  // false when no intermediate state was visited
  CaseStudyPhase before;  // no avoid token
  CaseStudyPhase after;   // the chosen state as an epsilon-box avoid token

  std::string to_json() const;
  std::string summary_table() const;
};

struct CaseStudyConfig {
  int n_episodes = 200;
  std::uint64_t seed = 0;
  double epsilon = 0.001;
  /// Bypass phase-1 ranking and use this state as the avoid token (supports
  /// targeting the start state).
  std::optional<std::string> avoid_state_bits;
};

/// The avoid-token case study: run without avoid tokens, find the most
/// visited intermediate state (start and goal excluded; ties prefer the
/// state first visited earliest on average), re-run with that state as an
/// epsilon-box avoid token, and report visitation/length shifts.
CaseStudyReport cardio_case_study(CardioEnv& env, Policy& policy,
                                  const CaseStudyConfig& cfg);

}  // namespace radt::eval
