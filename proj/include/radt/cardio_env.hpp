#pragma once

#include <memory>
#include <optional>

#include "radt/boolean_network.hpp"
#include "radt/env.hpp"

namespace radt {

/// Cell-reprogramming environment over a Boolean gene network. An action is
/// a one-hot gene perturbation; the network then settles through k
/// asynchronous updates. Transitions are stochastic via the update order.
struct CardioConfig {
  int k_updates = 10;
  int max_episode_steps = 30;
  std::string goal_bits = "000010010100000";  // FHF
  /// When set, every episode starts here instead of a random attractor.
  std::optional<std::string> fixed_start_bits;
};

struct CardioEnvState {
  GeneState genes;
  GeneState goal;
  int step_count = 0;
};

class CardioEnv final : public Env {
 public:
  CardioEnv(std::shared_ptr<const BooleanNetwork> net, CardioConfig cfg = {});

  const EnvSpec& spec() const override { return spec_; }
  StateVec reset(std::uint64_t seed) override;
  StepResult step(const ActionVec& action) override;
  StateVec goal() const override;
  std::vector<AvoidBox> episode_avoid_boxes() const override { return {}; }
  ActionVec sample_random_action(Rng& rng) const override;
  bool stream_data() const override { return true; }

  const CardioEnvState& env_state() const { return state_; }
  const BooleanNetwork& network() const { return *net_; }
  const CardioConfig& config() const { return cfg_; }

  void set_fixed_start(std::optional<std::string> bits) {
    cfg_.fixed_start_bits = std::move(bits);
  }

  static StateVec to_state_vec(const GeneState& g);
  static GeneState to_gene_state(const StateVec& s);
  /// Index of the perturbed gene encoded by an action vector (argmax).
  static int action_gene(const ActionVec& a);

 private:
  std::shared_ptr<const BooleanNetwork> net_;
  CardioConfig cfg_;
  EnvSpec spec_;
  CardioEnvState state_;
  std::vector<GeneState> attractors_;  // start-state pool
  Rng transition_rng_{0};
};

}  // namespace radt
