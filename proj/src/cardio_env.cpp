#include "radt/cardio_env.hpp"

#include <algorithm>

namespace radt {

CardioEnv::CardioEnv(std::shared_ptr<const BooleanNetwork> net, CardioConfig cfg)
    : net_(std::move(net)), cfg_(std::move(cfg)) {
  spec_.env_id = "cardio";
  spec_.d_s = net_->n_genes();
  spec_.d_a = net_->n_genes();
  spec_.max_episode_steps = cfg_.max_episode_steps;
  spec_.goal_tolerance = 0.0;  // discrete: exact match
  spec_.state_bounds.assign(net_->n_genes(), {0.0, 1.0});
  state_.goal = net_->from_bitstring(cfg_.goal_bits);
  attractors_ = net_->enumerate_attractors();
}

StateVec CardioEnv::to_state_vec(const GeneState& g) {
  StateVec s(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) s[i] = g[i] ? 1.0 : 0.0;
  return s;
}

GeneState CardioEnv::to_gene_state(const StateVec& s) {
  GeneState g(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) g[i] = s[i] >= 0.5 ? 1 : 0;
  return g;
}

int CardioEnv::action_gene(const ActionVec& a) {
  if (a.empty()) throw ArgumentError("empty action");
  return static_cast<int>(std::max_element(a.begin(), a.end()) - a.begin());
}

StateVec CardioEnv::reset(std::uint64_t seed) {
  Rng rng(Rng::derive_seed(seed, "cardio-reset"));
  transition_rng_ = Rng(Rng::derive_seed(seed, "cardio-transitions"));
  if (cfg_.fixed_start_bits) {
    state_.genes = net_->from_bitstring(*cfg_.fixed_start_bits);
  } else {
    // Start states are drawn from the stable attractors, excluding the goal
    // (an episode starting at the goal would be over before it began).
    std::vector<const GeneState*> pool;
    for (const auto& a : attractors_)
      if (a != state_.goal) pool.push_back(&a);
    if (pool.empty()) throw StateError("no attractor start states besides the goal");
    state_.genes = *pool[rng.uniform_int(pool.size())];
  }
  state_.step_count = 0;
  return to_state_vec(state_.genes);
}

StepResult CardioEnv::step(const ActionVec& action) {
  if (static_cast<int>(action.size()) != spec_.d_a)
    throw ArgumentError("cardio action dimension mismatch");
  int gene = action_gene(action);
  state_.genes = cardio_step(*net_, state_.genes, gene, transition_rng_,
                             cfg_.k_updates);
  state_.step_count += 1;
  StepResult r;
  r.state = to_state_vec(state_.genes);
  r.reached = state_.genes == state_.goal;
  r.done = r.reached || state_.step_count >= cfg_.max_episode_steps;
  return r;
}

StateVec CardioEnv::goal() const { return to_state_vec(state_.goal); }

ActionVec CardioEnv::sample_random_action(Rng& rng) const {
  ActionVec a(spec_.d_a, 0.0);
  a[rng.uniform_int(static_cast<std::uint64_t>(spec_.d_a))] = 1.0;
  return a;
}

}  // namespace radt
