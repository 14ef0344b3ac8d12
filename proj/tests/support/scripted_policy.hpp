#pragma once

#include <map>
#include <set>
#include <vector>

#include "radt/boolean_network.hpp"
#include "radt/cardio_env.hpp"
#include "radt/eval.hpp"

namespace radt::test {

/// Oracle agent for small Boolean environments: enumerates the perturbation
/// graph by repeated sampling, then plans greedily. Action scoring is
/// lexicographic: lowest probability that the next state lands in an avoid
/// box, then shortest optimistic distance to the goal through states outside
/// the avoid set. Deterministic for a fixed construction seed.
class PlannerPolicy final : public eval::Policy {
 public:
  PlannerPolicy(const BooleanNetwork& net, int k_updates, const GeneState& goal,
                int samples_per_edge = 64)
      : net_(&net), goal_(goal) {
    const int n = net.n_genes();
    std::vector<GeneState> all;
    for (std::uint32_t code = 0; code < (1u << n); ++code) {
      GeneState s(n);
      for (int g = 0; g < n; ++g) s[g] = (code >> g) & 1u;
      all.push_back(std::move(s));
    }
    for (const auto& s : all) {
      for (int g = 0; g < n; ++g) {
        auto& outcomes = edges_[{s, g}];
        for (int rep = 0; rep < samples_per_edge; ++rep) {
          Rng rng(Rng::derive_seed(99, "planner-edge",
                                   (fnv1a64(net.to_bitstring(s)) << 8) ^
                                       (static_cast<std::uint64_t>(g) * 131 + rep)));
          GeneState next = cardio_step(net, s, g, rng, k_updates);
          outcomes[next] += 1;
        }
      }
    }
    states_ = std::move(all);
  }

  ActionVec act(const PromptSpec& prompt, const std::vector<StateVec>&,
                const std::vector<ActionVec>&,
                const StateVec& current_state) override {
    const int n = net_->n_genes();
    GeneState cur = CardioEnv::to_gene_state(current_state);
    std::set<GeneState> avoid;
    for (const auto& s : states_)
      for (const auto& box : prompt.avoid_boxes)
        if (box_contains(box, CardioEnv::to_state_vec(s))) avoid.insert(s);

    auto dist = distances(avoid);
    int best_gene = 0;
    double best_p_avoid = 2.0;
    double best_dist = 1e18;
    for (int g = 0; g < n; ++g) {
      const auto& outcomes = edges_.at({cur, g});
      int total = 0, hits = 0;
      double d = 1e18;
      for (const auto& [next, count] : outcomes) {
        total += count;
        if (avoid.count(next)) hits += count;
        auto it = dist.find(next);
        if (it != dist.end()) d = std::min(d, 1.0 + it->second);
      }
      double p_avoid = static_cast<double>(hits) / total;
      if (p_avoid < best_p_avoid - 1e-12 ||
          (std::abs(p_avoid - best_p_avoid) <= 1e-12 && d < best_dist)) {
        best_p_avoid = p_avoid;
        best_dist = d;
        best_gene = g;
      }
    }
    ActionVec a(n, 0.0);
    a[best_gene] = 1.0;
    return a;
  }

 private:
  /// Optimistic BFS distance to the goal; states in the avoid set cannot be
  /// traversed (the goal itself always can). Falls back to ignoring the
  /// avoid set when the goal is unreachable around it.
  std::map<GeneState, double> distances(const std::set<GeneState>& avoid) const {
    auto run = [&](bool respect_avoid) {
      std::map<GeneState, double> d;
      d[goal_] = 0.0;
      for (;;) {
        bool changed = false;
        for (const auto& s : states_) {
          if (respect_avoid && avoid.count(s) && s != goal_) continue;
          double best = d.count(s) ? d.at(s) : 1e18;
          for (int g = 0; g < net_->n_genes(); ++g) {
            const auto& outcomes = edges_.at({s, g});
            for (const auto& [next, count] : outcomes) {
              if (respect_avoid && avoid.count(next) && next != goal_) continue;
              auto it = d.find(next);
              if (it != d.end() && 1.0 + it->second < best) best = 1.0 + it->second;
            }
          }
          if (best < 1e17 && (!d.count(s) || best < d.at(s))) {
            d[s] = best;
            changed = true;
          }
        }
        if (!changed) break;
      }
      return d;
    };
    auto d = run(true);
    if (d.size() <= 1 && !avoid.empty()) return run(false);
    return d;
  }

  const BooleanNetwork* net_;
  GeneState goal_;
  std::vector<GeneState> states_;
  std::map<std::pair<GeneState, int>, std::map<GeneState, int>> edges_;
};

inline const char* kBypassableRules =
    "g0 := g0\n"
    "g1 := g1 AND g0\n"
    "g2 := g2\n";

inline const char* kBottleneckRules =
    "g0 := g0 OR g2\n"
    "g1 := g0 AND g2\n"
    "g2 := g2 AND g0\n";

}  // namespace radt::test
