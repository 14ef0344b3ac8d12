#include "radt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json.hpp"

namespace radt::eval {

int step_cost(const StateVec& s_next, const std::vector<AvoidBox>& boxes) {
  for (const auto& b : boxes)
    if (box_contains(b, s_next)) return 1;
  return 0;
}

double mnc(const Trajectory& traj, const std::vector<AvoidBox>& boxes) {
  const std::size_t T = traj.length();
  if (T < 1) throw ArgumentError("mnc: empty trajectory");
  if (T == 1) return 0.0;  // no transitions
  int acc = 0;
  for (std::size_t t = 1; t < T; ++t) acc += step_cost(traj.states[t], boxes);
  return static_cast<double>(acc) / static_cast<double>(T - 1);
}

RolloutResult rollout(Env& env, Policy& policy, std::uint64_t seed,
                      const std::optional<std::vector<AvoidBox>>& avoid_override) {
  RolloutResult out;
  StateVec s = env.reset(seed);
  policy.begin_episode(seed);
  out.prompt.z = 1;  // evaluation always conditions on avoid success
  out.prompt.goal = env.goal();
  out.prompt.avoid_boxes =
      avoid_override ? *avoid_override : env.episode_avoid_boxes();

  Trajectory& traj = out.trajectory;
  traj.meta = {seed, env.spec().env_id};
  bool done = false;
  while (!done) {
    ActionVec a = policy.act(out.prompt, traj.states, traj.actions, s);
    traj.states.push_back(s);
    traj.actions.push_back(a);
    StepResult r = env.step(a);
    s = std::move(r.state);
    out.reached = r.reached;
    done = r.done;
  }
  // Keep the arrival state; its action is predicted but never executed, so
  // state/action counts stay matched.
  traj.states.push_back(s);
  traj.actions.push_back(policy.act(out.prompt,
                                    {traj.states.begin(), traj.states.end() - 1},
                                    traj.actions, s));
  return out;
}

EvalReport evaluate(Env& env, Policy& policy, const EvalConfig& cfg,
                    const std::optional<std::vector<AvoidBox>>& avoid_override) {
  if (cfg.n_episodes < 1) throw ArgumentError("n_episodes must be >= 1");
  EvalReport report;
  double sr_acc = 0.0, mnc_acc = 0.0;
  for (int i = 0; i < cfg.n_episodes; ++i) {
    std::uint64_t ep_seed = Rng::derive_seed(cfg.seed, "eval-episode", i);
    RolloutResult r = rollout(env, policy, ep_seed, avoid_override);
    EpisodeRecord rec;
    rec.env_steps = static_cast<int>(r.trajectory.length()) - 1;
    rec.cost = mnc(r.trajectory, r.prompt.avoid_boxes);
    rec.reached = r.reached;
    rec.n_boxes = static_cast<int>(r.prompt.avoid_boxes.size());
    sr_acc += rec.reached ? 1.0 : 0.0;
    mnc_acc += rec.cost;
    report.episodes.push_back(rec);
  }
  report.sr = sr_acc / cfg.n_episodes;
  report.mnc = mnc_acc / cfg.n_episodes;
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["sr"] = sr;
  j["mnc"] = mnc;
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& e : episodes)
    eps.push_back({{"env_steps", e.env_steps},
                   {"cost", e.cost},
                   {"reached", e.reached},
                   {"n_boxes", e.n_boxes}});
  j["episodes"] = std::move(eps);
  return j.dump(2);
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "episode,env_steps,cost,reached,n_boxes\n";
  for (std::size_t i = 0; i < episodes.size(); ++i)
    out << i << ',' << episodes[i].env_steps << ',' << episodes[i].cost << ','
        << (episodes[i].reached ? 1 : 0) << ',' << episodes[i].n_boxes << '\n';
  return out.str();
}

double percent_visited(const std::vector<Trajectory>& trajs, const StateVec& s) {
  if (trajs.empty()) throw ArgumentError("percent_visited: no trajectories");
  std::size_t hits = 0;
  for (const auto& t : trajs)
    if (std::find(t.states.begin(), t.states.end(), s) != t.states.end()) ++hits;
  return static_cast<double>(hits) / static_cast<double>(trajs.size());
}

std::vector<StateVec> collapse_trajectory(const Trajectory& traj) {
  std::vector<StateVec> out;
  for (const auto& s : traj.states)
    if (out.empty() || !(out.back() == s)) out.push_back(s);
  return out;
}

namespace {

CaseStudyPhase phase_stats(const std::vector<RolloutResult>& results,
                           const StateVec& avoid_state) {
  CaseStudyPhase p;
  std::vector<Trajectory> trajs;
  for (const auto& r : results) trajs.push_back(r.trajectory);
  p.percent_visited = percent_visited(trajs, avoid_state);
  double collapsed = 0.0, uncollapsed = 0.0, steps = 0.0, inside = 0.0,
         reached = 0.0;
  for (const auto& r : results) {
    collapsed += static_cast<double>(collapse_trajectory(r.trajectory).size());
    uncollapsed += static_cast<double>(r.trajectory.length());
    steps += static_cast<double>(r.trajectory.length()) - 1.0;
    inside += static_cast<double>(
        std::count(r.trajectory.states.begin(), r.trajectory.states.end(),
                   avoid_state));
    reached += r.reached ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(results.size());
  p.mean_collapsed_states = collapsed / n;
  p.mean_uncollapsed_states = uncollapsed / n;
  p.mean_env_steps = steps / n;
  p.mean_steps_inside = inside / n;
  p.reach_rate = reached / n;
  return p;
}

}  // namespace

CaseStudyReport cardio_case_study(CardioEnv& env, Policy& policy,
                                  const CaseStudyConfig& cfg) {
  if (cfg.n_episodes < 1) throw ArgumentError("n_episodes must be >= 1");
  const auto& net = env.network();

  // Phase 1: no avoid tokens.
  std::vector<RolloutResult> before;
  before.reserve(cfg.n_episodes);
  for (int i = 0; i < cfg.n_episodes; ++i) {
    std::uint64_t seed = Rng::derive_seed(cfg.seed, "case-phase1", i);
    before.push_back(rollout(env, policy, seed, std::vector<AvoidBox>{}));
  }

  StateVec start = before.front().trajectory.states.front();
  StateVec goal = env.goal();

  CaseStudyReport report;
  StateVec avoid_state;
  if (cfg.avoid_state_bits) {
    avoid_state = CardioEnv::to_state_vec(net.from_bitstring(*cfg.avoid_state_bits));
  } else {
    // Most visited intermediate state: start and goal excluded; ties go to
    // the state whose first visit happens earliest on average, then to the
    // lexicographically smaller bitstring.
    std::map<StateVec, std::pair<int, double>> stats;  // visits, sum first idx
    for (const auto& r : before) {
      std::map<StateVec, std::size_t> first_idx;
      for (std::size_t t = 0; t < r.trajectory.states.size(); ++t) {
        const StateVec& s = r.trajectory.states[t];
        if (s == start || s == goal) continue;
        if (!first_idx.count(s)) first_idx[s] = t;
      }
      for (const auto& [s, idx] : first_idx) {
        auto& e = stats[s];
        e.first += 1;
        e.second += static_cast<double>(idx);
      }
    }
    if (stats.empty()) {
      report.avoid_phase_ran = false;
      report.before = phase_stats(before, goal);
      report.avoid_state_bits = "";
      return report;
    }
    const StateVec* best = nullptr;
    double best_visits = -1.0, best_mean_idx = 0.0;
    for (const auto& [s, e] : stats) {
      double mean_idx = e.second / e.first;
      bool better = e.first > best_visits ||
                    (e.first == best_visits && mean_idx < best_mean_idx);
      if (!best || better) {
        best = &s;
        best_visits = e.first;
        best_mean_idx = mean_idx;
      }
    }
    avoid_state = *best;
  }
  report.avoid_state_bits = net.to_bitstring(CardioEnv::to_gene_state(avoid_state));
  report.avoid_phase_ran = true;
  report.before = phase_stats(before, avoid_state);

  // Phase 2: the chosen state becomes an epsilon-box avoid token.
  std::vector<AvoidBox> avoid{box_from_centroid(avoid_state, 2.0 * cfg.epsilon)};
  std::vector<RolloutResult> after;
  after.reserve(cfg.n_episodes);
  for (int i = 0; i < cfg.n_episodes; ++i) {
    std::uint64_t seed = Rng::derive_seed(cfg.seed, "case-phase2", i);
    after.push_back(rollout(env, policy, seed, avoid));
  }
  report.after = phase_stats(after, avoid_state);
  return report;
}

namespace {
nlohmann::json phase_json(const CaseStudyPhase& p) {
  return {{"percent_visited", p.percent_visited},
          {"mean_collapsed_states", p.mean_collapsed_states},
          {"mean_uncollapsed_states", p.mean_uncollapsed_states},
          {"mean_env_steps", p.mean_env_steps},
          {"mean_steps_inside", p.mean_steps_inside},
          {"reach_rate", p.reach_rate}};
}
}  // namespace

std::string CaseStudyReport::to_json() const {
  nlohmann::json j;
  j["avoid_state"] = avoid_state_bits;
  j["avoid_phase_ran"] = avoid_phase_ran;
  j["before"] = phase_json(before);
  if (avoid_phase_ran) j["after"] = phase_json(after);
  return j.dump(2);
}

std::string CaseStudyReport::summary_table() const {
  std::ostringstream out;
  out << "avoid state: " << (avoid_state_bits.empty() ? "(none)" : avoid_state_bits)
      << "\n";
  out << "metric                     before      after\n";
  auto row = [&](const char* name, double b, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-25s %9.4f  %9.4f\n", name, b, a);
    out << buf;
  };
  row("percent_visited", before.percent_visited, after.percent_visited);
  row("mean_collapsed_states", before.mean_collapsed_states,
      after.mean_collapsed_states);
  row("mean_uncollapsed_states", before.mean_uncollapsed_states,
      after.mean_uncollapsed_states);
  row("mean_env_steps", before.mean_env_steps, after.mean_env_steps);
  row("mean_steps_inside", before.mean_steps_inside, after.mean_steps_inside);
  row("reach_rate", before.reach_rate, after.reach_rate);
  return out.str();
}

}  // namespace radt::eval
