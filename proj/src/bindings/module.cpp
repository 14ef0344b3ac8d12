#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "radt/config.hpp"
#include "radt/dataset_io.hpp"
#include "radt/eval.hpp"

namespace py = pybind11;
using namespace radt;

namespace {

PromptSpec make_prompt(int z, const std::vector<std::pair<StateVec, StateVec>>& boxes,
                       const StateVec& goal) {
  PromptSpec p;
  p.z = z;
  for (const auto& [lo, hi] : boxes) p.avoid_boxes.push_back({lo, hi});
  p.goal = goal;
  return p;
}

}  // namespace

PYBIND11_MODULE(_radt, m) {
  m.doc() = "reach-avoid decision transformer core";

  py::register_exception<Error>(m, "RadtError");

  py::class_<AvoidBox>(m, "AvoidBox")
      .def(py::init([](StateVec lo, StateVec hi) {
             return AvoidBox{std::move(lo), std::move(hi)};
           }),
           py::arg("lower"), py::arg("upper"))
      .def_readonly("lower", &AvoidBox::lower)
      .def_readonly("upper", &AvoidBox::upper)
      .def("coordinate_vector", &AvoidBox::coordinate_vector);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init([](std::vector<StateVec> states, std::vector<ActionVec> actions) {
             Trajectory t;
             t.states = std::move(states);
             t.actions = std::move(actions);
             return t;
           }),
           py::arg("states"), py::arg("actions"))
      .def_readonly("states", &Trajectory::states)
      .def_readonly("actions", &Trajectory::actions)
      .def("__len__", &Trajectory::length);

  m.def("box_from_centroid",
        [](const StateVec& c, double w) { return box_from_centroid(c, w); },
        py::arg("centroid"), py::arg("width"));
  m.def("box_contains",
        [](const AvoidBox& b, const StateVec& s) { return box_contains(b, s); },
        py::arg("box"), py::arg("state"));
  m.def("avoid_success", &avoid_success, py::arg("trajectory"), py::arg("boxes"));
  m.def("per_step_violation",
        [](const Trajectory& t, const std::vector<AvoidBox>& boxes) {
          auto v = per_step_violation(t, boxes);
          return std::vector<int>(v.begin(), v.end());
        },
        py::arg("trajectory"), py::arg("boxes"));

  m.def("step_cost", &eval::step_cost, py::arg("state"), py::arg("boxes"));
  m.def("mnc", &eval::mnc, py::arg("trajectory"), py::arg("boxes"));
  m.def("percent_visited", &eval::percent_visited, py::arg("trajectories"),
        py::arg("state"));
  m.def("collapse_trajectory", &eval::collapse_trajectory, py::arg("trajectory"));

  py::class_<HullDecomposition>(m, "HullDecomposition")
      .def_property_readonly("convex_points",
                             [](const HullDecomposition& d) {
                               std::vector<std::pair<double, double>> out;
                               for (auto& p : d.convex_points) out.push_back({p.x, p.y});
                               return out;
                             })
      .def_property_readonly("concave_points",
                             [](const HullDecomposition& d) {
                               std::vector<std::pair<double, double>> out;
                               for (auto& p : d.concave_points) out.push_back({p.x, p.y});
                               return out;
                             })
      .def_property_readonly("nooks", [](const HullDecomposition& d) {
        py::list out;
        for (const auto& nook : d.nooks) {
          py::dict nd;
          nd["border_a"] = std::make_pair(nook.border_a.x, nook.border_a.y);
          nd["border_b"] = std::make_pair(nook.border_b.x, nook.border_b.y);
          std::vector<std::pair<double, double>> members;
          for (auto& p : nook.members) members.push_back({p.x, p.y});
          nd["members"] = members;
          out.append(nd);
        }
        return out;
      });

  m.def("hull_decompose",
        [](const std::vector<std::pair<double, double>>& pts) {
          std::vector<Point2> p;
          for (auto& [x, y] : pts) p.push_back({x, y});
          return hull_decompose(p);
        },
        py::arg("points"));

  // Environments through the common episodic interface.
  py::class_<StepResult>(m, "StepResult")
      .def_readonly("state", &StepResult::state)
      .def_readonly("reached", &StepResult::reached)
      .def_readonly("done", &StepResult::done);

  py::class_<Env>(m, "Env")
      .def("reset", &Env::reset, py::arg("seed"))
      .def("step", &Env::step, py::arg("action"))
      .def("goal", &Env::goal)
      .def("episode_avoid_boxes", &Env::episode_avoid_boxes)
      .def_property_readonly("env_id",
                             [](const Env& e) { return e.spec().env_id; })
      .def_property_readonly("d_s", [](const Env& e) { return e.spec().d_s; })
      .def_property_readonly("d_a", [](const Env& e) { return e.spec().d_a; })
      .def_property_readonly("max_episode_steps",
                             [](const Env& e) { return e.spec().max_episode_steps; });

  m.def("make_env",
        [](const std::string& env_id, const std::string& rules_file) {
          RunConfig cfg = RunConfig::defaults("desk", env_id);
          if (!rules_file.empty()) cfg.rules_file = rules_file;
          cfg.finalize();
          return std::unique_ptr<Env>(cfg.make_env());
        },
        py::arg("env_id"), py::arg("rules_file") = "");

  m.def("random_rollout",
        [](Env& env, std::uint64_t seed, int n_steps) {
          return random_rollout(env, seed, n_steps);
        },
        py::arg("env"), py::arg("seed"), py::arg("n_steps"));

  // End-to-end pipeline pieces driven by a config file.
  m.def("relabel_dataset",
        [](const std::string& config_path, const std::string& profile,
           const std::vector<Trajectory>& trajs, std::uint64_t seed) {
          RunConfig cfg = RunConfig::load(config_path, profile);
          auto env = cfg.make_env();
          std::function<bool(double, double)> region;
          if (cfg.relabel.sampler == SamplerKind::restricted)
            region = [](double x, double y) { return MazeEnv::is_free(x, y); };
          auto sampler = make_sampler(cfg.relabel, env->spec(), trajs, region);
          auto [paired, report] =
              build_paired_dataset(trajs, *sampler, cfg.relabel, seed);
          py::list out;
          for (const auto& pr : paired.pairs) {
            py::dict d;
            d["z_orig"] = pr.orig.prompt.z;
            d["z_copy"] = pr.copy.prompt.z;
            d["goal"] = pr.orig.prompt.goal;
            out.append(d);
          }
          return py::make_tuple(out, report.to_json());
        },
        py::arg("config_path"), py::arg("profile"), py::arg("trajectories"),
        py::arg("seed"));

  m.def("load_checkpoint_predict",
        [](const std::string& checkpoint, int z,
           const std::vector<std::pair<StateVec, StateVec>>& boxes,
           const StateVec& goal, const std::vector<StateVec>& history_states,
           const std::vector<ActionVec>& history_actions, const StateVec& state) {
          nn::ModelParams params = nn::load_checkpoint(checkpoint);
          PromptSpec prompt = make_prompt(z, boxes, goal);
          return nn::predict_action(params, prompt, history_states,
                                    history_actions, state);
        },
        py::arg("checkpoint"), py::arg("z"), py::arg("boxes"), py::arg("goal"),
        py::arg("history_states"), py::arg("history_actions"), py::arg("state"));

  m.def("tool_version", [] { return std::string(kToolVersion); });
}
