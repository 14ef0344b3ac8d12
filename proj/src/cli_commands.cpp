#include "radt/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "radt/dataset_io.hpp"
#include "radt/eval.hpp"

namespace fs = std::filesystem;

namespace radt::cli {

namespace {

DatasetHeader make_header(const RunConfig& cfg, int d_s, int d_a) {
  DatasetHeader h;
  h.d_s = d_s;
  h.d_a = d_a;
  h.env = cfg.env_id;
  h.tool_version = kToolVersion;
  h.config_hash = cfg.config_hash();
  h.seed = cfg.seed;
  return h;
}

nlohmann::json manifest(const RunConfig& cfg) {
  return {{"tool_version", kToolVersion},
          {"config_hash", cfg.config_hash()},
          {"seed", cfg.seed}};
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::unique_ptr<BoxSampler> sampler_for(const RunConfig& cfg, const Env& env,
                                        const std::vector<Trajectory>& trajs) {
  std::function<bool(double, double)> region;
  if (cfg.relabel.sampler == SamplerKind::restricted) {
    if (cfg.env_id != "maze")
      throw ConfigError("restricted sampler is only wired to the maze env");
    region = [](double x, double y) { return MazeEnv::is_free(x, y); };
  }
  return make_sampler(cfg.relabel, env.spec(), trajs, region);
}

}  // namespace

std::vector<double> parse_sweep(const std::string& text, double default_step) {
  std::vector<double> out;
  auto dots = text.find("..");
  if (dots != std::string::npos) {
    double lo = std::stod(text.substr(0, dots));
    std::string rest = text.substr(dots + 2);
    double step = default_step;
    if (auto colon = rest.find(':'); colon != std::string::npos) {
      step = std::stod(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    double hi = std::stod(rest);
    if (step <= 0) throw ConfigError("sweep step must be positive");
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(v);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  if (out.empty()) throw ConfigError("empty sweep: " + text);
  return out;
}


int cmd_gen_data(const RunConfig& cfg) {
  auto env = cfg.make_env();
  auto trajs = random_rollout(*env, Rng::derive_seed(cfg.seed, "gen-data"),
                              static_cast<int>(cfg.data_n_steps));
  RawDataset ds;
  ds.header = make_header(cfg, env->spec().d_s, env->spec().d_a);
  ds.trajectories = std::move(trajs);
  fs::create_directories(cfg.out);
  const std::string path = (fs::path(cfg.out) / "raw_dataset.jsonl").string();
  write_raw_dataset(path, ds);
  nlohmann::json m = manifest(cfg);
  m["n_steps"] = cfg.data_n_steps;
  m["n_trajectories"] = ds.trajectories.size();
  write_text(fs::path(cfg.out) / "gen_data_manifest.json", m.dump(2));
  std::cout << "wrote " << ds.trajectories.size() << " trajectories ("
            << ds.total_steps() << " steps) to " << path << "\n";
  return 0;
}

int cmd_relabel(const RunConfig& cfg, const std::string& in_path, bool verify) {
  RawDataset raw = read_raw_dataset(in_path);
  if (raw.header.env != cfg.env_id)
    throw SchemaError("dataset env '" + raw.header.env +
                      "' does not match config env '" + cfg.env_id + "'");
  auto env = cfg.make_env();
  if (raw.header.d_s != env->spec().d_s || raw.header.d_a != env->spec().d_a)
    throw SchemaError("dataset dimensions do not match the configured env");
  auto sampler = sampler_for(cfg, *env, raw.trajectories);
  auto [paired, report] = build_paired_dataset(
      raw.trajectories, *sampler, cfg.relabel,
      Rng::derive_seed(cfg.seed, "relabel"));
  if (verify) {
    long long bad = verify_pairing(paired);
    if (bad >= 0) throw StateError("pairing invariant violated at pair " +
                                   std::to_string(bad));
    std::cout << "pairing invariant verified on " << paired.size() << " pairs\n";
  }
  PairedDatasetFile out;
  out.header = make_header(cfg, raw.header.d_s, raw.header.d_a);
  out.data = std::move(paired);
  fs::create_directories(cfg.out);
  const std::string path = (fs::path(cfg.out) / "paired_dataset.jsonl").string();
  write_paired_dataset(path, out);
  nlohmann::json rj = nlohmann::json::parse(report.to_json());
  rj["manifest"] = manifest(cfg);
  write_text(fs::path(cfg.out) / "relabel_report.json", rj.dump(2));
  std::cout << "wrote " << out.data.size() << " pairs to " << path
            << " (dropped " << report.dropped_count << ", first-pass z1 "
            << report.first_pass_z1_fraction << ")\n";
  return 0;
}

int cmd_train(const RunConfig& cfg, const std::string& data_path,
              const std::string& resume_from) {
  PairedDatasetFile data = read_paired_dataset(data_path);
  if (data.header.d_s != cfg.model.d_s || data.header.d_a != cfg.model.d_a)
    throw SchemaError("dataset dimensions do not match the model config");
  Rng init_rng(Rng::derive_seed(cfg.seed, "model-init"));
  nn::ModelParams params = nn::ModelParams::init(cfg.model, init_rng);

  auto env = cfg.make_env();
  train::EvalFn eval_fn = [&](nn::ModelParams& snapshot, long long step) {
    eval::ModelPolicy policy(snapshot);
    eval::EvalConfig ecfg;
    ecfg.n_episodes = cfg.train_cfg.eval_episodes;
    ecfg.seed = Rng::derive_seed(cfg.seed, "train-eval", step);
    eval::EvalReport r = eval::evaluate(*env, policy, ecfg);
    std::cout << "step " << step << ": sr=" << r.sr << " mnc=" << r.mnc
              << std::endl;
    return std::make_pair(r.sr, r.mnc);
  };

  train::TrainOptions opts;
  opts.out_dir = cfg.out;
  opts.seed = cfg.seed;
  if (!resume_from.empty()) opts.resume_from = resume_from;
  train::TrainResult result =
      train::train_loop(data, params, cfg.train_cfg, eval_fn, opts);

  auto best = train::select_checkpoint(result.records);
  nlohmann::json sj{{"step", best.step},
                    {"path", best.path},
                    {"sr", best.sr},
                    {"mnc", best.mnc},
                    {"manifest", manifest(cfg)}};
  write_text(fs::path(cfg.out) / "selected.json", sj.dump(2));
  std::cout << "selected checkpoint: step " << best.step << " (sr=" << best.sr
            << ", mnc=" << best.mnc << ")\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& widths_arg, const std::string& n_avoid_arg,
             int n_seeds, const std::string& policy_kind) {
  nn::ModelParams params = nn::load_checkpoint(checkpoint_path);
  if (params.cfg.d_s != cfg.model.d_s || params.cfg.d_a != cfg.model.d_a)
    throw SchemaError("checkpoint dimensions are incompatible with the env");

  std::vector<double> widths =
      widths_arg.empty() ? std::vector<double>{-1.0} : parse_sweep(widths_arg, 0.02);
  std::vector<double> counts =
      n_avoid_arg.empty() ? std::vector<double>{-1.0} : parse_sweep(n_avoid_arg, 1.0);

  fs::create_directories(cfg.out);
  nlohmann::json summary = nlohmann::json::array();
  for (double w : widths) {
    for (double nc : counts) {
      RunConfig run = cfg;  // zero-shot overrides: no retraining involved
      if (w > 0) run.reach.box_width = w;
      if (nc > 0) {
        run.reach.n_avoid = static_cast<int>(nc);
        run.maze.n_avoid = static_cast<int>(nc);
      }
      std::vector<double> srs, mncs;
      for (int s = 0; s < n_seeds; ++s) {
        auto env = run.make_env();
        eval::EvalConfig ecfg;
        ecfg.n_episodes = run.eval_cfg.n_episodes;
        ecfg.seed = Rng::derive_seed(run.seed, "cli-eval", s);

        std::optional<std::vector<AvoidBox>> override_boxes;
        eval::EvalReport report;
        if (policy_kind == "random") {
          eval::RandomPolicy policy(*env);
          report = eval::evaluate(*env, policy, ecfg, override_boxes);
        } else {
          eval::ModelPolicy policy(params);
          report = eval::evaluate(*env, policy, ecfg, override_boxes);
        }

        std::string tag = "eval";
        if (w > 0) tag += "_w" + std::to_string(w).substr(0, 4);
        if (nc > 0) tag += "_n" + std::to_string(static_cast<int>(nc));
        tag += "_s" + std::to_string(s);
        nlohmann::json rj = nlohmann::json::parse(report.to_json());
        rj["manifest"] = manifest(run);
        rj["axis"] = {{"box_width", w > 0 ? nlohmann::json(w) : nlohmann::json()},
                      {"n_avoid", nc > 0 ? nlohmann::json(static_cast<int>(nc))
                                         : nlohmann::json()}};
        rj["seed"] = s;
        rj["policy"] = policy_kind;
        write_text(fs::path(run.out) / (tag + ".json"), rj.dump(2));
        write_text(fs::path(run.out) / (tag + ".csv"), report.to_csv());
        srs.push_back(report.sr);
        mncs.push_back(report.mnc);
      }
      auto mean = [](const std::vector<double>& v) {
        double a = 0;
        for (double x : v) a += x;
        return a / v.size();
      };
      auto stddev = [&](const std::vector<double>& v) {
        double m = mean(v), a = 0;
        for (double x : v) a += (x - m) * (x - m);
        return v.size() > 1 ? std::sqrt(a / (v.size() - 1)) : 0.0;
      };
      summary.push_back({{"box_width", w > 0 ? nlohmann::json(w) : nlohmann::json()},
                         {"n_avoid", nc > 0 ? nlohmann::json(static_cast<int>(nc))
                                            : nlohmann::json()},
                         {"seeds", n_seeds},
                         {"sr_mean", mean(srs)},
                         {"sr_std", stddev(srs)},
                         {"mnc_mean", mean(mncs)},
                         {"mnc_std", stddev(mncs)}});
      std::cout << "eval w=" << w << " n_avoid=" << nc
                << ": sr=" << mean(srs) << "±" << stddev(srs)
                << " mnc=" << mean(mncs) << "±" << stddev(mncs) << "\n";
    }
  }
  write_text(fs::path(cfg.out) / "eval_summary.json", summary.dump(2));
  return 0;
}

int cmd_cardio_study(const RunConfig& cfg, const std::string& checkpoint_path,
                     const std::string& avoid_state,
                     const std::string& start_state, int episodes) {
  if (cfg.env_id != "cardio")
    throw ConfigError("cardio-study requires env.id = cardio");
  auto net = cfg.load_network();
  if (!avoid_state.empty() &&
      static_cast<int>(avoid_state.size()) != net->n_genes())
    throw ConfigError("--avoid-state must be a bitstring of length " +
                      std::to_string(net->n_genes()));
  if (!start_state.empty() &&
      static_cast<int>(start_state.size()) != net->n_genes())
    throw ConfigError("--start-state must be a bitstring of length " +
                      std::to_string(net->n_genes()));

  CardioConfig ccfg = cfg.cardio;
  if (!start_state.empty()) {
    ccfg.fixed_start_bits = start_state;
  } else if (!ccfg.fixed_start_bits) {
    // Deterministic default: lexicographically smallest attractor != goal.
    auto attractors = net->enumerate_attractors();
    GeneState goal = net->from_bitstring(ccfg.goal_bits);
    std::string best;
    for (const auto& a : attractors) {
      if (a == goal) continue;
      std::string bits = net->to_bitstring(a);
      if (best.empty() || bits < best) best = bits;
    }
    if (best.empty()) throw StateError("no start attractor besides the goal");
    ccfg.fixed_start_bits = best;
  }
  CardioEnv env(net, ccfg);

  nn::ModelParams params = nn::load_checkpoint(checkpoint_path);
  if (params.cfg.d_s != env.spec().d_s)
    throw SchemaError("checkpoint dimensions are incompatible with the env");
  eval::ModelPolicy policy(params);

  eval::CaseStudyConfig scfg;
  scfg.n_episodes = episodes > 0 ? episodes : cfg.eval_cfg.n_episodes;
  scfg.seed = Rng::derive_seed(cfg.seed, "cardio-study");
  scfg.epsilon = cfg.relabel.epsilon;
  if (!avoid_state.empty()) scfg.avoid_state_bits = avoid_state;

  eval::CaseStudyReport report = eval::cardio_case_study(env, policy, scfg);
  fs::create_directories(cfg.out);
  nlohmann::json rj = nlohmann::json::parse(report.to_json());
  rj["manifest"] = manifest(cfg);
  rj["start_state"] = *ccfg.fixed_start_bits;
  rj["goal_state"] = ccfg.goal_bits;
  write_text(fs::path(cfg.out) / "cardio_study.json", rj.dump(2));
  write_text(fs::path(cfg.out) / "cardio_study.txt", report.summary_table());
  std::cout << report.summary_table();
  return 0;
}

int cmd_export_metrics(const std::string& reports_dir, const std::string& out_csv) {
  std::ofstream out(out_csv);
  if (!out) throw Error("cannot write " + out_csv);
  out << "run,box_width,n_avoid,seed,sr,mnc\n";
  if (!fs::exists(reports_dir)) return 0;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(reports_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json" &&
        entry.path().filename().string().rfind("eval", 0) == 0 &&
        entry.path().filename() != "eval_summary.json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("sr")) continue;
    std::string run = f.parent_path().filename().string();
    auto axis = j.value("axis", nlohmann::json::object());
    auto field = [&](const char* k) -> std::string {
      if (!axis.contains(k) || axis.at(k).is_null()) return "";
      std::ostringstream ss;
      ss << axis.at(k);
      return ss.str();
    };
    out << run << ',' << field("box_width") << ',' << field("n_avoid") << ','
        << j.value("seed", 0) << ',' << j.at("sr").get<double>() << ','
        << j.at("mnc").get<double>() << '\n';
  }
  return 0;
}


}  // namespace radt::cli
