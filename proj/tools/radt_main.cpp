#include <iostream>

#include "CLI11.hpp"
#include "radt/cli.hpp"

using namespace radt;

int main(int argc, char** argv) {
  CLI::App app{"reach-avoid decision transformer pipeline"};
  app.require_subcommand(1);

  std::string config_path, profile = "desk", out_override;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  app.add_option("--config", config_path, "run config file (JSON)");
  app.add_option("--profile", profile, "desk or paper defaults")
      ->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--seed", seed_override, "master seed override")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_option("--out", out_override, "output directory override");

  auto* gen = app.add_subcommand("gen-data", "random-policy dataset generation");
  long long steps_override = 0;
  std::string env_override;
  gen->add_option("--steps", steps_override, "timestep budget override");
  gen->add_option("--env", env_override, "env id when no config file is given")
      ->check(CLI::IsMember({"reach", "maze", "cardio"}));

  auto* rel = app.add_subcommand("relabel", "two-pass hindsight avoid relabeling");
  std::string rel_in;
  bool rel_verify = false;
  rel->add_option("--in", rel_in, "raw dataset (JSON Lines)")->required();
  rel->add_flag("--verify", rel_verify, "re-check the pairing invariant");

  auto* tr = app.add_subcommand("train", "train on a paired dataset");
  std::string train_data, resume_from;
  tr->add_option("--data", train_data, "paired dataset (JSON Lines)")->required();
  tr->add_option("--resume", resume_from, "checkpoint directory to resume from");

  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint (zero-shot sweeps)");
  std::string ev_ckpt, ev_widths, ev_navoid, ev_policy = "model";
  int ev_seeds = 1;
  ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  ev->add_option("--box-width", ev_widths,
                 "width sweep, e.g. 0.16..0.24 or 0.16,0.2");
  ev->add_option("--n-avoid", ev_navoid, "avoid-count sweep, e.g. 1..7");
  ev->add_option("--seeds", ev_seeds, "number of evaluation seeds");
  ev->add_option("--policy", ev_policy, "model or random")
      ->check(CLI::IsMember({"model", "random"}));

  auto* cs = app.add_subcommand("cardio-study", "avoid-token case study");
  std::string cs_ckpt, cs_avoid, cs_start;
  int cs_episodes = 0;
  cs->add_option("--checkpoint", cs_ckpt, "model checkpoint")->required();
  cs->add_option("--avoid-state", cs_avoid,
                 "bitstring override; bypasses phase-1 ranking");
  cs->add_option("--start-state", cs_start, "episode start bitstring");
  cs->add_option("--episodes", cs_episodes, "episodes per phase");

  auto* ex = app.add_subcommand("export-metrics", "flatten eval reports to CSV");
  std::string ex_dir, ex_csv;
  ex->add_option("--reports-dir", ex_dir, "directory of eval reports")->required();
  ex->add_option("--out-csv", ex_csv, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ex->parsed()) return cli::cmd_export_metrics(ex_dir, ex_csv);

    RunConfig cfg;
    try {
      if (!config_path.empty()) {
        cfg = RunConfig::load(config_path, profile);
      } else {
        cfg = RunConfig::defaults(profile,
                                  env_override.empty() ? "reach" : env_override);
      }
      if (seed_given) cfg.seed = seed_override;
      if (!out_override.empty()) cfg.out = out_override;
      if (steps_override > 0) cfg.data_n_steps = steps_override;
      cfg.finalize();
    } catch (const Error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }

    if (gen->parsed()) return cli::cmd_gen_data(cfg);
    if (rel->parsed()) return cli::cmd_relabel(cfg, rel_in, rel_verify);
    if (tr->parsed()) return cli::cmd_train(cfg, train_data, resume_from);
    if (ev->parsed())
      return cli::cmd_eval(cfg, ev_ckpt, ev_widths, ev_navoid, ev_seeds, ev_policy);
    if (cs->parsed())
      return cli::cmd_cardio_study(cfg, cs_ckpt, cs_avoid, cs_start, cs_episodes);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
