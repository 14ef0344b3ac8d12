#include "radt/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace radt {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::vector<std::string>& allowed,
                    const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown config key: " + section + it.key());
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_env(RunConfig& c, const json& j) {
  reject_unknown(j,
                 {"id", "max_episode_steps", "goal_tolerance", "workspace_lo",
                  "workspace_hi", "step_scale", "box_width", "n_avoid",
                  "avoid_radius", "accel", "damping", "dt", "v_max",
                  "rules_file", "k_updates", "goal_bits", "fixed_start_bits"},
                 "env.");
  take(j, "id", c.env_id);
  if (c.env_id != "reach" && c.env_id != "maze" && c.env_id != "cardio")
    throw ConfigError("env.id must be reach, maze or cardio");
  take(j, "workspace_lo", c.reach.workspace_lo);
  take(j, "workspace_hi", c.reach.workspace_hi);
  take(j, "step_scale", c.reach.step_scale);
  take(j, "box_width", c.reach.box_width);
  if (j.contains("n_avoid")) {
    int v = j.at("n_avoid").get<int>();
    c.reach.n_avoid = v;
    c.maze.n_avoid = v;
  }
  take(j, "avoid_radius", c.maze.avoid_radius);
  take(j, "accel", c.maze.accel);
  take(j, "damping", c.maze.damping);
  take(j, "dt", c.maze.dt);
  take(j, "v_max", c.maze.v_max);
  take(j, "rules_file", c.rules_file);
  take(j, "k_updates", c.cardio.k_updates);
  take(j, "goal_bits", c.cardio.goal_bits);
  if (j.contains("fixed_start_bits"))
    c.cardio.fixed_start_bits = j.at("fixed_start_bits").get<std::string>();
  if (j.contains("max_episode_steps")) {
    int v = j.at("max_episode_steps").get<int>();
    c.reach.max_episode_steps = v;
    c.maze.max_episode_steps = v;
    c.cardio.max_episode_steps = v;
  }
  if (j.contains("goal_tolerance")) {
    double v = j.at("goal_tolerance").get<double>();
    c.reach.goal_tolerance = v;
    c.maze.goal_tolerance = v;
  }
}

void apply_relabel(RunConfig& c, const json& j) {
  reject_unknown(j,
                 {"w_max", "n_avoid", "sampler", "top_k", "epsilon",
                  "max_resample_attempts", "box_dims"},
                 "relabel.");
  take(j, "w_max", c.relabel.w_max);
  take(j, "n_avoid", c.relabel.n_avoid);
  if (j.contains("sampler"))
    c.relabel.sampler = sampler_kind_from_string(j.at("sampler").get<std::string>());
  take(j, "top_k", c.relabel.top_k);
  take(j, "epsilon", c.relabel.epsilon);
  take(j, "max_resample_attempts", c.relabel.max_resample_attempts);
  take(j, "box_dims", c.relabel.box_dims);
}

void apply_model(RunConfig& c, const json& j) {
  reject_unknown(j,
                 {"n_head", "n_layer", "embed_dim", "adelta", "max_seq_len",
                  "dropout", "d_s", "d_a"},
                 "model.");
  take(j, "n_head", c.model.n_head);
  take(j, "n_layer", c.model.n_layer);
  take(j, "embed_dim", c.model.embed_dim);
  take(j, "adelta", c.model.adelta);
  take(j, "dropout", c.model.dropout);
  if (j.contains("d_s")) {
    c.model.d_s = j.at("d_s").get<int>();
    c.model_dims_explicit = true;
  }
  if (j.contains("d_a")) {
    c.model.d_a = j.at("d_a").get<int>();
    c.model_dims_explicit = true;
  }
  if (j.contains("max_seq_len")) {
    c.model.max_seq_len = j.at("max_seq_len").get<int>();
    c.model_max_seq_len_explicit = true;
  }
}

void apply_train(RunConfig& c, const json& j) {
  reject_unknown(j,
                 {"batch_size", "learning_rate", "scheduler", "warmup_steps",
                  "T_0", "T_mult", "weight_decay", "alpha", "total_steps",
                  "checkpoint_every", "eval_episodes", "grad_clip"},
                 "train.");
  take(j, "batch_size", c.train_cfg.batch_size);
  take(j, "learning_rate", c.train_cfg.learning_rate);
  if (j.contains("scheduler"))
    c.train_cfg.scheduler =
        train::scheduler_from_string(j.at("scheduler").get<std::string>());
  take(j, "warmup_steps", c.train_cfg.warmup_steps);
  take(j, "T_0", c.train_cfg.T_0);
  take(j, "T_mult", c.train_cfg.T_mult);
  take(j, "weight_decay", c.train_cfg.weight_decay);
  take(j, "alpha", c.train_cfg.alpha);
  take(j, "total_steps", c.train_cfg.total_steps);
  take(j, "checkpoint_every", c.train_cfg.checkpoint_every);
  take(j, "eval_episodes", c.train_cfg.eval_episodes);
  take(j, "grad_clip", c.train_cfg.grad_clip);
}

void apply_eval(RunConfig& c, const json& j) {
  reject_unknown(j, {"n_episodes"}, "eval.");
  take(j, "n_episodes", c.eval_cfg.n_episodes);
}

}  // namespace

RunConfig RunConfig::defaults(const std::string& profile,
                              const std::string& env_id) {
  RunConfig c;
  c.env_id = env_id;
  if (profile == "desk" || profile.empty()) {
    c.model.n_head = 1;
    c.model.n_layer = 2;
    c.model.embed_dim = 64;
    c.model.adelta = 2.0;
    c.model.dropout = 0.1;
    c.train_cfg.batch_size = 16;
    c.train_cfg.learning_rate = 1e-3;
    c.train_cfg.scheduler = train::SchedulerKind::lambdalr_warmup;
    c.train_cfg.warmup_steps = 200;
    c.train_cfg.total_steps = 5000;
    c.train_cfg.checkpoint_every = 500;
    c.train_cfg.eval_episodes = 60;
    c.data_n_steps = env_id == "cardio" ? 60000 : 15000;
    c.eval_cfg.n_episodes = env_id == "cardio" ? 200 : 60;
  } else if (profile == "paper") {
    if (env_id == "reach") {
      c.model.n_head = 4;
      c.model.n_layer = 4;
      c.model.embed_dim = 256;
      c.model.adelta = 2.0;
      c.train_cfg.batch_size = 128;
      c.train_cfg.scheduler = train::SchedulerKind::cosine_warm_restarts;
      c.train_cfg.T_0 = 1000;
      c.train_cfg.warmup_steps = 500;
    } else {
      c.model.n_head = 6;
      c.model.n_layer = 6;
      c.model.embed_dim = 384;
      c.model.adelta = 1.0;
      c.train_cfg.batch_size = env_id == "maze" ? 32 : 128;
      c.train_cfg.scheduler = train::SchedulerKind::lambdalr_warmup;
      c.train_cfg.warmup_steps = 1000;
    }
    c.model.dropout = 0.1;
    c.train_cfg.learning_rate = 1e-4;
    c.train_cfg.weight_decay = 1e-4;
    c.train_cfg.alpha = 1.0;
    c.train_cfg.total_steps = 50000;
    c.train_cfg.checkpoint_every = 500;
    c.train_cfg.eval_episodes = env_id == "cardio" ? 200 : 60;
    c.data_n_steps = env_id == "cardio" ? 60000 : 2000000;
    c.eval_cfg.n_episodes = env_id == "cardio" ? 200 : 60;
  } else {
    throw ConfigError("unknown profile: " + profile + " (use desk or paper)");
  }
  // Sampler conventions per environment.
  if (env_id == "reach") {
    c.relabel.sampler = SamplerKind::contour;
    c.relabel.w_max = 0.16;
    c.relabel.n_avoid = 1;
  } else if (env_id == "maze") {
    c.relabel.sampler = SamplerKind::restricted;
    c.relabel.w_max = 0.4;
    c.relabel.n_avoid = 1;
    c.relabel.box_dims = {0, 1};
  } else {
    // Two sampled boxes per prompt put the first-pass z balance near one
    // half for the shipped rule set.
    c.relabel.sampler = SamplerKind::discrete_top_k;
    c.relabel.top_k = 20;
    c.relabel.n_avoid = 2;
  }
  return c;
}

RunConfig RunConfig::from_json_text(const std::string& text,
                                    const std::string& profile) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config is not valid JSON");
  std::string env_id = "reach";
  if (j.contains("env") && j.at("env").contains("id"))
    env_id = j.at("env").at("id").get<std::string>();
  RunConfig c = defaults(profile.empty() ? "desk" : profile, env_id);

  reject_unknown(j, {"seed", "out", "env", "data", "relabel", "model", "train",
                     "eval"},
                 "");
  take(j, "seed", c.seed);
  take(j, "out", c.out);
  if (j.contains("env")) apply_env(c, j.at("env"));
  if (j.contains("data")) {
    reject_unknown(j.at("data"), {"n_steps"}, "data.");
    take(j.at("data"), "n_steps", c.data_n_steps);
  }
  if (j.contains("relabel")) apply_relabel(c, j.at("relabel"));
  if (j.contains("model")) apply_model(c, j.at("model"));
  if (j.contains("train")) apply_train(c, j.at("train"));
  if (j.contains("eval")) apply_eval(c, j.at("eval"));
  c.finalize();
  return c;
}

RunConfig RunConfig::load(const std::string& path, const std::string& profile) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str(), profile);
}

void RunConfig::finalize() {
  int d_s, d_a, max_steps;
  if (env_id == "reach") {
    d_s = 3;
    d_a = 3;
    max_steps = reach.max_episode_steps;
  } else if (env_id == "maze") {
    d_s = 4;
    d_a = 2;
    max_steps = maze.max_episode_steps;
  } else if (env_id == "cardio") {
    auto net = load_network();
    d_s = net->n_genes();
    d_a = net->n_genes();
    max_steps = cardio.max_episode_steps;
    if (static_cast<int>(cardio.goal_bits.size()) != d_s)
      throw ConfigError("env.goal_bits length must equal the gene count " +
                        std::to_string(d_s));
  } else {
    throw ConfigError("env.id must be reach, maze or cardio");
  }
  if (model_dims_explicit) {
    if (model.d_s != d_s)
      throw ConfigError("model.d_s=" + std::to_string(model.d_s) +
                        " disagrees with env d_s=" + std::to_string(d_s));
    if (model.d_a != d_a)
      throw ConfigError("model.d_a=" + std::to_string(model.d_a) +
                        " disagrees with env d_a=" + std::to_string(d_a));
  } else {
    model.d_s = d_s;
    model.d_a = d_a;
  }
  if (!model_max_seq_len_explicit)
    model.max_seq_len = nn::prompt_length(relabel.n_avoid) + 2 * max_steps + 1;
  if (model.max_seq_len < nn::prompt_length(relabel.n_avoid) + 3)
    throw ConfigError("model.max_seq_len leaves no room for trajectory tokens");
  model.validate();
  train_cfg.validate();
  if (relabel.n_avoid < 1) throw ConfigError("relabel.n_avoid must be >= 1");
  if (relabel.w_max < 0) throw ConfigError("relabel.w_max must be >= 0");
  if (relabel.epsilon <= 0) throw ConfigError("relabel.epsilon must be > 0");
  if (eval_cfg.n_episodes < 1) throw ConfigError("eval.n_episodes must be >= 1");
  if (data_n_steps < 1) throw ConfigError("data.n_steps must be >= 1");
}

std::unique_ptr<Env> RunConfig::make_env() const {
  if (env_id == "reach") return std::make_unique<ReachEnv>(reach);
  if (env_id == "maze") return std::make_unique<MazeEnv>(maze);
  return std::make_unique<CardioEnv>(load_network(), cardio);
}

std::shared_ptr<const BooleanNetwork> RunConfig::load_network() const {
  return std::make_shared<BooleanNetwork>(BooleanNetwork::from_file(rules_file));
}

std::string RunConfig::canonical_json() const {
  json j;
  j["seed"] = seed;
  j["out"] = out;
  j["env"] = {{"id", env_id}};
  auto& e = j["env"];
  if (env_id == "reach") {
    e["workspace_lo"] = reach.workspace_lo;
    e["workspace_hi"] = reach.workspace_hi;
    e["step_scale"] = reach.step_scale;
    e["goal_tolerance"] = reach.goal_tolerance;
    e["max_episode_steps"] = reach.max_episode_steps;
    e["box_width"] = reach.box_width;
    e["n_avoid"] = reach.n_avoid;
  } else if (env_id == "maze") {
    e["max_episode_steps"] = maze.max_episode_steps;
    e["goal_tolerance"] = maze.goal_tolerance;
    e["n_avoid"] = maze.n_avoid;
    e["avoid_radius"] = maze.avoid_radius;
    e["accel"] = maze.accel;
    e["damping"] = maze.damping;
    e["dt"] = maze.dt;
    e["v_max"] = maze.v_max;
  } else {
    e["rules_file"] = rules_file;
    e["k_updates"] = cardio.k_updates;
    e["max_episode_steps"] = cardio.max_episode_steps;
    e["goal_bits"] = cardio.goal_bits;
    if (cardio.fixed_start_bits) e["fixed_start_bits"] = *cardio.fixed_start_bits;
  }
  j["data"] = {{"n_steps", data_n_steps}};
  j["relabel"] = {{"w_max", relabel.w_max},
                  {"n_avoid", relabel.n_avoid},
                  {"sampler", to_string(relabel.sampler)},
                  {"top_k", relabel.top_k},
                  {"epsilon", relabel.epsilon},
                  {"max_resample_attempts", relabel.max_resample_attempts},
                  {"box_dims", relabel.box_dims}};
  j["model"] = {{"n_head", model.n_head},     {"n_layer", model.n_layer},
                {"embed_dim", model.embed_dim}, {"adelta", model.adelta},
                {"max_seq_len", model.max_seq_len}, {"dropout", model.dropout},
                {"d_s", model.d_s},           {"d_a", model.d_a}};
  j["train"] = {{"batch_size", train_cfg.batch_size},
                {"learning_rate", train_cfg.learning_rate},
                {"scheduler", train::to_string(train_cfg.scheduler)},
                {"warmup_steps", train_cfg.warmup_steps},
                {"T_0", train_cfg.T_0},
                {"T_mult", train_cfg.T_mult},
                {"weight_decay", train_cfg.weight_decay},
                {"alpha", train_cfg.alpha},
                {"total_steps", train_cfg.total_steps},
                {"checkpoint_every", train_cfg.checkpoint_every},
                {"eval_episodes", train_cfg.eval_episodes},
                {"grad_clip", train_cfg.grad_clip}};
  j["eval"] = {{"n_episodes", eval_cfg.n_episodes}};
  return j.dump();
}

std::string RunConfig::config_hash() const {
  std::uint64_t h = fnv1a64(canonical_json());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace radt
