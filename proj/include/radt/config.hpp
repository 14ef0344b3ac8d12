#pragma once

#include <memory>
#include <optional>
#include <string>

#include "radt/cardio_env.hpp"
#include "radt/env.hpp"
#include "radt/eval.hpp"
#include "radt/maze_env.hpp"
#include "radt/reach_env.hpp"
#include "radt/relabel.hpp"
#include "radt/train.hpp"

namespace radt {

inline constexpr const char* kToolVersion = "0.1.0";

/// One structured config file drives every command. Sections: env, data,
/// relabel, model, train, eval. Unknown keys anywhere are rejected with the
/// offending key path.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out = "runs/out";

  std::string env_id = "reach";
  ReachConfig reach;
  MazeConfig maze;
  CardioConfig cardio;
  std::string rules_file = "data/cardiogenesis.rules";

  long long data_n_steps = 15000;

  RelabelConfig relabel;
  nn::TransformerConfig model;
  bool model_max_seq_len_explicit = false;
  bool model_dims_explicit = false;
  train::TrainConfig train_cfg;
  eval::EvalConfig eval_cfg;

  /// Parse + validate. `profile` ("desk" or "paper") seeds the defaults;
  /// file values override the profile; flag overrides are applied by the CLI
  /// afterwards.
  static RunConfig load(const std::string& path, const std::string& profile);
  static RunConfig from_json_text(const std::string& text,
                                  const std::string& profile);
  /// Profile defaults only (no file).
  static RunConfig defaults(const std::string& profile, const std::string& env_id);

  /// Cross-section consistency (d_s/d_a agreement, bounds) checked after all
  /// overrides; throws ConfigError naming the key.
  void finalize();

  std::unique_ptr<Env> make_env() const;
  std::shared_ptr<const BooleanNetwork> load_network() const;

  /// FNV-1a hash of the canonical serialized config, hex-encoded.
  std::string config_hash() const;
  std::string canonical_json() const;
};

}  // namespace radt
