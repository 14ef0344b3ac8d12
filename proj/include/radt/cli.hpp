#pragma once

#include <string>

#include "radt/config.hpp"

namespace radt::cli {

/// Subcommand bodies, shared by the binary and the test harnesses. Each
/// throws radt::Error subclasses on failure and returns 0 on success.

int cmd_gen_data(const RunConfig& cfg);
int cmd_relabel(const RunConfig& cfg, const std::string& in_path, bool verify);
int cmd_train(const RunConfig& cfg, const std::string& data_path,
              const std::string& resume_from);
int cmd_eval(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& widths_arg, const std::string& n_avoid_arg,
             int n_seeds, const std::string& policy_kind);
int cmd_cardio_study(const RunConfig& cfg, const std::string& checkpoint_path,
                     const std::string& avoid_state,
                     const std::string& start_state, int episodes);
int cmd_export_metrics(const std::string& reports_dir, const std::string& out_csv);

/// "0.16..0.24", "0.16..0.24:0.04" or "0.16,0.2" -> value grid.
std::vector<double> parse_sweep(const std::string& text, double default_step);

}  // namespace radt::cli
