#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "radt/dataset_io.hpp"
#include "radt/model.hpp"

namespace radt::train {

enum class SchedulerKind { lambdalr_warmup, cosine_warm_restarts };

SchedulerKind scheduler_from_string(const std::string& s);
std::string to_string(SchedulerKind k);

struct TrainConfig {
  int batch_size = 16;
  double learning_rate = 1e-4;  // maximum learning rate
  SchedulerKind scheduler = SchedulerKind::lambdalr_warmup;
  int warmup_steps = 500;
  int T_0 = 1000;
  int T_mult = 1;  // only 1 is supported
  double weight_decay = 1e-4;
  double alpha = 1.0;  // weight on the avoid-awareness loss
  int total_steps = 5000;
  int checkpoint_every = 500;
  int eval_episodes = 60;
  double grad_clip = 1.0;

  void validate() const;
};

/// Scheduler value at a 0-based step. lambdalr_warmup ramps linearly to the
/// maximum over warmup_steps then holds; cosine_warm_restarts ramps inside
/// each T_0 cycle then decays to 0 with a cosine.
double lr_at(long long step, const TrainConfig& cfg);

/// Mean over time and action dimensions of squared error (one trajectory).
double loss_action_value(const std::vector<ActionVec>& pred,
                         const std::vector<ActionVec>& target);
/// Positive binary cross entropy with 1e-7 clamping (one trajectory).
double loss_avoid_awareness_value(const std::vector<double>& k_pred,
                                  const std::vector<std::uint8_t>& k_true);
/// la + alpha * lk.
double combined_loss(double la, double lk, double alpha);

/// batch_size entries drawn i.i.d. uniformly with replacement; both pair
/// members count as individual entries.
std::vector<const LabeledTrajectory*> sample_batch(
    const std::vector<const LabeledTrajectory*>& entries, int batch_size,
    Rng& rng);

/// Adaptive-moment optimizer with decoupled weight decay (betas 0.9/0.999,
/// eps 1e-8) and global-norm gradient clipping.
class AdamW {
 public:
  AdamW(std::vector<std::pair<std::string, nn::Tensor>> params,
        double weight_decay, double grad_clip);

  void step(double lr);
  void zero_grad();

  long long step_count() const { return t_; }
  std::string state_to_json() const;
  void state_from_json(const std::string& json_text);

 private:
  std::vector<std::pair<std::string, nn::Tensor>> params_;
  std::vector<std::vector<double>> m_, v_;
  long long t_ = 0;
  double weight_decay_;
  double grad_clip_;
};

struct CheckpointRecord {
  long long step = 0;
  std::string path;  // checkpoint directory
  double sr = 0.0;
  double mnc = 0.0;
};

/// Among records whose SR is within 0.05 of the best SR, the one with the
/// lowest MNC; ties broken by the later step.
CheckpointRecord select_checkpoint(const std::vector<CheckpointRecord>& records);

struct StepLosses {
  double total = 0.0;
  double action = 0.0;
  double avoid_awareness = 0.0;
};

/// One optimizer step on a sampled batch; returns the loss components.
StepLosses train_step(nn::ModelParams& params, AdamW& opt,
                      const std::vector<const LabeledTrajectory*>& batch,
                      const TrainConfig& cfg, double lr, Rng& dropout_rng);

/// Periodic evaluation hook: receives an immutable parameter snapshot and
/// the step, returns (sr, mnc).
using EvalFn =
    std::function<std::pair<double, double>(nn::ModelParams&, long long)>;

struct TrainOptions {
  std::string out_dir;  // checkpoints land in <out_dir>/ckpt/step_<N>/
  std::uint64_t seed = 0;
  std::optional<std::string> resume_from;  // a step_<N> checkpoint directory
};

struct TrainResult {
  std::vector<CheckpointRecord> records;
  std::string log_path;
};

/// Fixed-step training: sample batch, forward, combined loss, backward,
/// decoupled-weight-decay step at lr_at(step). Every checkpoint_every steps
/// the eval hook runs on a snapshot and a CheckpointRecord is appended.
/// Aborts with step and loss components if the loss goes non-finite.
TrainResult train_loop(const PairedDatasetFile& data, nn::ModelParams& params,
                       const TrainConfig& cfg, const EvalFn& eval_fn,
                       const TrainOptions& opts);

}  // namespace radt::train
