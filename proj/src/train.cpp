#include "radt/train.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace radt::train {

using nn::Tensor;

SchedulerKind scheduler_from_string(const std::string& s) {
  if (s == "lambdalr_warmup" || s == "lambdalr") return SchedulerKind::lambdalr_warmup;
  if (s == "cosine_warm_restarts" || s == "cosinewarmrestarts")
    return SchedulerKind::cosine_warm_restarts;
  throw ArgumentError("unknown scheduler: " + s);
}

std::string to_string(SchedulerKind k) {
  return k == SchedulerKind::lambdalr_warmup ? "lambdalr_warmup"
                                             : "cosine_warm_restarts";
}

void TrainConfig::validate() const {
  if (batch_size < 1 || total_steps < 1 || checkpoint_every < 1 ||
      warmup_steps < 1 || T_0 < 1 || eval_episodes < 1)
    throw ArgumentError("train config counts must be positive");
  if (learning_rate <= 0) throw ArgumentError("learning_rate must be positive");
  if (weight_decay < 0 || alpha < 0 || grad_clip < 0)
    throw ArgumentError("weight_decay/alpha/grad_clip must be nonnegative");
  if (T_mult != 1) throw ArgumentError("only T_mult=1 is supported");
}

double lr_at(long long step, const TrainConfig& cfg) {
  if (step < 0) throw ArgumentError("step must be nonnegative");
  if (cfg.scheduler == SchedulerKind::lambdalr_warmup) {
    if (step >= cfg.warmup_steps) return cfg.learning_rate;
    return cfg.learning_rate * static_cast<double>(step) / cfg.warmup_steps;
  }
  // Cosine with warm restarts: linear warmup inside each T_0 cycle, then
  // cosine decay to zero; the pattern repeats every cycle (T_mult = 1).
  long long c = step % cfg.T_0;
  long long warm = std::min<long long>(cfg.warmup_steps, cfg.T_0);
  if (c < warm) return cfg.learning_rate * static_cast<double>(c) / warm;
  if (cfg.T_0 == warm) return cfg.learning_rate;
  double frac = static_cast<double>(c - warm) / static_cast<double>(cfg.T_0 - warm);
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(M_PI * frac));
}

double loss_action_value(const std::vector<ActionVec>& pred,
                         const std::vector<ActionVec>& target) {
  if (pred.size() != target.size() || pred.empty())
    throw ArgumentError("loss_action: shape mismatch");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].size() != target[t].size())
      throw ArgumentError("loss_action: shape mismatch");
    for (std::size_t j = 0; j < pred[t].size(); ++j) {
      double d = pred[t][j] - target[t][j];
      acc += d * d;
      ++n;
    }
  }
  return acc / static_cast<double>(n);
}

double loss_avoid_awareness_value(const std::vector<double>& k_pred,
                                  const std::vector<std::uint8_t>& k_true) {
  if (k_pred.size() != k_true.size() || k_pred.empty())
    throw ArgumentError("loss_avoid_awareness: shape mismatch");
  constexpr double eps = 1e-7;
  double acc = 0.0;
  for (std::size_t t = 0; t < k_pred.size(); ++t) {
    double p = std::clamp(k_pred[t], eps, 1.0 - eps);
    double k = k_true[t] ? 1.0 : 0.0;
    acc -= k * std::log(p) + (1.0 - k) * std::log(1.0 - p);
  }
  return acc / static_cast<double>(k_pred.size());
}

double combined_loss(double la, double lk, double alpha) {
  return la + alpha * lk;
}

std::vector<const LabeledTrajectory*> sample_batch(
    const std::vector<const LabeledTrajectory*>& entries, int batch_size,
    Rng& rng) {
  if (entries.empty()) throw ArgumentError("sample_batch: empty dataset");
  std::vector<const LabeledTrajectory*> batch(batch_size);
  for (auto& b : batch) b = entries[rng.uniform_int(entries.size())];
  return batch;
}

AdamW::AdamW(std::vector<std::pair<std::string, Tensor>> params,
             double weight_decay, double grad_clip)
    : params_(std::move(params)),
      weight_decay_(weight_decay),
      grad_clip_(grad_clip) {
  for (auto& [name, t] : params_) {
    m_.emplace_back(t.numel(), 0.0);
    v_.emplace_back(t.numel(), 0.0);
  }
}

void AdamW::step(double lr) {
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  ++t_;

  if (grad_clip_ > 0.0) {
    double norm2 = 0.0;
    for (auto& [name, t] : params_)
      for (double g : t.grad()) norm2 += g * g;
    double norm = std::sqrt(norm2);
    if (norm > grad_clip_) {
      double s = grad_clip_ / norm;
      for (auto& [name, t] : params_)
        for (double& g : t.grad()) g *= s;
    }
  }

  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& t = params_[i].second;
    auto& val = t.value();
    const auto& grad = t.grad();  // may be empty: zero gradient
    for (std::size_t j = 0; j < val.size(); ++j) {
      double g = j < grad.size() ? grad[j] : 0.0;
      m_[i][j] = beta1 * m_[i][j] + (1.0 - beta1) * g;
      v_[i][j] = beta2 * v_[i][j] + (1.0 - beta2) * g * g;
      double mhat = m_[i][j] / bc1;
      double vhat = v_[i][j] / bc2;
      val[j] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay_ * val[j]);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& [name, t] : params_) t.grad().clear();
}

std::string AdamW::state_to_json() const {
  nlohmann::json j;
  j["t"] = t_;
  nlohmann::json moments;
  for (std::size_t i = 0; i < params_.size(); ++i)
    moments[params_[i].first] = {{"m", m_[i]}, {"v", v_[i]}};
  j["moments"] = std::move(moments);
  return j.dump();
}

void AdamW::state_from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  t_ = j.at("t").get<long long>();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& mj = j.at("moments").at(params_[i].first);
    m_[i] = mj.at("m").get<std::vector<double>>();
    v_[i] = mj.at("v").get<std::vector<double>>();
    if (m_[i].size() != params_[i].second.numel() ||
        v_[i].size() != params_[i].second.numel())
      throw SchemaError("optimizer state size mismatch for " + params_[i].first);
  }
}

CheckpointRecord select_checkpoint(const std::vector<CheckpointRecord>& records) {
  if (records.empty()) throw ArgumentError("select_checkpoint: no records");
  double sr_max = records.front().sr;
  for (const auto& r : records) sr_max = std::max(sr_max, r.sr);
  const CheckpointRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.sr < sr_max - 0.05) continue;
    if (!best || r.mnc < best->mnc || (r.mnc == best->mnc && r.step >= best->step))
      best = &r;
  }
  return *best;
}

StepLosses train_step(nn::ModelParams& params, AdamW& opt,
                      const std::vector<const LabeledTrajectory*>& batch,
                      const TrainConfig& cfg, double lr, Rng& dropout_rng) {
  // Encode every sample, right-pad to the longest sequence, run the stack.
  std::vector<nn::EncodedSequence> seqs;
  std::vector<int> prompt_lens;
  int l_max = 0;
  seqs.reserve(batch.size());
  for (const auto* entry : batch) {
    seqs.push_back(nn::encode_sequence(entry->prompt, entry->trajectory.states,
                                       entry->trajectory.actions, params));
    prompt_lens.push_back(seqs.back().prompt_len);
    l_max = std::max(l_max, seqs.back().tokens.dim(0));
  }
  std::vector<Tensor> padded;
  padded.reserve(seqs.size());
  for (auto& s : seqs) padded.push_back(nn::pad_rows(s.tokens, l_max));

  nn::ForwardOptions fwd;
  fwd.training = true;
  fwd.dropout_rng = &dropout_rng;
  Tensor hidden = nn::transformer_apply(params, nn::stack(padded), prompt_lens, fwd);

  std::vector<Tensor> action_losses, k_losses;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    auto [a_pred, k_pred] = nn::forward_heads(
        params, nn::slice_batch(hidden, static_cast<int>(b)),
        seqs[b].state_token_positions);
    std::vector<double> a_target;
    for (const auto& a : batch[b]->trajectory.actions)
      a_target.insert(a_target.end(), a.begin(), a.end());
    std::vector<double> k_target(batch[b]->per_step_ok.begin(),
                                 batch[b]->per_step_ok.end());
    action_losses.push_back(nn::mse_loss(a_pred, a_target));
    k_losses.push_back(nn::bce_loss(k_pred, k_target));
  }
  Tensor la = nn::mean_scalars(action_losses);
  Tensor lk = nn::mean_scalars(k_losses);
  Tensor total = nn::add_scaled(la, lk, cfg.alpha);

  StepLosses losses{total.item(), la.item(), lk.item()};
  if (!std::isfinite(losses.total))
    throw StateError("non-finite loss: action=" + std::to_string(losses.action) +
                     " avoid_awareness=" + std::to_string(losses.avoid_awareness));

  opt.zero_grad();
  nn::backward(total);
  opt.step(lr);
  return losses;
}

namespace {

namespace fs = std::filesystem;

struct TrainerState {
  long long next_step = 0;
  std::array<std::uint64_t, 5> rng_state{};
  double rng_spare = 0.0;
  std::vector<CheckpointRecord> records;
};

void save_trainer_state(const fs::path& dir, const TrainerState& st,
                        const AdamW& opt) {
  nlohmann::json j;
  j["next_step"] = st.next_step;
  j["rng_state"] = st.rng_state;
  j["rng_spare"] = st.rng_spare;
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : st.records)
    recs.push_back({{"step", r.step}, {"path", r.path}, {"sr", r.sr}, {"mnc", r.mnc}});
  j["records"] = std::move(recs);
  j["optimizer"] = nlohmann::json::parse(opt.state_to_json());
  std::ofstream out(dir / "trainer_state.json");
  out << j.dump();
}

TrainerState load_trainer_state(const fs::path& dir, AdamW& opt) {
  std::ifstream in(dir / "trainer_state.json");
  if (!in) throw Error("no trainer_state.json in " + dir.string());
  nlohmann::json j = nlohmann::json::parse(in);
  TrainerState st;
  st.next_step = j.at("next_step").get<long long>();
  auto rs = j.at("rng_state").get<std::vector<std::uint64_t>>();
  std::copy_n(rs.begin(), 5, st.rng_state.begin());
  st.rng_spare = j.value("rng_spare", 0.0);
  for (const auto& rj : j.at("records")) {
    st.records.push_back({rj.at("step").get<long long>(),
                          rj.at("path").get<std::string>(),
                          rj.at("sr").get<double>(), rj.at("mnc").get<double>()});
  }
  opt.state_from_json(j.at("optimizer").dump());
  return st;
}

}  // namespace

TrainResult train_loop(const PairedDatasetFile& data, nn::ModelParams& params,
                       const TrainConfig& cfg, const EvalFn& eval_fn,
                       const TrainOptions& opts) {
  cfg.validate();
  if (data.data.empty()) throw ArgumentError("train_loop: empty dataset");
  fs::create_directories(fs::path(opts.out_dir) / "ckpt");

  AdamW opt(params.named_params(), cfg.weight_decay, cfg.grad_clip);
  Rng train_rng(Rng::derive_seed(opts.seed, "train-stream"));
  long long start_step = 0;
  std::vector<CheckpointRecord> records;

  if (opts.resume_from) {
    params = nn::load_checkpoint(
        (fs::path(*opts.resume_from) / "checkpoint.json").string());
    opt = AdamW(params.named_params(), cfg.weight_decay, cfg.grad_clip);
    TrainerState st = load_trainer_state(*opts.resume_from, opt);
    train_rng.restore_state(st.rng_state, st.rng_spare);
    start_step = st.next_step;
    records = std::move(st.records);
  }

  const std::string log_path =
      (fs::path(opts.out_dir) / "training_log.csv").string();
  if (start_step > 0 && fs::exists(log_path)) {
    // Drop any rows past the resume point so the log stays consistent.
    std::ifstream in(log_path);
    std::vector<std::string> keep;
    std::string line;
    while (std::getline(in, line)) {
      if (keep.empty()) {
        keep.push_back(line);  // header
        continue;
      }
      long long s = std::stoll(line.substr(0, line.find(',')));
      if (s < start_step) keep.push_back(line);
    }
    in.close();
    std::ofstream out(log_path, std::ios::trunc);
    for (const auto& l : keep) out << l << '\n';
  }
  std::ofstream log(log_path, start_step == 0 ? std::ios::trunc : std::ios::app);
  if (start_step == 0)
    log << "step,loss,loss_action,loss_avoid_awareness,lr\n";

  auto entries = data.entries();
  for (long long step = start_step; step < cfg.total_steps; ++step) {
    double lr = lr_at(step, cfg);
    auto batch = sample_batch(entries, cfg.batch_size, train_rng);
    StepLosses losses;
    try {
      losses = train_step(params, opt, batch, cfg, lr, train_rng);
    } catch (const StateError& e) {
      throw StateError("training aborted at step " + std::to_string(step) + ": " +
                       e.what());
    }
    log << step << ',' << losses.total << ',' << losses.action << ','
        << losses.avoid_awareness << ',' << lr << '\n';

    if ((step + 1) % cfg.checkpoint_every == 0) {
      log.flush();
      fs::path dir = fs::path(opts.out_dir) / "ckpt" /
                     ("step_" + std::to_string(step + 1));
      fs::create_directories(dir);
      nn::ModelParams snapshot = params.clone();
      auto [sr, mnc] = eval_fn(snapshot, step + 1);
      nn::save_checkpoint((dir / "checkpoint.json").string(), params);
      {
        nlohmann::json mj{{"step", step + 1}, {"sr", sr}, {"mnc", mnc}};
        std::ofstream mout(dir / "metrics.json");
        mout << mj.dump(2);
      }
      records.push_back({step + 1, dir.string(), sr, mnc});
      TrainerState st;
      st.next_step = step + 1;
      st.rng_state = train_rng.save_state();
      st.rng_spare = train_rng.spare_value();
      st.records = records;
      save_trainer_state(dir, st, opt);
    }
  }
  return {std::move(records), log_path};
}

}  // namespace radt::train
