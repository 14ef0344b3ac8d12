#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "radt/train.hpp"
#include "support/helpers.hpp"

using namespace radt;
using namespace radt::train;

namespace {

std::vector<LabeledTrajectory> synthetic_labeled(Rng& rng, int count, int T,
                                                 int d_s, int d_a) {
  std::vector<LabeledTrajectory> out;
  for (int i = 0; i < count; ++i) {
    Trajectory t = test::random_trajectory(rng, T, d_s, d_a);
    std::vector<AvoidBox> boxes{box_from_centroid(
        StateVec(d_s, rng.uniform(0, 1)), rng.uniform(0, 0.5))};
    out.push_back(make_labeled(t, boxes, t.states.back()));
  }
  return out;
}

PairedDatasetFile synthetic_paired(Rng& rng, int pairs, int T, int d_s, int d_a) {
  PairedDatasetFile ds;
  ds.header = {1, d_s, d_a, "synthetic", "", "", 0};
  auto labeled = synthetic_labeled(rng, pairs, T, d_s, d_a);
  for (auto& lt : labeled) {
    LabeledTrajectory copy = lt;
    copy.prompt.z = 1 - copy.prompt.z;
    ds.data.pairs.push_back({lt, copy});
  }
  return ds;
}

nn::TransformerConfig tiny_model(int d_s, int d_a, int max_seq) {
  nn::TransformerConfig cfg;
  cfg.n_head = 1;
  cfg.n_layer = 1;
  cfg.embed_dim = 32;
  cfg.adelta = 1.0;
  cfg.max_seq_len = max_seq;
  cfg.d_s = d_s;
  cfg.d_a = d_a;
  cfg.dropout = 0.0;
  return cfg;
}

}  // namespace

TEST_CASE("action loss closed forms and oracle") {
  std::vector<ActionVec> pred{{1, 2}, {3, 4}};
  CHECK(loss_action_value(pred, pred) == 0.0);

  std::vector<ActionVec> target{{0, 1}, {2, 3}};
  CHECK(loss_action_value(pred, target) == doctest::Approx(1.0));

  Rng rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<ActionVec> a, b;
    int T = 3 + rng.uniform_int(5);
    for (int t = 0; t < T; ++t) {
      a.push_back({rng.normal(), rng.normal(), rng.normal()});
      b.push_back({rng.normal(), rng.normal(), rng.normal()});
    }
    double acc = 0;
    int n = 0;
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < 3; ++j) {
        acc += (a[t][j] - b[t][j]) * (a[t][j] - b[t][j]);
        ++n;
      }
    CHECK(std::abs(loss_action_value(a, b) - acc / n) < 1e-12);
  }
}

TEST_CASE("avoid-awareness loss closed forms and oracle") {
  std::vector<double> half(8, 0.5);
  std::vector<std::uint8_t> ks{1, 0, 1, 1, 0, 0, 1, 0};
  CHECK(loss_avoid_awareness_value(half, ks) == doctest::Approx(std::log(2.0)));

  std::vector<double> perfect;
  for (auto k : ks) perfect.push_back(k ? 1.0 : 0.0);
  CHECK(loss_avoid_awareness_value(perfect, ks) < 1e-6);
  CHECK(loss_avoid_awareness_value(perfect, ks) >= 0.0);

  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    int T = 4 + rng.uniform_int(6);
    std::vector<double> p(T);
    std::vector<std::uint8_t> k(T);
    for (int t = 0; t < T; ++t) {
      p[t] = rng.uniform(0.01, 0.99);
      k[t] = rng.uniform_int(2);
    }
    double acc = 0;
    for (int t = 0; t < T; ++t)
      acc -= (k[t] ? std::log(p[t]) : std::log(1 - p[t]));
    CHECK(std::abs(loss_avoid_awareness_value(p, k) - acc / T) < 1e-10);
  }
}

TEST_CASE("combined loss is affine in alpha") {
  CHECK(combined_loss(0.2, 0.3, 0.0) == doctest::Approx(0.2));
  CHECK(combined_loss(0.2, 0.3, 1.0) == doctest::Approx(0.5));
  for (double alpha : {0.5, 2.0, 7.0})
    CHECK(combined_loss(1.0, 2.0, alpha) == doctest::Approx(1.0 + 2.0 * alpha));
}

TEST_CASE("sample_batch draws uniformly with replacement") {
  Rng data_rng(3);
  auto labeled = synthetic_labeled(data_rng, 10, 4, 2, 2);
  std::vector<const LabeledTrajectory*> entries;
  for (auto& lt : labeled) entries.push_back(&lt);

  Rng rng(4);
  auto single = sample_batch({entries[0]}, 1, rng);
  CHECK(single[0] == entries[0]);

  std::vector<int> counts(10, 0);
  const int draws = 100000;
  for (int i = 0; i < draws / 100; ++i) {
    auto batch = sample_batch(entries, 100, rng);
    for (auto* e : batch)
      counts[e - &labeled[0]] += 1;
  }
  for (int i = 0; i < 10; ++i)
    CHECK(std::abs(counts[i] / static_cast<double>(draws) - 0.1) < 0.01);

  bool repeat = false;
  for (int tries = 0; tries < 50 && !repeat; ++tries) {
    auto batch = sample_batch(entries, 8, rng);
    for (int i = 0; i < 8 && !repeat; ++i)
      for (int j = i + 1; j < 8; ++j)
        if (batch[i] == batch[j]) repeat = true;
  }
  CHECK(repeat);
}

TEST_CASE("learning-rate schedules") {
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.warmup_steps = 100;
  cfg.scheduler = SchedulerKind::lambdalr_warmup;
  CHECK(lr_at(0, cfg) == 0.0);
  CHECK(lr_at(100, cfg) == doctest::Approx(1e-3));
  CHECK(lr_at(5000, cfg) == doctest::Approx(1e-3));
  // Continuity at the warmup boundary.
  CHECK(std::abs(lr_at(100, cfg) - lr_at(99, cfg)) <= 1e-3 / 100 + 1e-15);

  cfg.scheduler = SchedulerKind::cosine_warm_restarts;
  cfg.T_0 = 500;
  cfg.warmup_steps = 50;
  CHECK(lr_at(0, cfg) == 0.0);
  CHECK(lr_at(50, cfg) == doctest::Approx(1e-3));
  for (long long s : {0LL, 7LL, 50LL, 200LL, 499LL, 1234LL})
    CHECK(lr_at(s, cfg) == doctest::Approx(lr_at(s + cfg.T_0, cfg)));
  for (long long s = 0; s < 1200; ++s) CHECK(lr_at(s, cfg) >= 0.0);
}

TEST_CASE("optimizer step with zero learning rate is a no-op") {
  Rng rng(5);
  auto mcfg = tiny_model(2, 2, 32);
  nn::ModelParams params = nn::ModelParams::init(mcfg, rng);
  auto before = params.named_params();
  std::vector<std::vector<double>> snapshot;
  for (auto& [n, t] : before) snapshot.push_back(t.value());

  AdamW opt(params.named_params(), 1e-4, 1.0);
  Rng data_rng(6);
  auto ds = synthetic_paired(data_rng, 3, 4, 2, 2);
  auto entries = ds.entries();
  TrainConfig tcfg;
  tcfg.batch_size = 2;
  Rng train_rng(7);
  auto batch = sample_batch(entries, 2, train_rng);
  train_step(params, opt, batch, tcfg, 0.0, train_rng);

  auto after = params.named_params();
  for (std::size_t i = 0; i < after.size(); ++i)
    CHECK(after[i].second.value() == snapshot[i]);
}

TEST_CASE("select_checkpoint follows the SR-window rule") {
  CheckpointRecord a{500, "a", 0.9, 0.2};
  CHECK(select_checkpoint({a}).path == "a");

  std::vector<CheckpointRecord> recs{{1, "a", 0.9, 0.2},
                                     {2, "b", 0.88, 0.1},
                                     {3, "c", 0.7, 0.01}};
  CHECK(select_checkpoint(recs).path == "b");

  std::vector<CheckpointRecord> equal_sr{{1, "a", 0.5, 0.3},
                                         {2, "b", 0.5, 0.05},
                                         {3, "c", 0.5, 0.4}};
  CHECK(select_checkpoint(equal_sr).path == "b");

  // Oracle comparison over random record lists.
  Rng rng(8);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<CheckpointRecord> rs;
    int n = 1 + rng.uniform_int(12);
    for (int i = 0; i < n; ++i)
      rs.push_back({i, std::to_string(i), rng.uniform(0, 1), rng.uniform(0, 1)});
    auto got = select_checkpoint(rs);

    double sr_max = 0;
    for (auto& r : rs) sr_max = std::max(sr_max, r.sr);
    const CheckpointRecord* want = nullptr;
    for (auto& r : rs) {
      if (r.sr < sr_max - 0.05) continue;
      if (!want || r.mnc < want->mnc ||
          (r.mnc == want->mnc && r.step > want->step))
        want = &r;
    }
    CHECK(got.path == want->path);
    CHECK(got.sr >= sr_max - 0.05);
  }
}

TEST_CASE("tiny overfit: loss collapses on four trajectories") {
  Rng rng(9);
  auto ds = synthetic_paired(rng, 2, 5, 2, 2);  // 2 pairs = 4 entries
  auto entries = ds.entries();

  auto mcfg = tiny_model(2, 2, 32);
  Rng init_rng(10);
  nn::ModelParams params = nn::ModelParams::init(mcfg, init_rng);
  AdamW opt(params.named_params(), 0.0, 1.0);
  TrainConfig tcfg;
  tcfg.batch_size = 4;
  tcfg.alpha = 1.0;

  Rng train_rng(11);
  std::vector<double> first_window, last_window;
  double final_action_loss = 1.0;
  const int steps = 2000;
  for (int step = 0; step < steps; ++step) {
    auto batch = sample_batch(entries, tcfg.batch_size, train_rng);
    auto losses = train_step(params, opt, batch, tcfg, 1e-3, train_rng);
    if (step < 200) first_window.push_back(losses.total);
    if (step >= steps - 200) last_window.push_back(losses.total);
    final_action_loss = losses.action;
  }
  auto mean = [](const std::vector<double>& v) {
    double a = 0;
    for (double x : v) a += x;
    return a / v.size();
  };
  CHECK(mean(last_window) < mean(first_window));
  CHECK(final_action_loss < 1e-3);
}

TEST_CASE("train_loop: checkpoint accounting and divergence abort") {
  Rng rng(12);
  auto ds = synthetic_paired(rng, 4, 4, 2, 2);
  auto mcfg = tiny_model(2, 2, 32);
  Rng init_rng(13);
  nn::ModelParams params = nn::ModelParams::init(mcfg, init_rng);

  TrainConfig tcfg;
  tcfg.batch_size = 2;
  tcfg.total_steps = 30;
  tcfg.checkpoint_every = 10;
  tcfg.learning_rate = 1e-3;
  tcfg.warmup_steps = 5;

  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "radt_train_loop_test";
  fs::remove_all(dir);
  TrainOptions opts;
  opts.out_dir = dir.string();
  opts.seed = 3;
  int evals = 0;
  auto result = train_loop(ds, params, tcfg,
                           [&](nn::ModelParams&, long long) {
                             ++evals;
                             return std::make_pair(0.5, 0.1);
                           },
                           opts);
  CHECK(result.records.size() == 3);  // floor(30 / 10)
  CHECK(evals == 3);
  CHECK(fs::exists(dir / "ckpt" / "step_30" / "checkpoint.json"));
  CHECK(fs::exists(dir / "training_log.csv"));

  // Poison a parameter: the loop must abort with a step-stamped error.
  params.E_z.value()[0] = std::nan("");
  TrainOptions opts2;
  opts2.out_dir = (dir / "diverge").string();
  opts2.seed = 4;
  CHECK_THROWS_AS(train_loop(ds, params, tcfg,
                             [&](nn::ModelParams&, long long) {
                               return std::make_pair(0.0, 0.0);
                             },
                             opts2),
                  StateError);
}

TEST_CASE("resume reproduces the uninterrupted run") {
  Rng rng(14);
  auto ds = synthetic_paired(rng, 4, 4, 2, 2);
  auto mcfg = tiny_model(2, 2, 32);

  namespace fs = std::filesystem;
  auto base = fs::temp_directory_path() / "radt_resume_test";
  fs::remove_all(base);

  auto eval_fn = [](nn::ModelParams&, long long step) {
    return std::make_pair(0.5 + 0.001 * step, 0.1);
  };

  TrainConfig full_cfg;
  full_cfg.batch_size = 2;
  full_cfg.total_steps = 40;
  full_cfg.checkpoint_every = 10;
  full_cfg.learning_rate = 1e-3;
  full_cfg.warmup_steps = 5;

  Rng init_a(15);
  nn::ModelParams pa = nn::ModelParams::init(mcfg, init_a);
  TrainOptions oa{(base / "full").string(), 99, std::nullopt};
  auto ra = train_loop(ds, pa, full_cfg, eval_fn, oa);

  // Interrupted: stop at 20, then resume to 40 from the step_20 checkpoint.
  TrainConfig half_cfg = full_cfg;
  half_cfg.total_steps = 20;
  Rng init_b(15);
  nn::ModelParams pb = nn::ModelParams::init(mcfg, init_b);
  TrainOptions ob{(base / "resumed").string(), 99, std::nullopt};
  train_loop(ds, pb, half_cfg, eval_fn, ob);
  TrainOptions oc{(base / "resumed").string(), 99,
                  (fs::path(ob.out_dir) / "ckpt" / "step_20").string()};
  auto rc = train_loop(ds, pb, full_cfg, eval_fn, oc);

  CHECK(rc.records.size() == ra.records.size());
  for (std::size_t i = 0; i < ra.records.size(); ++i) {
    CHECK(rc.records[i].step == ra.records[i].step);
    CHECK(rc.records[i].sr == ra.records[i].sr);
  }
  // Training logs match line for line.
  std::ifstream fa(base / "full" / "training_log.csv");
  std::ifstream fb(base / "resumed" / "training_log.csv");
  std::string la, lb;
  int lines = 0;
  while (std::getline(fa, la)) {
    REQUIRE(std::getline(fb, lb));
    CHECK(la == lb);
    ++lines;
  }
  CHECK(lines == 41);  // header + 40 steps
  CHECK_FALSE(std::getline(fb, lb));

  // Final parameters identical.
  auto na = pa.named_params();
  auto nb = pb.named_params();
  for (std::size_t i = 0; i < na.size(); ++i)
    CHECK(na[i].second.value() == nb[i].second.value());
}
