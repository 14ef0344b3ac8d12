#include "radt/relabel.hpp"

#include <algorithm>

#include "json.hpp"
#include "radt/errors.hpp"

namespace radt {

SamplerKind sampler_kind_from_string(const std::string& s) {
  if (s == "uniform") return SamplerKind::uniform;
  if (s == "restricted") return SamplerKind::restricted;
  if (s == "contour") return SamplerKind::contour;
  if (s == "discrete_top_k") return SamplerKind::discrete_top_k;
  throw ArgumentError("unknown sampler kind: " + s);
}

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::uniform: return "uniform";
    case SamplerKind::restricted: return "restricted";
    case SamplerKind::contour: return "contour";
    case SamplerKind::discrete_top_k: return "discrete_top_k";
  }
  return "?";
}

StateVec relabel_goal(const Trajectory& traj) {
  if (traj.states.empty()) throw ArgumentError("cannot relabel an empty trajectory");
  return traj.states.back();
}

std::optional<Point2> contour_sample_centroid(const std::vector<Point2>& traj2d,
                                              Rng& rng) {
  HullDecomposition d = hull_decompose(traj2d);
  if (d.nooks.empty()) return std::nullopt;
  const Nook& nook = d.nooks[rng.uniform_int(d.nooks.size())];
  double t = rng.uniform();
  return Point2{nook.border_a.x + t * (nook.border_b.x - nook.border_a.x),
                nook.border_a.y + t * (nook.border_b.y - nook.border_a.y)};
}

namespace {

constexpr int kRegionAttempts = 10000;

AvoidBox widthful_box(const StateVec& centroid, double width,
                      const RelabelConfig& cfg,
                      const std::vector<std::pair<double, double>>& bounds) {
  if (cfg.box_dims.empty()) return box_from_centroid(centroid, width);
  std::vector<double> widths(centroid.size());
  for (std::size_t d = 0; d < centroid.size(); ++d)
    widths[d] = bounds[d].second - bounds[d].first;
  std::vector<double> c = centroid;
  for (int d : cfg.box_dims) {
    widths[d] = width;
  }
  // Dimensions outside box_dims span their full bounds.
  for (std::size_t d = 0; d < c.size(); ++d) {
    bool widthful = cfg.box_dims.empty() ||
                    std::find(cfg.box_dims.begin(), cfg.box_dims.end(),
                              static_cast<int>(d)) != cfg.box_dims.end();
    if (!widthful) c[d] = (bounds[d].first + bounds[d].second) / 2.0;
  }
  return box_from_centroid(c, widths);
}

class UniformSampler : public BoxSampler {
 public:
  UniformSampler(std::vector<std::pair<double, double>> bounds, RelabelConfig cfg,
                 std::function<bool(double, double)> region = nullptr)
      : bounds_(std::move(bounds)), cfg_(cfg), region_(std::move(region)) {}

  std::vector<AvoidBox> sample(const Trajectory&, Rng& rng) override {
    std::vector<AvoidBox> boxes;
    boxes.reserve(cfg_.n_avoid);
    for (int j = 0; j < cfg_.n_avoid; ++j) {
      StateVec c = sample_centroid(rng);
      double w = rng.uniform(0.0, cfg_.w_max);
      boxes.push_back(widthful_box(c, w, cfg_, bounds_));
    }
    return boxes;
  }

  std::string last_strategy() const override {
    return region_ ? "restricted" : "uniform";
  }

 protected:
  StateVec sample_centroid(Rng& rng) {
    StateVec c(bounds_.size());
    for (int attempt = 0; attempt < kRegionAttempts; ++attempt) {
      for (std::size_t d = 0; d < bounds_.size(); ++d)
        c[d] = rng.uniform(bounds_[d].first, bounds_[d].second);
      if (!region_ || region_(c[0], c[1])) return c;
    }
    throw SamplerError("restricted region rejected " +
                       std::to_string(kRegionAttempts) +
                       " consecutive centroid samples");
  }

  std::vector<std::pair<double, double>> bounds_;
  RelabelConfig cfg_;
  std::function<bool(double, double)> region_;
};

class ContourSampler : public UniformSampler {
 public:
  ContourSampler(std::vector<std::pair<double, double>> bounds, RelabelConfig cfg)
      : UniformSampler(std::move(bounds), cfg) {}

  std::vector<AvoidBox> sample(const Trajectory& traj, Rng& rng) override {
    std::vector<Point2> proj;
    proj.reserve(traj.states.size());
    for (const auto& s : traj.states)
      if (s.size() >= 2) proj.push_back({s[0], s[1]});

    HullDecomposition d = hull_decompose(proj);
    if (d.nooks.empty()) {
      last_ = "contour_fallback_uniform";
      return UniformSampler::sample(traj, rng);
    }
    last_ = "contour";
    std::vector<AvoidBox> boxes;
    boxes.reserve(cfg_.n_avoid);
    for (int j = 0; j < cfg_.n_avoid; ++j) {
      const Nook& nook = d.nooks[rng.uniform_int(d.nooks.size())];
      double t = rng.uniform();
      StateVec c(bounds_.size());
      c[0] = nook.border_a.x + t * (nook.border_b.x - nook.border_a.x);
      c[1] = nook.border_a.y + t * (nook.border_b.y - nook.border_a.y);
      // Only the first two dims carry contour information; the rest are
      // drawn uniformly as in the naive sampler.
      for (std::size_t dd = 2; dd < bounds_.size(); ++dd)
        c[dd] = rng.uniform(bounds_[dd].first, bounds_[dd].second);
      double w = rng.uniform(0.0, cfg_.w_max);
      boxes.push_back(widthful_box(c, w, cfg_, bounds_));
    }
    return boxes;
  }

  std::string last_strategy() const override { return last_; }

 private:
  std::string last_ = "contour";
};

class DiscreteTopKSampler : public BoxSampler {
 public:
  DiscreteTopKSampler(const std::vector<Trajectory>& dataset, RelabelConfig cfg)
      : cfg_(cfg) {
    if (dataset.empty())
      throw ArgumentError("discrete sampler requires a nonempty dataset");
    std::map<StateVec, std::size_t> counts;
    for (const auto& t : dataset)
      for (const auto& s : t.states) counts[s] += 1;
    // Rank by frequency, ties broken by lexicographic state order.
    std::vector<std::pair<StateVec, std::size_t>> ranked(counts.begin(),
                                                         counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) {
                       if (a.second != b.second) return a.second > b.second;
                       return a.first < b.first;
                     });
    std::size_t k = std::min<std::size_t>(cfg.top_k, ranked.size());
    for (std::size_t i = 0; i < k; ++i) top_states_.push_back(ranked[i].first);
  }

  std::vector<AvoidBox> sample(const Trajectory&, Rng& rng) override {
    std::vector<AvoidBox> boxes;
    boxes.reserve(cfg_.n_avoid);
    for (int j = 0; j < cfg_.n_avoid; ++j) {
      const StateVec& c = top_states_[rng.uniform_int(top_states_.size())];
      boxes.push_back(box_from_centroid(c, 2.0 * cfg_.epsilon));
    }
    return boxes;
  }

  std::string last_strategy() const override { return "discrete_top_k"; }

  const std::vector<StateVec>& top_states() const { return top_states_; }

 private:
  RelabelConfig cfg_;
  std::vector<StateVec> top_states_;
};

}  // namespace

std::unique_ptr<BoxSampler> make_uniform_sampler(
    std::vector<std::pair<double, double>> bounds, RelabelConfig cfg) {
  return std::make_unique<UniformSampler>(std::move(bounds), cfg);
}

std::unique_ptr<BoxSampler> make_restricted_sampler(
    std::vector<std::pair<double, double>> bounds, RelabelConfig cfg,
    std::function<bool(double, double)> region) {
  return std::make_unique<UniformSampler>(std::move(bounds), cfg,
                                          std::move(region));
}

std::unique_ptr<BoxSampler> make_contour_sampler(
    std::vector<std::pair<double, double>> bounds, RelabelConfig cfg) {
  return std::make_unique<ContourSampler>(std::move(bounds), cfg);
}

std::unique_ptr<BoxSampler> make_discrete_top_k_sampler(
    const std::vector<Trajectory>& dataset, RelabelConfig cfg) {
  return std::make_unique<DiscreteTopKSampler>(dataset, cfg);
}

std::unique_ptr<BoxSampler> make_sampler(
    const RelabelConfig& cfg, const EnvSpec& spec,
    const std::vector<Trajectory>& dataset,
    std::function<bool(double, double)> region) {
  switch (cfg.sampler) {
    case SamplerKind::uniform:
      return make_uniform_sampler(spec.state_bounds, cfg);
    case SamplerKind::restricted:
      if (!region)
        throw ArgumentError("restricted sampler requires a region predicate");
      return make_restricted_sampler(spec.state_bounds, cfg, region);
    case SamplerKind::contour:
      return make_contour_sampler(spec.state_bounds, cfg);
    case SamplerKind::discrete_top_k:
      return make_discrete_top_k_sampler(dataset, cfg);
  }
  throw ArgumentError("unknown sampler kind");
}

std::vector<LabeledTrajectory> first_pass(const std::vector<Trajectory>& dataset,
                                          BoxSampler& sampler, std::uint64_t seed,
                                          RelabelReport* report) {
  std::vector<LabeledTrajectory> out;
  out.reserve(dataset.size());
  std::size_t z1 = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    Rng rng(Rng::derive_seed(seed, "relabel-first", i));
    std::vector<AvoidBox> boxes = sampler.sample(dataset[i], rng);
    out.push_back(make_labeled(dataset[i], std::move(boxes),
                               relabel_goal(dataset[i])));
    z1 += out.back().prompt.z;
    if (report) report->sampler_histogram[sampler.last_strategy()] += 1;
  }
  if (report) {
    report->input_count = dataset.size();
    report->first_pass_z1_fraction =
        dataset.empty() ? 0.0 : static_cast<double>(z1) / dataset.size();
  }
  return out;
}

PairedDataset second_pass(const std::vector<LabeledTrajectory>& labeled,
                          BoxSampler& sampler, const RelabelConfig& cfg,
                          std::uint64_t seed, RelabelReport* report) {
  PairedDataset out;
  std::size_t dropped = 0;
  std::size_t total_attempts = 0;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    Rng rng(Rng::derive_seed(seed, "relabel-second", i));
    const LabeledTrajectory& orig = labeled[i];
    const int want = 1 - orig.prompt.z;
    bool found = false;
    for (int attempt = 1; attempt <= cfg.max_resample_attempts; ++attempt) {
      std::vector<AvoidBox> boxes = sampler.sample(orig.trajectory, rng);
      if (avoid_success(orig.trajectory, boxes) == want) {
        LabeledTrajectory copy = make_labeled(orig.trajectory, std::move(boxes),
                                              orig.prompt.goal);
        out.pairs.push_back({orig, std::move(copy)});
        total_attempts += attempt;
        found = true;
        break;
      }
    }
    if (!found) ++dropped;  // exhausted: drop the pair, count it
  }
  if (report) {
    report->pair_count = out.pairs.size();
    report->dropped_count = dropped;
    report->mean_second_pass_attempts =
        out.pairs.empty() ? 0.0
                          : static_cast<double>(total_attempts) / out.pairs.size();
  }
  return out;
}

std::pair<PairedDataset, RelabelReport> build_paired_dataset(
    const std::vector<Trajectory>& dataset, BoxSampler& sampler,
    const RelabelConfig& cfg, std::uint64_t seed) {
  RelabelReport report;
  auto labeled = first_pass(dataset, sampler, seed, &report);
  auto paired = second_pass(labeled, sampler, cfg, seed, &report);
  return {std::move(paired), std::move(report)};
}

std::string RelabelReport::to_json() const {
  nlohmann::json j;
  j["input_count"] = input_count;
  j["pair_count"] = pair_count;
  j["dropped_count"] = dropped_count;
  j["first_pass_z1_fraction"] = first_pass_z1_fraction;
  j["mean_second_pass_attempts"] = mean_second_pass_attempts;
  j["sampler_histogram"] = sampler_histogram;
  return j.dump(2);
}

}  // namespace radt
