#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "radt/env.hpp"
#include "radt/hull.hpp"
#include "radt/types.hpp"

namespace radt {

enum class SamplerKind { uniform, restricted, contour, discrete_top_k };

SamplerKind sampler_kind_from_string(const std::string& s);
std::string to_string(SamplerKind k);

struct RelabelConfig {
  double w_max = 0.16;
  int n_avoid = 1;
  SamplerKind sampler = SamplerKind::uniform;
  int top_k = 20;           // discrete sampler
  double epsilon = 0.001;   // discrete box margin
  int max_resample_attempts = 1000;
  /// Dimensions that receive the sampled width; the rest span their full
  /// bounds (e.g. maze velocity coordinates). Empty = all dimensions.
  std::vector<int> box_dims;
};

/// Per-trajectory avoid-box source used by both relabeling passes.
class BoxSampler {
 public:
  virtual ~BoxSampler() = default;
  virtual std::vector<AvoidBox> sample(const Trajectory& traj, Rng& rng) = 0;
  /// Name of the strategy that produced the last sample (for the report;
  /// the contour sampler falls back to uniform when a trajectory has no nook).
  virtual std::string last_strategy() const = 0;
};

std::unique_ptr<BoxSampler> make_uniform_sampler(
    std::vector<std::pair<double, double>> bounds, RelabelConfig cfg);

/// Uniform sampler whose centroids are rejection-resampled until `region`
/// accepts the (x, y) position projection.
std::unique_ptr<BoxSampler> make_restricted_sampler(
    std::vector<std::pair<double, double>> bounds, RelabelConfig cfg,
    std::function<bool(double, double)> region);

/// Contour-based sampler: centroids are placed across the mouths of concave
/// nooks of the trajectory's 2D projection, so the trajectory appears to
/// wrap around them. Falls back to uniform when no nook exists.
std::unique_ptr<BoxSampler> make_contour_sampler(
    std::vector<std::pair<double, double>> bounds, RelabelConfig cfg);

/// Discrete sampler: centroids drawn from the top_k most frequent states of
/// the dataset; boxes are centroid +- epsilon per dimension.
std::unique_ptr<BoxSampler> make_discrete_top_k_sampler(
    const std::vector<Trajectory>& dataset, RelabelConfig cfg);

std::unique_ptr<BoxSampler> make_sampler(
    const RelabelConfig& cfg, const EnvSpec& spec,
    const std::vector<Trajectory>& dataset,
    std::function<bool(double, double)> region = nullptr);

/// Hindsight goal: the final state of the trajectory.
StateVec relabel_goal(const Trajectory& traj);

/// Uniform centroid on the segment between the flanking border points of a
/// uniformly chosen nook; nullopt when the trajectory has no nook.
std::optional<Point2> contour_sample_centroid(const std::vector<Point2>& traj2d,
                                              Rng& rng);

struct RelabelReport {
  std::size_t input_count = 0;
  std::size_t pair_count = 0;
  std::size_t dropped_count = 0;
  double first_pass_z1_fraction = 0.0;
  double mean_second_pass_attempts = 0.0;
  std::map<std::string, std::size_t> sampler_histogram;

  std::string to_json() const;
};

/// Initial pass: one box set per trajectory, z from avoid_success, goal from
/// relabel_goal, per-step k_t sequence attached.
std::vector<LabeledTrajectory> first_pass(const std::vector<Trajectory>& dataset,
                                          BoxSampler& sampler,
                                          std::uint64_t seed,
                                          RelabelReport* report = nullptr);

/// Second pass: per trajectory, resample boxes until z flips; pairs whose
/// copy never flips within max_resample_attempts are dropped (and counted).
PairedDataset second_pass(const std::vector<LabeledTrajectory>& labeled,
                          BoxSampler& sampler, const RelabelConfig& cfg,
                          std::uint64_t seed, RelabelReport* report = nullptr);

/// first_pass then second_pass under one master seed.
std::pair<PairedDataset, RelabelReport> build_paired_dataset(
    const std::vector<Trajectory>& dataset, BoxSampler& sampler,
    const RelabelConfig& cfg, std::uint64_t seed);

}  // namespace radt
