#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "radt/types.hpp"

namespace radt {

/// First record of every dataset file. `manifest` carries provenance
/// (tool version, config hash, seed) and rides along untouched.
struct DatasetHeader {
  int version = 1;
  int d_s = 0;
  int d_a = 0;
  std::string env;
  std::string tool_version;
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct RawDataset {
  DatasetHeader header;
  std::vector<Trajectory> trajectories;

  std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto& t : trajectories) n += t.length();
    return n;
  }
};

struct PairedDatasetFile {
  DatasetHeader header;
  PairedDataset data;

  /// Flattened view: every pair contributes its orig then its copy.
  std::vector<const LabeledTrajectory*> entries() const;
};

void write_raw_dataset(const std::string& path, const RawDataset& ds);
RawDataset read_raw_dataset(const std::string& path);

void write_paired_dataset(const std::string& path, const PairedDatasetFile& ds);
PairedDatasetFile read_paired_dataset(const std::string& path);

}  // namespace radt
