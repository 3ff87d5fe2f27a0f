#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unrectify/partition.hpp"
#include "unrectify/serialize.hpp"
#include "unrectify/stability.hpp"

namespace unrectify {

/// n x dim matrix of i.i.d. standard-normal rows from a stream of `seed`.
Matrix normal_samples(std::size_t n, std::size_t dim, std::uint64_t seed);

struct PartitionConfig {
  std::size_t layers = 5;
  std::size_t dim = 14;
  std::size_t samples = 5000;
  std::uint64_t seed = 7;
};

struct PartitionRow {
  std::size_t layer = 0;
  std::string channel;  // top | bottom | fusion, or a node id
  PartitionCensus census;
};

/// Fusion stack censuses at every layer's top, bottom and fusion nodes.
std::vector<PartitionRow> run_partition_experiment(const PartitionConfig& config);

/// Censuses of arbitrary nodes; the layer column is the node's l-value.
std::vector<PartitionRow> run_census(const DagNet& net, const std::vector<NodeId>& nodes,
                                     const Matrix& samples);

/// "layer,channel,region_count,multi_point_count,max_intra_dist".
std::string partition_csv(const std::vector<PartitionRow>& rows);

struct GainConfig {
  std::size_t layers = 5;
  std::size_t dim = 20;
  std::size_t samples = 500;
  std::uint64_t seed = 7;
  bool scaled = false;
  NormKind norm = NormKind::kFrobenius;
};

struct GainResult {
  std::vector<double> layer_gains;  // empty without sample pairs
  StabilityReport report;
};

/// Fusion stack, optionally rescaled, with per-layer max gains measured at
/// the fusion nodes over the selected sample pairs.
GainResult run_stability_experiment(const GainConfig& config);

/// "layer,max_gain".
std::string gain_csv(const std::vector<double>& gains);
/// "level,sum_spectral,sum_frobenius".
std::string level_sums_csv(const DagNet& net);
Json report_to_json(const StabilityReport& report);

}  // namespace unrectify
