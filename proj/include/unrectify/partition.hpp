#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "unrectify/forward.hpp"

namespace unrectify {

struct PartitionCensus {
  NodeId node;
  std::size_t samples = 0;
  std::size_t region_count = 0;
  /// Samples lying in regions that hold at least two samples.
  std::size_t multi_point_count = 0;
  double max_intra_dist = 0.0;
  /// A group above kMaxExactGroup was subsampled for max_intra_dist.
  bool subsampled = false;
};

inline constexpr std::size_t kMaxExactGroup = 10000;

/// Sample indices grouped by equal key, groups in order of first appearance.
std::vector<std::vector<std::size_t>> group_by_key(const std::vector<Pattern>& keys);

/// Census of samples (one per row) already grouped by key.
PartitionCensus census_from_keys(const NodeId& node, const std::vector<Pattern>& keys,
                                 const Matrix& samples);

PartitionCensus partition_census(const DagNet& net, std::string_view a,
                                 const Matrix& samples);

/// Censuses for several nodes from one forward pass per sample.
std::vector<PartitionCensus> partition_census(const DagNet& net,
                                              const std::vector<NodeId>& nodes,
                                              const Matrix& samples);

/// Sample pairs with equal signature at a but different signature at b.
/// Throws NotInSubgraph unless b lies in computable_subgraph(a).
std::uint64_t refinement_check(const DagNet& net, std::string_view a, std::string_view b,
                               const Matrix& samples);

/// Pair count behind refinement_check, from per-sample keys at a and b.
std::uint64_t refinement_violations(const std::vector<Pattern>& keys_a,
                                    const std::vector<Pattern>& keys_b);

/// Product of per-channel region counts. Throws InvalidArgument on a zero
/// count or on overflow.
std::uint64_t fusion_partition_bound(const std::vector<std::uint64_t>& counts);

}  // namespace unrectify
