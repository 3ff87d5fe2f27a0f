#include "unrectify/partition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "unrectify/error.hpp"
#include "unrectify/kernels/kernels.hpp"
#include "unrectify/random.hpp"

namespace unrectify {

std::vector<std::vector<std::size_t>> group_by_key(const std::vector<Pattern>& keys) {
  std::unordered_map<Pattern, std::size_t, KeyHash> slot;
  slot.reserve(keys.size());
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < keys.size(); ++s) {
    auto [it, fresh] = slot.try_emplace(keys[s], groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(s);
  }
  return groups;
}

namespace {

// Deterministic subsample of an oversized group.
std::vector<std::size_t> subsample(std::vector<std::size_t> members) {
  Xoshiro256pp rng(derive_seed(members.size(), members.front()));
  for (std::size_t i = 0; i < kMaxExactGroup; ++i) {
    const std::size_t j = i + rng.below(members.size() - i);
    std::swap(members[i], members[j]);
  }
  members.resize(kMaxExactGroup);
  std::sort(members.begin(), members.end());
  return members;
}

}  // namespace

PartitionCensus census_from_keys(const NodeId& node, const std::vector<Pattern>& keys,
                                 const Matrix& samples) {
  PartitionCensus c;
  c.node = node;
  c.samples = keys.size();
  auto groups = group_by_key(keys);
  c.region_count = groups.size();
  std::vector<std::vector<std::size_t>> multi;
  for (auto& g : groups) {
    if (g.size() < 2) continue;
    c.multi_point_count += g.size();
    if (g.size() > kMaxExactGroup) {
      g = subsample(std::move(g));
      c.subsampled = true;
    }
    multi.push_back(std::move(g));
  }
  c.max_intra_dist = kernels::omp::max_intra_distance(samples, multi);
  return c;
}

std::vector<PartitionCensus> partition_census(const DagNet& net,
                                              const std::vector<NodeId>& nodes,
                                              const Matrix& samples) {
  std::vector<SignaturePlan> plans;
  for (const auto& id : nodes) plans.push_back(signature_plan(net, id));
  const auto keys = kernels::omp::batch_signature_keys(net, plans, samples);
  std::vector<PartitionCensus> out;
  for (std::size_t p = 0; p < nodes.size(); ++p)
    out.push_back(census_from_keys(nodes[p], keys[p], samples));
  return out;
}

PartitionCensus partition_census(const DagNet& net, std::string_view a,
                                 const Matrix& samples) {
  return partition_census(net, std::vector<NodeId>{NodeId(a)}, samples).front();
}

std::uint64_t refinement_check(const DagNet& net, std::string_view a, std::string_view b,
                               const Matrix& samples) {
  const std::size_t ia = net.index_of(a);
  const std::size_t ib = net.index_of(b);
  if (!net.ancestors(ia)[ib])
    throw Error(ErrorCode::kNotInSubgraph,
                std::string(b) + " is not in the computable sub-graph of " + std::string(a));
  const std::vector<SignaturePlan> plans{signature_plan(net, a), signature_plan(net, b)};
  const auto keys = kernels::omp::batch_signature_keys(net, plans, samples);
  return refinement_violations(keys[0], keys[1]);
}

std::uint64_t refinement_violations(const std::vector<Pattern>& keys_a,
                                    const std::vector<Pattern>& keys_b) {
  if (keys_a.size() != keys_b.size())
    throw Error(ErrorCode::kDimMismatch, "key lists differ in length");
  auto pairs = [](std::uint64_t k) { return k < 2 ? 0 : k * (k - 1) / 2; };
  std::uint64_t violations = 0;
  for (const auto& group : group_by_key(keys_a)) {
    std::vector<Pattern> sub;
    sub.reserve(group.size());
    for (auto s : group) sub.push_back(keys_b[s]);
    std::uint64_t same = 0;
    for (const auto& g : group_by_key(sub)) same += pairs(g.size());
    violations += pairs(group.size()) - same;
  }
  return violations;
}

std::uint64_t fusion_partition_bound(const std::vector<std::uint64_t>& counts) {
  std::uint64_t product = 1;
  for (auto n : counts) {
    if (n == 0) throw Error(ErrorCode::kInvalidArgument, "channel region count must be >= 1");
    if (product > std::numeric_limits<std::uint64_t>::max() / n)
      throw Error(ErrorCode::kInvalidArgument, "region bound overflows 64 bits");
    product *= n;
  }
  return product;
}

}  // namespace unrectify
