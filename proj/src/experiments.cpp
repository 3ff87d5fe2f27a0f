#include "unrectify/experiments.hpp"

#include <cmath>

#include "unrectify/builders.hpp"
#include "unrectify/error.hpp"
#include "unrectify/random.hpp"

namespace unrectify {

Matrix normal_samples(std::size_t n, std::size_t dim, std::uint64_t seed) {
  NormalSampler rng(derive_seed(seed, 0x5a3b1eULL));
  return rng.matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
}

std::vector<PartitionRow> run_partition_experiment(const PartitionConfig& config) {
  const DagNet net = build_fusion_stack(config.layers, config.dim, config.seed);
  const Matrix samples = normal_samples(config.samples, config.dim, config.seed);
  const char* channels[] = {"top", "bottom", "fusion"};
  std::vector<NodeId> nodes;
  for (std::size_t j = 1; j <= config.layers; ++j)
    for (const char* c : channels) nodes.push_back(fusion_node(j, c));
  const auto censuses = partition_census(net, nodes, samples);
  std::vector<PartitionRow> rows;
  for (std::size_t k = 0; k < censuses.size(); ++k)
    rows.push_back({k / 3 + 1, channels[k % 3], censuses[k]});
  return rows;
}

std::vector<PartitionRow> run_census(const DagNet& net, const std::vector<NodeId>& nodes,
                                     const Matrix& samples) {
  const auto censuses = partition_census(net, nodes, samples);
  std::vector<PartitionRow> rows;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    rows.push_back({net.level_of(net.index_of(nodes[k])), nodes[k], censuses[k]});
  return rows;
}

std::string partition_csv(const std::vector<PartitionRow>& rows) {
  std::string csv = "layer,channel,region_count,multi_point_count,max_intra_dist\n";
  for (const auto& r : rows)
    csv += std::to_string(r.layer) + "," + r.channel + "," +
           std::to_string(r.census.region_count) + "," +
           std::to_string(r.census.multi_point_count) + "," +
           format_report(r.census.max_intra_dist) + "\n";
  return csv;
}

GainResult run_stability_experiment(const GainConfig& config) {
  DagNet net = build_fusion_stack(config.layers, config.dim, config.seed);
  if (config.scaled) net = scale_to_stability(net, config.norm);
  GainResult result;
  result.report = stability_certificate(net, config.norm);
  const PairSelection pairs = select_pairs(config.samples, config.seed);
  if (pairs.count == 0) return result;
  const Matrix samples = normal_samples(config.samples, config.dim, config.seed);
  std::vector<std::size_t> levels;
  for (std::size_t j = 1; j <= config.layers; ++j)
    levels.push_back(net.level_of(net.index_of(fusion_node(j, "fusion"))));
  result.layer_gains = empirical_level_gains(net, samples, levels, pairs);
  result.report.empirical_gain = result.layer_gains.back();
  result.report.pair_count = pairs.count;
  result.report.pairs_subsampled = !pairs.all;
  return result;
}

std::string gain_csv(const std::vector<double>& gains) {
  std::string csv = "layer,max_gain\n";
  for (std::size_t j = 0; j < gains.size(); ++j)
    csv += std::to_string(j + 1) + "," + format_report(gains[j]) + "\n";
  return csv;
}

std::string level_sums_csv(const DagNet& net) {
  const auto spectral = stability_certificate(net, NormKind::kSpectral).level_sums;
  const auto frobenius = stability_certificate(net, NormKind::kFrobenius).level_sums;
  std::string csv = "level,sum_spectral,sum_frobenius\n";
  for (std::size_t n = 0; n < spectral.size(); ++n)
    csv += std::to_string(n + 1) + "," + format_report(spectral[n]) + "," +
           format_report(frobenius[n]) + "\n";
  return csv;
}

namespace {

// JSON has no infinity; unbounded values are written as the string "inf".
Json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return std::stod(format_report(v));
}

}  // namespace

Json report_to_json(const StabilityReport& r) {
  Json j;
  j["norm"] = to_string(r.norm);
  j["d"] = number(r.d);
  Json sums = Json::array();
  for (double s : r.level_sums) sums.push_back(number(s));
  j["level_sums"] = sums;
  j["m"] = r.m ? Json(*r.m) : Json(nullptr);
  j["certified"] = r.certified;
  j["lipschitz_bound"] = number(r.lipschitz_bound);
  if (r.empirical_gain) {
    j["empirical_gain"] = number(*r.empirical_gain);
    j["pairs"] = r.pair_count;
    j["pairs_subsampled"] = r.pairs_subsampled;
  }
  return j;
}

}  // namespace unrectify
