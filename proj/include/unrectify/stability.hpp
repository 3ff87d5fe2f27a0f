#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "unrectify/dag.hpp"

namespace unrectify {

enum class NormKind { kSpectral, kFrobenius };

std::string to_string(NormKind kind);
/// "spectral" or "frobenius"; throws InvalidArgument otherwise.
NormKind parse_norm(std::string_view name);

/// Largest singular value by power iteration on W^T W from a fixed-seed
/// start vector. Stops when the relative change of the eigenvalue estimate
/// drops below tol, or after 10^4 iterations. Throws NonFinite.
double spectral_norm(const Matrix& W, double tol = 1e-9);

/// ||W_ab|| of one arc; weightless arcs count as the identity of their
/// pre-activation dimension (1 spectral, sqrt(k) Frobenius).
double arc_norm(const ArcOp& op, NormKind norm);

/// d = max uniform_bound over all arcs (1 for an arcless net).
double network_uniform_bound(const DagNet& net);

/// s_n = d * sum of arc norms over arcs into level-n nodes. Throws
/// LevelOutOfRange unless 1 <= n <= L.
double level_weight_sum(const DagNet& net, std::size_t n, NormKind norm);

/// Region-independent recursion C(0) = 1,
/// C(n) = d * sum_{a in level n} sum_{b -> a} ||W_ab|| C(l(b)); entry n is C(n).
std::vector<double> lipschitz_level_bounds(const DagNet& net, NormKind norm);
double lipschitz_upper_bound(const DagNet& net, NormKind norm);

/// Level sums within this slack of 1 count as satisfied.
inline constexpr double kLevelSlack = 1e-9;

struct StabilityReport {
  NormKind norm = NormKind::kSpectral;
  double d = 1.0;
  std::vector<double> level_sums;  // entry k is s_{k+1}
  std::optional<std::size_t> m;
  bool certified = false;
  double lipschitz_bound = 1.0;
  std::optional<double> empirical_gain;
  std::size_t pair_count = 0;
  bool pairs_subsampled = false;
};

StabilityReport stability_certificate(const DagNet& net, NormKind norm);

/// Rescales the weights (not biases) of every level with s_n > 1 by one
/// factor so that s_n = 1. Throws Unscalable when the weightless arcs of a
/// level already reach the limit.
DagNet scale_to_stability(const DagNet& net, NormKind norm);

/// max |N(x) - N(y)| / |x - y|; throws DegeneratePair on x == y.
double empirical_max_gain(const DagNet& net,
                          const std::vector<std::pair<Vector, Vector>>& pairs);

/// Pairs of sample rows used for gain estimates: every unordered pair when
/// n <= kAllPairsLimit, otherwise kSampledPairs seeded random pairs.
struct PairSelection {
  bool all = true;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // when !all
  std::size_t count = 0;
};

inline constexpr std::size_t kAllPairsLimit = 2000;
inline constexpr std::size_t kSampledPairs = 2000000;

PairSelection select_pairs(std::size_t n, std::uint64_t seed);

/// Max gain of level_output(n) for each requested level over the selected
/// pairs of sample rows.
std::vector<double> empirical_level_gains(const DagNet& net, const Matrix& samples,
                                          const std::vector<std::size_t>& levels,
                                          const PairSelection& pairs);

/// ||I - W2 W1||_2 <= 1. Throws ShapeError unless W2 W1 is square.
bool resnet_stability_check(const Matrix& W1, const Matrix& W2);

}  // namespace unrectify
