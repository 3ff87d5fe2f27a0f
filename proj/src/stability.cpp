#include "unrectify/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unrectify/error.hpp"
#include "unrectify/forward.hpp"
#include "unrectify/kernels/kernels.hpp"
#include "unrectify/random.hpp"

namespace unrectify {

std::string to_string(NormKind kind) {
  return kind == NormKind::kSpectral ? "spectral" : "frobenius";
}

NormKind parse_norm(std::string_view name) {
  if (name == "spectral") return NormKind::kSpectral;
  if (name == "frobenius") return NormKind::kFrobenius;
  throw Error(ErrorCode::kInvalidArgument, "unknown norm '" + std::string(name) + "'");
}

double spectral_norm(const Matrix& W, double tol) {
  if (!W.allFinite()) throw Error(ErrorCode::kNonFinite, "matrix has non-finite entries");
  if (W.size() == 0) return 0.0;
  constexpr int kMaxIter = 10000;
  NormalSampler start(derive_seed(0x5bec7a1ULL, static_cast<std::uint64_t>(W.rows()),
                                  static_cast<std::uint64_t>(W.cols())));
  Vector v = start.vector(W.cols());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector w = W.transpose() * (W * v);
    const double next = w.norm();
    if (!std::isfinite(next)) throw Error(ErrorCode::kNonFinite, "power iteration overflowed");
    if (next == 0.0) return 0.0;
    v = w / next;
    const bool done = std::abs(next - lambda) <= tol * next;
    lambda = next;
    if (done) break;
  }
  return std::sqrt(lambda);
}

double arc_norm(const ArcOp& op, NormKind norm) {
  if (op.has_weight())
    return norm == NormKind::kSpectral ? spectral_norm(op.weight()) : op.weight().norm();
  return norm == NormKind::kSpectral ? 1.0 : std::sqrt(static_cast<double>(op.pre_dim()));
}

double network_uniform_bound(const DagNet& net) {
  double d = 0.0;
  for (const auto& arc : net.arcs()) d = std::max(d, uniform_bound(arc.op));
  return net.arcs().empty() ? 1.0 : d;
}

namespace {

// d * x with the convention d * 0 = 0 for an unbounded d.
double times(double d, double x) { return x == 0.0 ? 0.0 : d * x; }

struct LevelParts {
  double weighted = 0.0;    // arcs whose linear part can be rescaled
  double weightless = 0.0;  // identity / bare activation / bare transform arcs
};

std::vector<LevelParts> level_parts(const DagNet& net, NormKind norm) {
  std::vector<LevelParts> parts(net.levels().L + 1);
  for (std::size_t a = 0; a < net.arcs().size(); ++a) {
    const ArcOp& op = net.arcs()[a].op;
    auto& p = parts[net.level_of(net.arc_target(a))];
    (op.has_weight() ? p.weighted : p.weightless) += arc_norm(op, norm);
  }
  return parts;
}

}  // namespace

double level_weight_sum(const DagNet& net, std::size_t n, NormKind norm) {
  if (n < 1 || n > net.levels().L)
    throw Error(ErrorCode::kLevelOutOfRange,
                "level " + std::to_string(n) + " outside 1.." + std::to_string(net.levels().L));
  double sum = 0.0;
  for (const auto& id : net.levels().levels[n])
    for (auto a : net.in_arcs(net.index_of(id))) sum += arc_norm(net.arcs()[a].op, norm);
  return times(network_uniform_bound(net), sum);
}

std::vector<double> lipschitz_level_bounds(const DagNet& net, NormKind norm) {
  const double d = network_uniform_bound(net);
  const LevelMap& lm = net.levels();
  std::vector<double> C(lm.L + 1, 0.0);
  C[0] = 1.0;
  for (std::size_t n = 1; n <= lm.L; ++n) {
    double sum = 0.0;
    for (const auto& id : lm.levels[n])
      for (auto a : net.in_arcs(net.index_of(id)))
        sum += arc_norm(net.arcs()[a].op, norm) * C[net.level_of(net.arc_source(a))];
    C[n] = times(d, sum);
  }
  return C;
}

double lipschitz_upper_bound(const DagNet& net, NormKind norm) {
  return lipschitz_level_bounds(net, norm).back();
}

StabilityReport stability_certificate(const DagNet& net, NormKind norm) {
  StabilityReport r;
  r.norm = norm;
  r.d = network_uniform_bound(net);
  const auto parts = level_parts(net, norm);
  const std::size_t L = net.levels().L;
  for (std::size_t n = 1; n <= L; ++n)
    r.level_sums.push_back(times(r.d, parts[n].weighted + parts[n].weightless));
  // An arcless net has no levels to check and is certified from level 1.
  std::size_t m = L + 1;
  if (L == 0) m = 1;
  while (m > 1 && r.level_sums[m - 2] <= 1.0 + kLevelSlack) --m;
  if (m <= std::max<std::size_t>(L, 1)) r.m = m;
  r.certified = r.m.has_value();
  r.lipschitz_bound = lipschitz_upper_bound(net, norm);
  return r;
}

DagNet scale_to_stability(const DagNet& net, NormKind norm) {
  const double d = network_uniform_bound(net);
  const auto parts = level_parts(net, norm);
  std::vector<double> factor(parts.size(), 1.0);
  for (std::size_t n = 1; n < parts.size(); ++n) {
    const auto& p = parts[n];
    if (times(d, p.weighted + p.weightless) <= 1.0 + kLevelSlack) continue;
    const double c = p.weighted > 0.0 ? (1.0 / d - p.weightless) / p.weighted : 0.0;
    if (!(c > 0.0))
      throw Error(ErrorCode::kUnscalable,
                  "level " + std::to_string(n) + ": weightless arcs contribute " +
                      std::to_string(d * p.weightless) + " on their own");
    factor[n] = c;
  }
  std::vector<ArcOp> ops;
  ops.reserve(net.arcs().size());
  for (std::size_t a = 0; a < net.arcs().size(); ++a) {
    const double c = factor[net.level_of(net.arc_target(a))];
    ops.push_back(c == 1.0 ? net.arcs()[a].op : net.arcs()[a].op.scaled(c));
  }
  return net.with_ops(std::move(ops));
}

double empirical_max_gain(const DagNet& net,
                          const std::vector<std::pair<Vector, Vector>>& pairs) {
  double best = 0.0;
  for (const auto& [x, y] : pairs) {
    const double dx = (x - y).norm();
    if (dx == 0.0) throw Error(ErrorCode::kDegeneratePair, "pair with x == y");
    const double dy = (forward(net, x).output - forward(net, y).output).norm();
    best = std::max(best, dy / dx);
  }
  return best;
}

PairSelection select_pairs(std::size_t n, std::uint64_t seed) {
  PairSelection sel;
  if (n <= kAllPairsLimit) {
    sel.count = n < 2 ? 0 : n * (n - 1) / 2;
    return sel;
  }
  sel.all = false;
  Xoshiro256pp rng(derive_seed(seed, 0x9a125ULL));
  sel.pairs.reserve(kSampledPairs);
  while (sel.pairs.size() < kSampledPairs) {
    auto i = static_cast<std::size_t>(rng.below(n));
    auto j = static_cast<std::size_t>(rng.below(n));
    if (i == j) continue;
    sel.pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  sel.count = sel.pairs.size();
  return sel;
}

std::vector<double> empirical_level_gains(const DagNet& net, const Matrix& samples,
                                          const std::vector<std::size_t>& levels,
                                          const PairSelection& pairs) {
  const auto outs = kernels::omp::batch_level_outputs(net, levels, samples);
  std::vector<double> gains;
  for (const auto& out : outs)
    gains.push_back(pairs.all ? kernels::omp::max_gain_all_pairs(samples, out)
                              : kernels::omp::max_gain_pairs(samples, out, pairs.pairs));
  return gains;
}

bool resnet_stability_check(const Matrix& W1, const Matrix& W2) {
  if (W2.cols() != W1.rows() || W2.rows() != W1.cols())
    throw Error(ErrorCode::kShapeError,
                "W2 W1 must be square: W1 is " + std::to_string(W1.rows()) + "x" +
                    std::to_string(W1.cols()) + ", W2 is " + std::to_string(W2.rows()) + "x" +
                    std::to_string(W2.cols()));
  const Matrix P = W2 * W1;
  const Matrix R = Matrix::Identity(P.rows(), P.cols()) - P;
  return spectral_norm(R) <= 1.0 + 1e-12;
}

}  // namespace unrectify
