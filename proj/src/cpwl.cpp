#include "unrectify/cpwl.hpp"

#include <algorithm>
#include <cmath>

#include "unrectify/error.hpp"

namespace unrectify {

CpwlSpec CpwlSpec::relu() { return CpwlSpec{{{1.0, 0.0}}, {}}; }

CpwlSpec CpwlSpec::abs() { return CpwlSpec{{{1.0, 0.0}}, {{1.0, 0.0}}}; }

CpwlSpec CpwlSpec::identity() { return CpwlSpec{{{1.0, 0.0}}, {{-1.0, 0.0}}}; }

void CpwlSpec::check() const {
  if (term_count() > kMaxTerms) {
    throw Error(ErrorCode::kInvalidArgument,
                "CPWL spec has " + std::to_string(term_count()) +
                    " terms, at most 64 supported");
  }
  auto finite = [](const RampTerm& t) {
    return std::isfinite(t.slope) && std::isfinite(t.breakpoint);
  };
  if (!std::all_of(right.begin(), right.end(), finite) ||
      !std::all_of(left.begin(), left.end(), finite)) {
    throw Error(ErrorCode::kInvalidArgument, "CPWL spec has non-finite terms");
  }
}

double cpwl_eval(const CpwlSpec& spec, double x) {
  double acc = 0.0;
  for (const auto& term : spec.right)
    acc += term.slope * std::max(x - term.breakpoint, 0.0);
  for (const auto& term : spec.left)
    acc += term.slope * std::max(term.breakpoint - x, 0.0);
  return acc;
}

UnrectifiedScalar unrectify_diag(const CpwlSpec& spec, double x) {
  UnrectifiedScalar out;
  std::size_t bit = 0;
  for (const auto& term : spec.right) {
    if (x > term.breakpoint) {
      out.slope += term.slope;
      out.active |= std::uint64_t{1} << bit;
    }
    ++bit;
  }
  for (const auto& term : spec.left) {
    if (x < term.breakpoint) {
      out.slope -= term.slope;
      out.active |= std::uint64_t{1} << bit;
    }
    ++bit;
  }
  return out;
}

double cpwl_eval_frozen(const CpwlSpec& spec, std::uint64_t active, double x) {
  double acc = 0.0;
  std::size_t bit = 0;
  for (const auto& term : spec.right) {
    if (active >> bit & 1U) acc += term.slope * (x - term.breakpoint);
    ++bit;
  }
  for (const auto& term : spec.left) {
    if (active >> bit & 1U) acc += term.slope * (term.breakpoint - x);
    ++bit;
  }
  return acc;
}

AffinePiece frozen_piece(const CpwlSpec& spec, std::uint64_t active) {
  AffinePiece piece;
  std::size_t bit = 0;
  for (const auto& term : spec.right) {
    if (active >> bit & 1U) {
      piece.slope += term.slope;
      piece.intercept -= term.slope * term.breakpoint;
    }
    ++bit;
  }
  for (const auto& term : spec.left) {
    if (active >> bit & 1U) {
      piece.slope -= term.slope;
      piece.intercept += term.slope * term.breakpoint;
    }
    ++bit;
  }
  return piece;
}

std::vector<double> breakpoints(const CpwlSpec& spec) {
  std::vector<double> points;
  points.reserve(spec.term_count());
  for (const auto& term : spec.right) points.push_back(term.breakpoint);
  for (const auto& term : spec.left) points.push_back(term.breakpoint);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

double slope_bound(const CpwlSpec& spec) {
  // One probe per piece: each breakpoint, each gap midpoint and both rays.
  // Probing through unrectify_diag keeps the bound bitwise consistent with
  // the diagonal values it bounds.
  const std::vector<double> points = breakpoints(spec);
  if (points.empty()) return 0.0;
  std::vector<double> probes{points.front() - std::max(1.0, std::abs(points.front())),
                             points.back() + std::max(1.0, std::abs(points.back()))};
  for (std::size_t i = 0; i < points.size(); ++i) {
    probes.push_back(points[i]);
    if (i + 1 < points.size()) probes.push_back(0.5 * (points[i] + points[i + 1]));
  }
  double bound = 0.0;
  for (double x : probes) bound = std::max(bound, std::abs(unrectify_diag(spec, x).slope));
  return bound;
}

}  // namespace unrectify
