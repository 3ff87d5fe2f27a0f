#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace unrectify {

/// One ReLU term of a CPWL function: `slope * ReLU(x - breakpoint)` for a
/// right term, `slope * ReLU(breakpoint - x)` for a left term.
struct RampTerm {
  double slope = 0.0;
  double breakpoint = 0.0;

  friend bool operator==(const RampTerm&, const RampTerm&) = default;
};

/// Univariate continuous piecewise-linear function written as a superposition
/// of ReLU ramps:
///
///   rho(x) = sum_i r_i ReLU(x - a_i) + sum_j l_j ReLU(t_j - x)
///
/// Active-set bitmasks put right terms in bits [0, right.size()) and left
/// terms in the bits that follow, so a spec holds at most 64 terms.
struct CpwlSpec {
  std::vector<RampTerm> right;
  std::vector<RampTerm> left;

  static constexpr std::size_t kMaxTerms = 64;

  static CpwlSpec relu();
  /// |x| = ReLU(x) + ReLU(-x).
  static CpwlSpec abs();
  /// x = ReLU(x) - ReLU(-x).
  static CpwlSpec identity();

  std::size_t term_count() const { return right.size() + left.size(); }

  /// Throws InvalidArgument on non-finite parameters or too many terms.
  void check() const;

  friend bool operator==(const CpwlSpec&, const CpwlSpec&) = default;
};

double cpwl_eval(const CpwlSpec& spec, double x);

struct UnrectifiedScalar {
  double slope = 0.0;
  std::uint64_t active = 0;
};

/// Slope of the affine piece selected at x, with the active-term bitmask.
/// At x == a_i the right term is inactive; at x == t_j the left term is too.
UnrectifiedScalar unrectify_diag(const CpwlSpec& spec, double x);

/// Re-applies the affine piece identified by `active` to x. For the mask
/// that unrectify_diag(spec, x) returns this equals cpwl_eval(spec, x)
/// bitwise.
double cpwl_eval_frozen(const CpwlSpec& spec, std::uint64_t active, double x);

/// Affine piece for a frozen mask: value = slope * x + intercept.
struct AffinePiece {
  double slope = 0.0;
  double intercept = 0.0;
};
AffinePiece frozen_piece(const CpwlSpec& spec, std::uint64_t active);

/// max |diagonal value| over every input: open pieces between sorted
/// breakpoints plus the breakpoints themselves.
double slope_bound(const CpwlSpec& spec);

/// Sorted unique breakpoints of the spec.
std::vector<double> breakpoints(const CpwlSpec& spec);

}  // namespace unrectify
