#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "unrectify/cpwl.hpp"
#include "unrectify/linalg.hpp"

namespace unrectify {

// ---------------------------------------------------------------------------
// Activations (CPWL, carry partition semantics)

struct Relu {
  friend bool operator==(const Relu&, const Relu&) = default;
};

/// max(x1, x2, 0) applied block-wise to consecutive pairs; maps 2k -> k.
struct MaxLu2 {
  friend bool operator==(const MaxLu2&, const MaxLu2&) = default;
};

/// One CPWL function applied to every coordinate.
struct Cpwl {
  CpwlSpec spec;
  friend bool operator==(const Cpwl&, const Cpwl&) = default;
};

/// A CPWL function per coordinate; the diagonal operator of mixed pieces
/// used by the max-pool lowering.
struct CpwlDiag {
  std::vector<CpwlSpec> specs;
  friend bool operator==(const CpwlDiag&, const CpwlDiag&) = default;
};

using Activation = std::variant<Relu, MaxLu2, Cpwl, CpwlDiag>;

std::string activation_name(const Activation& act);

/// Output dimension for an input of dimension n; throws DimMismatch when the
/// activation cannot take n inputs.
std::size_t activation_out_dim(const Activation& act, std::size_t n);

struct ActivationResult {
  Vector out;
  Pattern pattern;
};

ActivationResult activation_apply(const Activation& act, const Vector& v);

/// Re-applies the linear/affine map selected by `pattern` to v. Reproduces
/// activation_apply(act, v).out bitwise when pattern came from v.
Vector activation_apply_frozen(const Activation& act, const Pattern& pattern,
                               const Vector& v);

/// The frozen map as an explicit affine pair: out = slope * v + offset.
struct FrozenAffine {
  Matrix slope;
  Vector offset;
};
FrozenAffine activation_frozen_affine(const Activation& act,
                                      const Pattern& pattern,
                                      std::size_t in_dim);

/// d_rho: uniform bound on the spectral norm of every un-rectifying matrix.
double activation_bound(const Activation& act);

// ---------------------------------------------------------------------------
// Non-linear transforms (Lipschitz, no partition semantics)

struct Softmax {
  double lambda = 1.0;
  friend bool operator==(const Softmax&, const Softmax&) = default;
};
struct Sigmoid {
  friend bool operator==(const Sigmoid&, const Sigmoid&) = default;
};
struct Tanh {
  friend bool operator==(const Tanh&, const Tanh&) = default;
};

/// Attention scores: input [q_1..q_T ; k_1..k_T], output T*T row-major
/// cosine similarities <q_i/|q_i|, k_j/|k_j|>. Bilinear, not globally
/// Lipschitz.
struct InnerProducts {
  std::size_t seq_len = 0;
  std::size_t head_dim = 0;
  friend bool operator==(const InnerProducts&, const InnerProducts&) = default;
};

/// Value mixing: input [p (T*T row-major) ; v_1..v_T], output
/// b_i = sum_j p_ij v_j. Bilinear, not globally Lipschitz.
struct MixValues {
  std::size_t seq_len = 0;
  std::size_t head_dim = 0;
  friend bool operator==(const MixValues&, const MixValues&) = default;
};

using Transform = std::variant<Softmax, Sigmoid, Tanh, InnerProducts, MixValues>;

std::string transform_name(const Transform& t);
std::size_t transform_out_dim(const Transform& t, std::size_t n);
Vector transform_apply(const Transform& t, const Vector& v);
/// d_sigma: Lipschitz bound used for the transform (+inf when unbounded).
double transform_bound(const Transform& t);

// ---------------------------------------------------------------------------
// Arc operations: the basic set {I, L, M, rho, rho M, sigma, sigma M}

enum class OpKind {
  kIdentity,
  kLinear,
  kAffine,
  kActivation,
  kActivationAffine,
  kTransform,
  kTransformAffine,
};

std::string to_string(OpKind kind);

class ArcOp {
 public:
  static ArcOp identity(std::size_t dim);
  static ArcOp linear(Matrix weight);
  static ArcOp affine(Matrix weight, Vector bias);
  static ArcOp activation(Activation act, std::size_t dim);
  static ArcOp activation_affine(Activation act, Matrix weight, Vector bias);
  static ArcOp transform(Transform t, std::size_t dim);
  static ArcOp transform_affine(Transform t, Matrix weight, Vector bias);

  OpKind kind() const { return kind_; }
  std::size_t in_dim() const;
  std::size_t out_dim() const;

  bool has_weight() const;
  bool has_bias() const;
  const Matrix& weight() const { return weight_; }
  const Vector& bias() const { return bias_; }
  bool is_activation() const;
  bool is_transform() const;
  const Activation& activation() const;
  const Transform& transform() const;

  /// Dimension of the vector entering the activation/transform stage.
  std::size_t pre_dim() const;

  /// Copy with the linear part multiplied by `factor`; bias untouched.
  ArcOp scaled(double factor) const;

  struct Result {
    Vector out;
    Pattern pattern;  // empty unless is_activation()
  };
  Result apply(const Vector& x) const;

  /// Throws DimMismatch / InvalidArgument / NonFinite on an inconsistent op.
  void check() const;

  friend bool operator==(const ArcOp& a, const ArcOp& b);

 private:
  ArcOp() = default;

  OpKind kind_ = OpKind::kIdentity;
  std::size_t dim_ = 0;
  Matrix weight_;
  Vector bias_;
  std::optional<Activation> activation_;
  std::optional<Transform> transform_;
};

/// Per-arc uniform bound: d_rho for activation arcs, d_sigma for transform
/// arcs, 1 for identity/linear/affine arcs.
double uniform_bound(const ArcOp& op);

}  // namespace unrectify
