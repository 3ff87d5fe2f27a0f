#include "unrectify/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "unrectify/error.hpp"

namespace unrectify {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string dims(std::size_t a, std::size_t b) {
  return std::to_string(a) + " vs " + std::to_string(b);
}

}  // namespace

// ---------------------------------------------------------------------------
// Activations

std::string activation_name(const Activation& act) {
  return std::visit(Overloaded{
                        [](const Relu&) { return std::string("relu"); },
                        [](const MaxLu2&) { return std::string("maxlu2"); },
                        [](const Cpwl&) { return std::string("cpwl"); },
                        [](const CpwlDiag&) { return std::string("cpwl_diag"); },
                    },
                    act);
}

std::size_t activation_out_dim(const Activation& act, std::size_t n) {
  return std::visit(
      Overloaded{
          [n](const Relu&) { return n; },
          [n](const MaxLu2&) {
            if (n % 2 != 0)
              throw Error(ErrorCode::kDimMismatch,
                          "MaxLU2 needs an even input length, got " +
                              std::to_string(n));
            return n / 2;
          },
          [n](const Cpwl&) { return n; },
          [n](const CpwlDiag& d) {
            if (d.specs.size() != n)
              throw Error(ErrorCode::kDimMismatch,
                          "cpwl_diag has " + dims(d.specs.size(), n) +
                              " inputs");
            return n;
          },
      },
      act);
}

ActivationResult activation_apply(const Activation& act, const Vector& v) {
  const auto n = static_cast<std::size_t>(v.size());
  const std::size_t out_n = activation_out_dim(act, n);
  ActivationResult r;
  r.out.resize(static_cast<Eigen::Index>(out_n));
  r.pattern.assign(n, 0);
  std::visit(Overloaded{
                 [&](const Relu&) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const double x = v(static_cast<Eigen::Index>(i));
                     const bool on = x > 0.0;
                     r.out(static_cast<Eigen::Index>(i)) = on ? x : 0.0;
                     r.pattern[i] = on;
                   }
                 },
                 [&](const MaxLu2&) {
                   for (std::size_t k = 0; k < out_n; ++k) {
                     const double x1 = v(static_cast<Eigen::Index>(2 * k));
                     const double x2 = v(static_cast<Eigen::Index>(2 * k + 1));
                     double y = 0.0;
                     if (x1 >= x2 && x1 > 0.0) {
                       r.pattern[2 * k] = 1;
                       y = x1;
                     } else if (x2 > 0.0 && x2 > x1) {
                       r.pattern[2 * k + 1] = 1;
                       y = x2;
                     }
                     r.out(static_cast<Eigen::Index>(k)) = y;
                   }
                 },
                 [&](const Cpwl& c) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const double x = v(static_cast<Eigen::Index>(i));
                     r.out(static_cast<Eigen::Index>(i)) = cpwl_eval(c.spec, x);
                     r.pattern[i] = unrectify_diag(c.spec, x).active;
                   }
                 },
                 [&](const CpwlDiag& d) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const double x = v(static_cast<Eigen::Index>(i));
                     r.out(static_cast<Eigen::Index>(i)) =
                         cpwl_eval(d.specs[i], x);
                     r.pattern[i] = unrectify_diag(d.specs[i], x).active;
                   }
                 },
             },
             act);
  return r;
}

Vector activation_apply_frozen(const Activation& act, const Pattern& pattern,
                               const Vector& v) {
  const auto n = static_cast<std::size_t>(v.size());
  if (pattern.size() != n)
    throw Error(ErrorCode::kDimMismatch,
                "pattern length " + dims(pattern.size(), n));
  const std::size_t out_n = activation_out_dim(act, n);
  Vector out(static_cast<Eigen::Index>(out_n));
  std::visit(Overloaded{
                 [&](const Relu&) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const auto e = static_cast<Eigen::Index>(i);
                     out(e) = pattern[i] ? v(e) : 0.0;
                   }
                 },
                 [&](const MaxLu2&) {
                   for (std::size_t k = 0; k < out_n; ++k) {
                     const auto a = static_cast<Eigen::Index>(2 * k);
                     double y = 0.0;
                     if (pattern[2 * k]) y = v(a);
                     else if (pattern[2 * k + 1]) y = v(a + 1);
                     out(static_cast<Eigen::Index>(k)) = y;
                   }
                 },
                 [&](const Cpwl& c) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const auto e = static_cast<Eigen::Index>(i);
                     out(e) = cpwl_eval_frozen(c.spec, pattern[i], v(e));
                   }
                 },
                 [&](const CpwlDiag& d) {
                   for (std::size_t i = 0; i < n; ++i) {
                     const auto e = static_cast<Eigen::Index>(i);
                     out(e) = cpwl_eval_frozen(d.specs[i], pattern[i], v(e));
                   }
                 },
             },
             act);
  return out;
}

FrozenAffine activation_frozen_affine(const Activation& act,
                                      const Pattern& pattern,
                                      std::size_t in_dim) {
  if (pattern.size() != in_dim)
    throw Error(ErrorCode::kDimMismatch,
                "pattern length " + dims(pattern.size(), in_dim));
  const std::size_t out_n = activation_out_dim(act, in_dim);
  const auto rows = static_cast<Eigen::Index>(out_n);
  const auto cols = static_cast<Eigen::Index>(in_dim);
  FrozenAffine f{Matrix::Zero(rows, cols), Vector::Zero(rows)};
  std::visit(Overloaded{
                 [&](const Relu&) {
                   for (Eigen::Index i = 0; i < cols; ++i)
                     f.slope(i, i) = pattern[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
                 },
                 [&](const MaxLu2&) {
                   for (Eigen::Index k = 0; k < rows; ++k) {
                     const auto a = static_cast<std::size_t>(2 * k);
                     if (pattern[a]) f.slope(k, 2 * k) = 1.0;
                     else if (pattern[a + 1]) f.slope(k, 2 * k + 1) = 1.0;
                   }
                 },
                 [&](const Cpwl& c) {
                   for (Eigen::Index i = 0; i < cols; ++i) {
                     const auto p =
                         frozen_piece(c.spec, pattern[static_cast<std::size_t>(i)]);
                     f.slope(i, i) = p.slope;
                     f.offset(i) = p.intercept;
                   }
                 },
                 [&](const CpwlDiag& d) {
                   for (Eigen::Index i = 0; i < cols; ++i) {
                     const auto u = static_cast<std::size_t>(i);
                     const auto p = frozen_piece(d.specs[u], pattern[u]);
                     f.slope(i, i) = p.slope;
                     f.offset(i) = p.intercept;
                   }
                 },
             },
             act);
  return f;
}

double activation_bound(const Activation& act) {
  return std::visit(Overloaded{
                        [](const Relu&) { return 1.0; },
                        [](const MaxLu2&) { return 1.0; },
                        [](const Cpwl& c) { return slope_bound(c.spec); },
                        [](const CpwlDiag& d) {
                          double b = 0.0;
                          for (const auto& s : d.specs) b = std::max(b, slope_bound(s));
                          return b;
                        },
                    },
                    act);
}

// ---------------------------------------------------------------------------
// Transforms

std::string transform_name(const Transform& t) {
  return std::visit(
      Overloaded{
          [](const Softmax&) { return std::string("softmax"); },
          [](const Sigmoid&) { return std::string("sigmoid"); },
          [](const Tanh&) { return std::string("tanh"); },
          [](const InnerProducts&) { return std::string("inner_products"); },
          [](const MixValues&) { return std::string("mix_values"); },
      },
      t);
}

std::size_t transform_out_dim(const Transform& t, std::size_t n) {
  return std::visit(
      Overloaded{
          [n](const Softmax&) { return n; },
          [n](const Sigmoid&) { return n; },
          [n](const Tanh&) { return n; },
          [n](const InnerProducts& ip) {
            const std::size_t want = 2 * ip.seq_len * ip.head_dim;
            if (n != want)
              throw Error(ErrorCode::kDimMismatch,
                          "inner_products input " + dims(n, want));
            return ip.seq_len * ip.seq_len;
          },
          [n](const MixValues& mv) {
            const std::size_t want =
                mv.seq_len * mv.seq_len + mv.seq_len * mv.head_dim;
            if (n != want)
              throw Error(ErrorCode::kDimMismatch,
                          "mix_values input " + dims(n, want));
            return mv.seq_len * mv.head_dim;
          },
      },
      t);
}

Vector transform_apply(const Transform& t, const Vector& v) {
  const auto n = static_cast<std::size_t>(v.size());
  const auto out_n = static_cast<Eigen::Index>(transform_out_dim(t, n));
  return std::visit(
      Overloaded{
          [&](const Softmax& s) -> Vector {
            if (v.size() == 0) return Vector();
            Vector z = s.lambda * v;
            z.array() -= z.maxCoeff();
            z = z.array().exp();
            return z / z.sum();
          },
          [&](const Sigmoid&) -> Vector {
            return v.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
          },
          [&](const Tanh&) -> Vector {
            return v.unaryExpr([](double x) { return std::tanh(x); });
          },
          [&](const InnerProducts& ip) -> Vector {
            const auto T = static_cast<Eigen::Index>(ip.seq_len);
            const auto h = static_cast<Eigen::Index>(ip.head_dim);
            auto unit = [&](Eigen::Index offset) -> Vector {
              Vector u = v.segment(offset, h);
              const double norm = u.norm();
              if (norm > 0.0) u /= norm;
              return u;
            };
            Vector out(out_n);
            for (Eigen::Index i = 0; i < T; ++i) {
              const Vector q = unit(i * h);
              for (Eigen::Index j = 0; j < T; ++j)
                out(i * T + j) = q.dot(unit(T * h + j * h));
            }
            return out;
          },
          [&](const MixValues& mv) -> Vector {
            const auto T = static_cast<Eigen::Index>(mv.seq_len);
            const auto h = static_cast<Eigen::Index>(mv.head_dim);
            Vector out = Vector::Zero(out_n);
            for (Eigen::Index i = 0; i < T; ++i)
              for (Eigen::Index j = 0; j < T; ++j)
                out.segment(i * h, h) += v(i * T + j) * v.segment(T * T + j * h, h);
            return out;
          },
      },
      t);
}

double transform_bound(const Transform& t) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  return std::visit(Overloaded{
                        [](const Softmax& s) { return std::abs(s.lambda); },
                        [](const Sigmoid&) { return 1.0; },
                        [](const Tanh&) { return 1.0; },
                        [](const InnerProducts&) { return kInf; },
                        [](const MixValues&) { return kInf; },
                    },
                    t);
}

// ---------------------------------------------------------------------------
// ArcOp

std::string to_string(OpKind kind) {
  switch (kind) {
    case OpKind::kIdentity: return "identity";
    case OpKind::kLinear: return "linear";
    case OpKind::kAffine: return "affine";
    case OpKind::kActivation: return "activation";
    case OpKind::kActivationAffine: return "activation_affine";
    case OpKind::kTransform: return "transform";
    case OpKind::kTransformAffine: return "transform_affine";
  }
  return "unknown";
}

ArcOp ArcOp::identity(std::size_t dim) {
  ArcOp op;
  op.kind_ = OpKind::kIdentity;
  op.dim_ = dim;
  return op;
}

ArcOp ArcOp::linear(Matrix weight) {
  ArcOp op;
  op.kind_ = OpKind::kLinear;
  op.weight_ = std::move(weight);
  op.check();
  return op;
}

ArcOp ArcOp::affine(Matrix weight, Vector bias) {
  ArcOp op;
  op.kind_ = OpKind::kAffine;
  op.weight_ = std::move(weight);
  op.bias_ = std::move(bias);
  op.check();
  return op;
}

ArcOp ArcOp::activation(Activation act, std::size_t dim) {
  ArcOp op;
  op.kind_ = OpKind::kActivation;
  op.dim_ = dim;
  op.activation_ = std::move(act);
  op.check();
  return op;
}

ArcOp ArcOp::activation_affine(Activation act, Matrix weight, Vector bias) {
  ArcOp op;
  op.kind_ = OpKind::kActivationAffine;
  op.weight_ = std::move(weight);
  op.bias_ = std::move(bias);
  op.activation_ = std::move(act);
  op.check();
  return op;
}

ArcOp ArcOp::transform(Transform t, std::size_t dim) {
  ArcOp op;
  op.kind_ = OpKind::kTransform;
  op.dim_ = dim;
  op.transform_ = std::move(t);
  op.check();
  return op;
}

ArcOp ArcOp::transform_affine(Transform t, Matrix weight, Vector bias) {
  ArcOp op;
  op.kind_ = OpKind::kTransformAffine;
  op.weight_ = std::move(weight);
  op.bias_ = std::move(bias);
  op.transform_ = std::move(t);
  op.check();
  return op;
}

bool ArcOp::has_weight() const {
  return kind_ == OpKind::kLinear || kind_ == OpKind::kAffine ||
         kind_ == OpKind::kActivationAffine || kind_ == OpKind::kTransformAffine;
}

bool ArcOp::has_bias() const { return has_weight() && kind_ != OpKind::kLinear; }

bool ArcOp::is_activation() const {
  return kind_ == OpKind::kActivation || kind_ == OpKind::kActivationAffine;
}

bool ArcOp::is_transform() const {
  return kind_ == OpKind::kTransform || kind_ == OpKind::kTransformAffine;
}

const Activation& ArcOp::activation() const {
  if (!activation_)
    throw Error(ErrorCode::kInvalidArgument,
                to_string(kind_) + " arc has no activation");
  return *activation_;
}

const Transform& ArcOp::transform() const {
  if (!transform_)
    throw Error(ErrorCode::kInvalidArgument,
                to_string(kind_) + " arc has no transform");
  return *transform_;
}

std::size_t ArcOp::in_dim() const {
  return has_weight() ? static_cast<std::size_t>(weight_.cols()) : dim_;
}

std::size_t ArcOp::pre_dim() const {
  return has_weight() ? static_cast<std::size_t>(weight_.rows()) : dim_;
}

std::size_t ArcOp::out_dim() const {
  const std::size_t pre = pre_dim();
  if (is_activation()) return activation_out_dim(*activation_, pre);
  if (is_transform()) return transform_out_dim(*transform_, pre);
  return pre;
}

ArcOp ArcOp::scaled(double factor) const {
  ArcOp op = *this;
  if (has_weight()) op.weight_ *= factor;
  return op;
}

ArcOp::Result ArcOp::apply(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != in_dim())
    throw Error(ErrorCode::kDimMismatch,
                to_string(kind_) + " arc input " +
                    dims(static_cast<std::size_t>(x.size()), in_dim()));
  Vector pre;
  switch (kind_) {
    case OpKind::kIdentity:
    case OpKind::kActivation:
    case OpKind::kTransform:
      pre = x;
      break;
    case OpKind::kLinear:
      pre = weight_ * x;
      break;
    case OpKind::kAffine:
    case OpKind::kActivationAffine:
    case OpKind::kTransformAffine:
      pre = weight_ * x + bias_;
      break;
  }
  if (is_activation()) {
    auto r = activation_apply(*activation_, pre);
    return {std::move(r.out), std::move(r.pattern)};
  }
  if (is_transform()) return {transform_apply(*transform_, pre), {}};
  return {std::move(pre), {}};
}

void ArcOp::check() const {
  if (has_weight()) {
    if (weight_.size() > 0 && !weight_.allFinite())
      throw Error(ErrorCode::kNonFinite, "weight matrix has non-finite entries");
    if (has_bias()) {
      if (bias_.size() != weight_.rows())
        throw Error(ErrorCode::kDimMismatch,
                    "bias length " + dims(static_cast<std::size_t>(bias_.size()),
                                          static_cast<std::size_t>(weight_.rows())));
      if (!bias_.allFinite())
        throw Error(ErrorCode::kNonFinite, "bias has non-finite entries");
    }
  }
  if (activation_) {
    if (const auto* c = std::get_if<Cpwl>(&*activation_)) c->spec.check();
    if (const auto* d = std::get_if<CpwlDiag>(&*activation_))
      for (const auto& s : d->specs) s.check();
    activation_out_dim(*activation_, pre_dim());
  }
  if (transform_) {
    if (const auto* s = std::get_if<Softmax>(&*transform_);
        s && !std::isfinite(s->lambda))
      throw Error(ErrorCode::kInvalidArgument, "softmax lambda must be finite");
    transform_out_dim(*transform_, pre_dim());
  }
}

bool operator==(const ArcOp& a, const ArcOp& b) {
  if (a.kind_ != b.kind_ || a.dim_ != b.dim_) return false;
  if (a.weight_.rows() != b.weight_.rows() || a.weight_.cols() != b.weight_.cols())
    return false;
  if (a.bias_.size() != b.bias_.size()) return false;
  return a.weight_ == b.weight_ && a.bias_ == b.bias_ &&
         a.activation_ == b.activation_ && a.transform_ == b.transform_;
}

double uniform_bound(const ArcOp& op) {
  if (op.is_activation()) return activation_bound(op.activation());
  if (op.is_transform()) return transform_bound(op.transform());
  return 1.0;
}

}  // namespace unrectify
