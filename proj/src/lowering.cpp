#include "unrectify/lowering.hpp"

#include "unrectify/error.hpp"

namespace unrectify {

DagNet lower_cpwl_to_relu(const CpwlSpec& spec) {
  spec.check();
  const auto m = static_cast<Eigen::Index>(spec.term_count());
  DagBuilder b("x", 1);
  if (m == 0) {
    b.add_arc("x", "y", ArcOp::linear(Matrix::Zero(1, 1)));
    return b.freeze();
  }
  Matrix pre(m, 1);
  Vector shift(m);
  Matrix mix(1, m);
  Eigen::Index i = 0;
  for (const auto& t : spec.right) {
    pre(i, 0) = 1.0;
    shift(i) = -t.breakpoint;
    mix(0, i++) = t.slope;
  }
  for (const auto& t : spec.left) {
    pre(i, 0) = -1.0;
    shift(i) = t.breakpoint;
    mix(0, i++) = t.slope;
  }
  b.add_arc("x", "h", ArcOp::activation_affine(Relu{}, pre, shift));
  b.add_arc("h", "y", ArcOp::linear(mix));
  return b.freeze();
}

namespace {

// One pairing round on an m-vector: ceil(m/2) outputs.
void add_round(DagBuilder& b, const NodeId& from, const NodeId& mid, const NodeId& to,
               std::size_t m) {
  const std::size_t pairs = m / 2;
  const bool odd = m % 2 == 1;
  const auto rows = static_cast<Eigen::Index>(3 * pairs + (odd ? 1 : 0));
  const auto outs = static_cast<Eigen::Index>(pairs + (odd ? 1 : 0));
  Matrix pre = Matrix::Zero(rows, static_cast<Eigen::Index>(m));
  Matrix mix = Matrix::Zero(outs, rows);
  std::vector<CpwlSpec> specs;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto r = static_cast<Eigen::Index>(3 * p);
    const auto c = static_cast<Eigen::Index>(2 * p);
    pre(r, c) = 1.0;
    pre(r, c + 1) = 1.0;
    pre(r + 1, c) = 1.0;
    pre(r + 1, c + 1) = -1.0;
    pre(r + 2, c) = -1.0;
    pre(r + 2, c + 1) = 1.0;
    mix.block(static_cast<Eigen::Index>(p), r, 1, 3).setConstant(0.5);
    specs.push_back(CpwlSpec::identity());
    specs.push_back(CpwlSpec::relu());
    specs.push_back(CpwlSpec::relu());
  }
  if (odd) {
    pre(rows - 1, static_cast<Eigen::Index>(m - 1)) = 1.0;
    mix(outs - 1, rows - 1) = 1.0;
    specs.push_back(CpwlSpec::identity());
  }
  b.add_arc(from, mid,
            ArcOp::activation_affine(CpwlDiag{std::move(specs)}, pre, Vector::Zero(rows)));
  b.add_arc(mid, to, ArcOp::linear(mix));
}

}  // namespace

DagNet lower_maxpool2() { return lower_maxpool_n(2); }

DagNet lower_maxpool_n(std::size_t k) {
  if (k < 2) throw Error(ErrorCode::kInvalidArgument, "block size must be >= 2");
  DagBuilder b("x", k);
  NodeId from = "x";
  std::size_t m = k;
  for (int round = 1; m > 1; ++round) {
    const std::size_t next = (m + 1) / 2;
    const NodeId to = next == 1 ? "y" : "y" + std::to_string(round);
    add_round(b, from, "h" + std::to_string(round), to, m);
    from = to;
    m = next;
  }
  return b.freeze();
}

}  // namespace unrectify
