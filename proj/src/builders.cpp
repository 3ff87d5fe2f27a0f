#include "unrectify/builders.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "unrectify/error.hpp"
#include "unrectify/random.hpp"

namespace unrectify {

namespace {

std::string two_digits(std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return buf;
}

Matrix hstack_identity(Eigen::Index dim, Eigen::Index copies) {
  Matrix L(dim, dim * copies);
  for (Eigen::Index c = 0; c < copies; ++c) L.middleCols(c * dim, dim).setIdentity();
  return L;
}

Matrix block_diagonal(const Matrix& W, Eigen::Index copies) {
  Matrix B = Matrix::Zero(W.rows() * copies, W.cols() * copies);
  for (Eigen::Index c = 0; c < copies; ++c)
    B.block(c * W.rows(), c * W.cols(), W.rows(), W.cols()) = W;
  return B;
}

// Copies every arc of `net` into `b`, renaming nodes, in topological order
// of the targets so each source already exists.
void splice(DagBuilder& b, const DagNet& net,
            const std::function<NodeId(const NodeId&)>& rename) {
  for (std::size_t u = 1; u < net.node_count(); ++u)
    for (auto a : net.in_arcs(u)) {
      const Arc& arc = net.arcs()[a];
      b.add_arc(rename(arc.from), rename(arc.to), arc.port, arc.op);
    }
}

}  // namespace

DagNet build_series(std::size_t input_dim, const std::vector<LayerSpec>& layers) {
  DagBuilder b("in", input_dim);
  if (layers.empty()) {
    b.add_arc("in", "out", ArcOp::identity(input_dim));
    return b.freeze();
  }
  NodeId from = "in";
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const NodeId to = i + 1 == layers.size() ? "out" : "h" + two_digits(i + 1);
    const auto& layer = layers[i];
    b.add_arc(from, to, ArcOp::activation_affine(layer.act, layer.W, layer.b));
    from = to;
  }
  return b.freeze();
}

DagNet build_random_series(std::size_t layers, std::size_t dim, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(dim);
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i < layers; ++i) {
    NormalSampler rng(derive_seed(seed, i + 1));
    Matrix W = rng.matrix(n, n);
    Vector bias = rng.vector(n);
    specs.push_back({std::move(W), std::move(bias), Relu{}});
  }
  return build_series(dim, specs);
}

DagNet build_fusion(const std::vector<DagNet>& channels, const Matrix& L) {
  if (channels.empty()) throw Error(ErrorCode::kInvalidArgument, "fusion needs a channel");
  const std::size_t dim = channels.front().input_dim();
  DagBuilder b("in", dim);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const DagNet& ch = channels[i];
    if (ch.input_dim() != dim)
      throw Error(ErrorCode::kDimMismatch, "channel " + std::to_string(i) +
                                               " input dimension differs");
    const std::string prefix = "c" + std::to_string(i) + ".";
    auto rename = [&](const NodeId& id) { return id == ch.input() ? NodeId("in") : prefix + id; };
    splice(b, ch, rename);
    const auto out_dim = static_cast<Eigen::Index>(ch.output_dim());
    b.add_arc(rename(ch.output()), "cat", i, ArcOp::linear(Matrix::Identity(out_dim, out_dim)));
  }
  b.add_arc("cat", "out", ArcOp::linear(L));
  return b.freeze();
}

DagNet build_concurrent_pair() {
  Matrix M2(2, 2);
  M2 << 1.0, 1.0, 1.0, -1.0;
  const auto top = build_series(2, {{Matrix::Identity(2, 2), Vector::Zero(2), Relu{}}});
  const auto bottom = build_series(2, {{M2, Vector::Zero(2), Relu{}}});
  return build_fusion({top, bottom}, hstack_identity(2, 2));
}

std::string fusion_node(std::size_t layer, const std::string& channel) {
  return "L" + two_digits(layer) + "." + channel;
}

DagNet build_fusion_stack(std::size_t layers, std::size_t dim, std::uint64_t seed) {
  if (layers < 1 || dim < 1)
    throw Error(ErrorCode::kInvalidArgument, "fusion stack needs layers >= 1 and dim >= 1");
  const auto n = static_cast<Eigen::Index>(dim);
  DagBuilder b("in", dim);
  NodeId x = "in";
  for (std::size_t j = 1; j <= layers; ++j) {
    const char* channels[] = {"top", "bottom"};
    for (std::size_t c = 0; c < 2; ++c) {
      NormalSampler rng(derive_seed(seed, j, c));
      Matrix W = rng.matrix(n, n);
      Vector bias = rng.vector(n);
      b.add_arc(x, fusion_node(j, channels[c]),
                ArcOp::activation_affine(Relu{}, std::move(W), std::move(bias)));
      b.add_arc(fusion_node(j, channels[c]), fusion_node(j, "concat"), c,
                ArcOp::linear(Matrix::Identity(n, n)));
    }
    b.add_arc(fusion_node(j, "concat"), fusion_node(j, "fusion"),
              ArcOp::linear(hstack_identity(n, 2)));
    x = fusion_node(j, "fusion");
  }
  return b.freeze();
}

DagNet build_resnet_block(const AffineLayer& M1, const AffineLayer& M2) {
  const Eigen::Index d = M1.W.cols();
  if (M2.W.cols() != M1.W.rows() || M2.W.rows() != d)
    throw Error(ErrorCode::kDimMismatch, "resnet block needs M1: h x d and M2: d x h");
  DagBuilder b("in", static_cast<std::size_t>(d));
  b.add_arc("in", "h", ArcOp::activation_affine(Relu{}, M1.W, M1.b));
  b.add_arc("in", "k", 0, ArcOp::identity(static_cast<std::size_t>(d)));
  b.add_arc("h", "k", 1, ArcOp::affine(-M2.W, -M2.b));
  b.add_arc("k", "out", ArcOp::activation_affine(Relu{}, hstack_identity(d, 2), Vector::Zero(d)));
  return b.freeze();
}

DagNet build_random_resnet(std::size_t dim, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(dim);
  NormalSampler r1(derive_seed(seed, 1));
  NormalSampler r2(derive_seed(seed, 2));
  AffineLayer M1{r1.matrix(n, n), r1.vector(n)};
  AffineLayer M2{r2.matrix(n, n), r2.vector(n)};
  return build_resnet_block(M1, M2);
}

DagNet build_attention_toy(const Matrix& Wq, const Matrix& Wk, const Matrix& Wv,
                           double lambda, std::size_t seq_len) {
  const Eigen::Index e = Wq.cols();
  if (Wk.cols() != e || Wv.cols() != e || Wk.rows() != Wq.rows())
    throw Error(ErrorCode::kDimMismatch, "query/key/value maps disagree on shape");
  if (seq_len < 1) throw Error(ErrorCode::kInvalidArgument, "seq_len must be >= 1");
  const auto T = static_cast<Eigen::Index>(seq_len);
  const auto h = static_cast<std::size_t>(Wq.rows());
  const auto hv = static_cast<std::size_t>(Wv.rows());
  DagBuilder b("in", seq_len * static_cast<std::size_t>(e));
  b.add_arc("in", "q", ArcOp::linear(block_diagonal(Wq, T)));
  b.add_arc("in", "k", ArcOp::linear(block_diagonal(Wk, T)));
  b.add_arc("in", "v", ArcOp::linear(block_diagonal(Wv, T)));
  b.add_arc("q", "qk", 0, ArcOp::identity(seq_len * h));
  b.add_arc("k", "qk", 1, ArcOp::identity(seq_len * h));
  b.add_arc("qk", "scores", ArcOp::transform(InnerProducts{seq_len, h}, 2 * seq_len * h));
  for (Eigen::Index i = 0; i < T; ++i) {
    Matrix select = Matrix::Zero(T, T * T);
    select.middleCols(i * T, T).setIdentity();
    const NodeId p = "p" + two_digits(static_cast<std::size_t>(i + 1));
    b.add_arc("scores", p, ArcOp::transform_affine(Softmax{lambda}, select, Vector::Zero(T)));
    b.add_arc(p, "pv", static_cast<std::size_t>(i), ArcOp::identity(seq_len));
  }
  b.add_arc("v", "pv", seq_len, ArcOp::identity(seq_len * hv));
  b.add_arc("pv", "out",
            ArcOp::transform(MixValues{seq_len, hv}, seq_len * seq_len + seq_len * hv));
  return b.freeze();
}

DagNet build_random_attention(std::size_t dim, std::uint64_t seed, double lambda,
                              std::size_t seq_len) {
  const auto n = static_cast<Eigen::Index>(dim);
  NormalSampler rq(derive_seed(seed, 1)), rk(derive_seed(seed, 2)), rv(derive_seed(seed, 3));
  return build_attention_toy(rq.matrix(n, n), rk.matrix(n, n), rv.matrix(n, n), lambda,
                             seq_len);
}

namespace {

struct ConvShape {
  Eigen::Index in_maps, size, out_maps, kernel, pad;
  Eigen::Index out_size() const { return size + 2 * pad - kernel + 1; }
};

// Convolution as a dense affine map. Output rows are ordered
// [map][pooled row][pooled col][2x2 window slot] so two MaxLU2 arcs realise
// 2x2 max-pooling followed by ReLU.
AffineLayer conv_layer(const ConvShape& s, NormalSampler& rng) {
  const Eigen::Index n = s.out_size();
  const Eigen::Index half = n / 2;
  const double scale = 1.0 / std::sqrt(static_cast<double>(s.in_maps * s.kernel * s.kernel));
  AffineLayer layer{Matrix::Zero(s.out_maps * n * n, s.in_maps * s.size * s.size),
                    Vector(s.out_maps * n * n)};
  for (Eigen::Index o = 0; o < s.out_maps; ++o) {
    Matrix K = rng.matrix(s.in_maps * s.kernel, s.kernel) * scale;
    const double bias = rng() * scale;
    for (Eigen::Index y = 0; y < n; ++y)
      for (Eigen::Index x = 0; x < n; ++x) {
        const Eigen::Index slot = (y % 2) * 2 + (x % 2);
        const Eigen::Index row = ((o * half + y / 2) * half + x / 2) * 4 + slot;
        layer.b(row) = bias;
        for (Eigen::Index c = 0; c < s.in_maps; ++c)
          for (Eigen::Index ky = 0; ky < s.kernel; ++ky)
            for (Eigen::Index kx = 0; kx < s.kernel; ++kx) {
              const Eigen::Index iy = y + ky - s.pad, ix = x + kx - s.pad;
              if (iy < 0 || ix < 0 || iy >= s.size || ix >= s.size) continue;
              layer.W(row, (c * s.size + iy) * s.size + ix) = K(c * s.kernel + ky, kx);
            }
      }
  }
  return layer;
}

AffineLayer dense_layer(Eigen::Index out, Eigen::Index in, NormalSampler& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(in));
  Matrix W = rng.matrix(out, in) * scale;
  Vector b = rng.vector(out) * scale;
  return {std::move(W), std::move(b)};
}

}  // namespace

DagNet build_lenet_shape(std::uint64_t seed) {
  DagBuilder b("in", 28 * 28);
  const char* side[] = {"a", "b"};
  for (std::size_t c = 0; c < 2; ++c) {
    NormalSampler rng(derive_seed(seed, 1, c));
    auto conv = conv_layer({1, 28, 3, 5, 2}, rng);
    const std::string ch = side[c];
    b.add_arc("in", "c1." + ch, ArcOp::activation_affine(MaxLu2{}, conv.W, conv.b));
    b.add_arc("c1." + ch, "p1." + ch, ArcOp::activation(MaxLu2{}, 3 * 14 * 14 * 2));
    b.add_arc("p1." + ch, "cat1", c, ArcOp::identity(3 * 14 * 14));
  }
  for (std::size_t c = 0; c < 2; ++c) {
    NormalSampler rng(derive_seed(seed, 2, c));
    auto conv = conv_layer({6, 14, 8, 5, 0}, rng);
    const std::string ch = side[c];
    b.add_arc("cat1", "c2." + ch, ArcOp::activation_affine(MaxLu2{}, conv.W, conv.b));
    b.add_arc("c2." + ch, "p2." + ch, ArcOp::activation(MaxLu2{}, 8 * 5 * 5 * 2));
    b.add_arc("p2." + ch, "cat2", c, ArcOp::identity(8 * 5 * 5));
  }
  NormalSampler r3(derive_seed(seed, 3)), r4(derive_seed(seed, 4)), r5(derive_seed(seed, 5));
  auto f1 = dense_layer(120, 400, r3);
  auto f2 = dense_layer(84, 120, r4);
  auto f3 = dense_layer(10, 84, r5);
  b.add_arc("cat2", "fc1", ArcOp::activation_affine(Relu{}, f1.W, f1.b));
  b.add_arc("fc1", "fc2", ArcOp::activation_affine(Relu{}, f2.W, f2.b));
  b.add_arc("fc2", "out", ArcOp::affine(f3.W, f3.b));
  return b.freeze();
}

DagNet build_maxlu(std::size_t blocks) {
  if (blocks < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one block");
  DagBuilder b("in", 2 * blocks);
  b.add_arc("in", "out", ArcOp::activation(MaxLu2{}, 2 * blocks));
  return b.freeze();
}

}  // namespace unrectify
