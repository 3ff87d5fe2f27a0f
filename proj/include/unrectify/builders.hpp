#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "unrectify/dag.hpp"

namespace unrectify {

struct LayerSpec {
  Matrix W;
  Vector b;
  Activation act = Relu{};
};

struct AffineLayer {
  Matrix W;
  Vector b;
};

/// Chain "in" -> "h01" -> ... -> "out" of activation-affine arcs. With no
/// layers the net is a single identity arc.
DagNet build_series(std::size_t input_dim, const std::vector<LayerSpec>& layers);

/// Random ReLU chain with i.i.d. standard-normal dim x dim weights and biases.
DagNet build_random_series(std::size_t layers, std::size_t dim, std::uint64_t seed);

/// Channels share the input node "in"; channel i's other nodes are prefixed
/// "c<i>.". Channel outputs meet at "cat" through unit linear arcs (ports in
/// channel order) and "cat" -> "out" applies L.
DagNet build_fusion(const std::vector<DagNet>& channels, const Matrix& L);

/// Two ReLU channels on R^2 with concurrent boundary lines (M1 = I,
/// M2 = [[1,1],[1,-1]], no bias) fused by L = [I I]: eight regions.
DagNet build_concurrent_pair();

/// Node id of a fusion-stack node, e.g. fusion_node(3, "top") == "L03.top".
std::string fusion_node(std::size_t layer, const std::string& channel);

/// `layers` fusion layers on R^dim. Layer j reads X (the input or the
/// previous fusion node) into "Ljj.top" and "Ljj.bottom" through
/// ReLU(W x + b) arcs with i.i.d. standard-normal W (dim x dim) and b, stacks
/// them at "Ljj.concat" and applies L = [I I] into "Ljj.fusion".
DagNet build_fusion_stack(std::size_t layers, std::size_t dim, std::uint64_t seed);

/// rho(x - M2 rho(M1 x)): "in" -> "h" (ReLU M1), "in" -> "k" direct link,
/// "h" -> "k" (-M2), "k" -> "out" (ReLU [I I]).
DagNet build_resnet_block(const AffineLayer& M1, const AffineLayer& M2);
DagNet build_random_resnet(std::size_t dim, std::uint64_t seed);

/// Single-head self-attention on seq_len tokens stacked in the input.
/// Scores are cosine similarities of query/key tokens, each score row goes
/// through its own softmax arc into "p<i>", and "out" mixes the values:
/// out_i = sum_j softmax_lambda(score_i)_j v_j.
DagNet build_attention_toy(const Matrix& Wq, const Matrix& Wk, const Matrix& Wv,
                           double lambda, std::size_t seq_len = 4);
DagNet build_random_attention(std::size_t dim, std::uint64_t seed, double lambda = 1.0,
                              std::size_t seq_len = 4);

/// LeNet-5 shaped graph on a 28x28 input: two parallel conv channels per
/// conv stage (convolutions as explicit matrices, 2x2 max-pool + ReLU as two
/// MaxLU2 arcs), concatenations, then 400 -> 120 -> 84 -> 10.
DagNet build_lenet_shape(std::uint64_t seed);

/// "in" (2k) -> "out" (k) through one MaxLU2 arc.
DagNet build_maxlu(std::size_t blocks = 1);

}  // namespace unrectify
