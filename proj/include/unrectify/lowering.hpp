#pragma once

#include <cstddef>

#include "unrectify/dag.hpp"

namespace unrectify {

/// x -> ReLU([1..1; -1..-1] x + [-a; t]) -> [r, l] . h: a scalar net equal to
/// cpwl_eval(spec, x). Nodes "x", "h", "y".
DagNet lower_cpwl_to_relu(const CpwlSpec& spec);

/// max(x1, x2) = 1/2 [1 1 1] diag(id, ReLU, ReLU) [[1,1],[1,-1],[-1,1]] x.
DagNet lower_maxpool2();

/// max over k >= 2 entries by balanced pairing rounds of the block-2
/// lowering; an odd tail passes through a round on an identity coordinate.
DagNet lower_maxpool_n(std::size_t k);

}  // namespace unrectify
