#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "unrectify/forward.hpp"

// Data-parallel kernels behind the census and gain experiments. `serial` is
// the reference; `omp` must return bitwise-identical results. Sample
// matrices hold one sample per row.

namespace unrectify::kernels {

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;
using Groups = std::vector<std::vector<std::size_t>>;

namespace serial {

/// keys[p][s] = signature_key(plans[p], forward(net, samples.row(s))).
std::vector<std::vector<Pattern>> batch_signature_keys(
    const DagNet& net, const std::vector<SignaturePlan>& plans, const Matrix& samples);

/// out[k].row(s) = level_output(net, levels[k], samples.row(s)).
std::vector<Matrix> batch_level_outputs(const DagNet& net,
                                        const std::vector<std::size_t>& levels,
                                        const Matrix& samples);

/// max over i < j of |out_i - out_j| / |in_i - in_j|; 0 with fewer than two
/// rows. Throws DegeneratePair on equal inputs.
double max_gain_all_pairs(const Matrix& in, const Matrix& out);
double max_gain_pairs(const Matrix& in, const Matrix& out, const PairList& pairs);

/// Largest Euclidean distance between two rows of the same group.
double max_intra_distance(const Matrix& samples, const Groups& groups);

}  // namespace serial

namespace omp {

std::vector<std::vector<Pattern>> batch_signature_keys(
    const DagNet& net, const std::vector<SignaturePlan>& plans, const Matrix& samples);
std::vector<Matrix> batch_level_outputs(const DagNet& net,
                                        const std::vector<std::size_t>& levels,
                                        const Matrix& samples);
double max_gain_all_pairs(const Matrix& in, const Matrix& out);
double max_gain_pairs(const Matrix& in, const Matrix& out, const PairList& pairs);
double max_intra_distance(const Matrix& samples, const Groups& groups);

}  // namespace omp

}  // namespace unrectify::kernels
