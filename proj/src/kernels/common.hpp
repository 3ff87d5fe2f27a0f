#pragma once

#include <string>

#include "unrectify/error.hpp"
#include "unrectify/kernels/kernels.hpp"

// Per-item bodies shared by the serial and OpenMP loops, so both variants
// run the same floating-point operations in the same order.

namespace unrectify::kernels::detail {

inline double pair_gain(const Matrix& in, const Matrix& out, std::size_t i,
                        std::size_t j) {
  const auto a = static_cast<Eigen::Index>(i);
  const auto b = static_cast<Eigen::Index>(j);
  const double dx = (in.row(a) - in.row(b)).norm();
  if (dx == 0.0)
    throw Error(ErrorCode::kDegeneratePair,
                "samples " + std::to_string(i) + " and " + std::to_string(j) +
                    " are equal");
  return (out.row(a) - out.row(b)).norm() / dx;
}

inline double row_distance(const Matrix& m, std::size_t i, std::size_t j) {
  return (m.row(static_cast<Eigen::Index>(i)) - m.row(static_cast<Eigen::Index>(j))).norm();
}

inline void check_rows(const Matrix& in, const Matrix& out) {
  if (in.rows() != out.rows())
    throw Error(ErrorCode::kDimMismatch, "input and output sample counts differ");
}

inline void sample_keys(const DagNet& net, const std::vector<SignaturePlan>& plans,
                        const Matrix& samples, std::size_t s,
                        std::vector<std::vector<Pattern>>& keys) {
  const Trace t = forward(net, samples.row(static_cast<Eigen::Index>(s)).transpose());
  for (std::size_t p = 0; p < plans.size(); ++p) keys[p][s] = signature_key(plans[p], t);
}

inline void sample_levels(const DagNet& net, const std::vector<std::size_t>& levels,
                          const Matrix& samples, std::size_t s, std::vector<Matrix>& out) {
  const auto row = static_cast<Eigen::Index>(s);
  const Trace t = forward(net, samples.row(row).transpose());
  for (std::size_t k = 0; k < levels.size(); ++k)
    out[k].row(row) = level_output(net, levels[k], t).transpose();
}

inline std::vector<Matrix> level_buffers(const DagNet& net,
                                         const std::vector<std::size_t>& levels,
                                         Eigen::Index rows) {
  std::vector<Matrix> out;
  for (auto n : levels) {
    if (n > net.levels().L)
      throw Error(ErrorCode::kLevelOutOfRange, "level " + std::to_string(n));
    std::size_t dim = 0;
    for (const auto& id : net.levels().levels[n]) dim += net.node_dim(net.index_of(id));
    out.emplace_back(rows, static_cast<Eigen::Index>(dim));
  }
  return out;
}

}  // namespace unrectify::kernels::detail
