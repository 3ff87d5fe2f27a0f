#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace unrectify {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Per-coordinate activation pattern. For CPWL coordinates each entry is a
/// bitmask of active ReLU terms; for MaxLU2 each entry is a {0,1} diagonal.
using Pattern = std::vector<std::uint64_t>;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }
inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace unrectify
