#include <algorithm>

#include "common.hpp"

namespace unrectify::kernels::serial {

std::vector<std::vector<Pattern>> batch_signature_keys(
    const DagNet& net, const std::vector<SignaturePlan>& plans, const Matrix& samples) {
  const auto n = static_cast<std::size_t>(samples.rows());
  std::vector<std::vector<Pattern>> keys(plans.size(), std::vector<Pattern>(n));
  for (std::size_t s = 0; s < n; ++s) detail::sample_keys(net, plans, samples, s, keys);
  return keys;
}

std::vector<Matrix> batch_level_outputs(const DagNet& net,
                                        const std::vector<std::size_t>& levels,
                                        const Matrix& samples) {
  auto out = detail::level_buffers(net, levels, samples.rows());
  for (std::size_t s = 0; s < static_cast<std::size_t>(samples.rows()); ++s)
    detail::sample_levels(net, levels, samples, s, out);
  return out;
}

double max_gain_all_pairs(const Matrix& in, const Matrix& out) {
  detail::check_rows(in, out);
  const auto n = static_cast<std::size_t>(in.rows());
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      best = std::max(best, detail::pair_gain(in, out, i, j));
  return best;
}

double max_gain_pairs(const Matrix& in, const Matrix& out, const PairList& pairs) {
  detail::check_rows(in, out);
  double best = 0.0;
  for (const auto& [i, j] : pairs) best = std::max(best, detail::pair_gain(in, out, i, j));
  return best;
}

double max_intra_distance(const Matrix& samples, const Groups& groups) {
  double best = 0.0;
  for (const auto& g : groups)
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b)
        best = std::max(best, detail::row_distance(samples, g[a], g[b]));
  return best;
}

}  // namespace unrectify::kernels::serial
