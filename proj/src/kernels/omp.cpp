#include <algorithm>
#include <exception>

#include "common.hpp"
#include "unrectify/parallel.hpp"

namespace unrectify::kernels::omp {

namespace {

// Exceptions may not leave a parallel region; keep the first and rethrow.
class FirstError {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(unrectify_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace

std::vector<std::vector<Pattern>> batch_signature_keys(
    const DagNet& net, const std::vector<SignaturePlan>& plans, const Matrix& samples) {
  const auto n = static_cast<long>(samples.rows());
  std::vector<std::vector<Pattern>> keys(plans.size(),
                                         std::vector<Pattern>(static_cast<std::size_t>(n)));
  FirstError err;
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (long s = 0; s < n; ++s)
    err.run([&] { detail::sample_keys(net, plans, samples, static_cast<std::size_t>(s), keys); });
  err.rethrow();
  return keys;
}

std::vector<Matrix> batch_level_outputs(const DagNet& net,
                                        const std::vector<std::size_t>& levels,
                                        const Matrix& samples) {
  auto out = detail::level_buffers(net, levels, samples.rows());
  const auto n = static_cast<long>(samples.rows());
  FirstError err;
#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count())
  for (long s = 0; s < n; ++s)
    err.run([&] { detail::sample_levels(net, levels, samples, static_cast<std::size_t>(s), out); });
  err.rethrow();
  return out;
}

double max_gain_all_pairs(const Matrix& in, const Matrix& out) {
  detail::check_rows(in, out);
  const auto n = static_cast<long>(in.rows());
  double best = 0.0;
  FirstError err;
#pragma omp parallel for schedule(dynamic, 8) reduction(max : best) num_threads(thread_count())
  for (long i = 0; i < n; ++i) {
    err.run([&] {
      for (long j = i + 1; j < n; ++j)
        best = std::max(best, detail::pair_gain(in, out, static_cast<std::size_t>(i),
                                                static_cast<std::size_t>(j)));
    });
  }
  err.rethrow();
  return best;
}

double max_gain_pairs(const Matrix& in, const Matrix& out, const PairList& pairs) {
  detail::check_rows(in, out);
  const auto n = static_cast<long>(pairs.size());
  double best = 0.0;
  FirstError err;
#pragma omp parallel for schedule(static) reduction(max : best) num_threads(thread_count())
  for (long k = 0; k < n; ++k) {
    err.run([&] {
      const auto& [i, j] = pairs[static_cast<std::size_t>(k)];
      best = std::max(best, detail::pair_gain(in, out, i, j));
    });
  }
  err.rethrow();
  return best;
}

double max_intra_distance(const Matrix& samples, const Groups& groups) {
  // Flatten to (group, first member) work items so large groups spread out.
  std::vector<std::pair<std::size_t, std::size_t>> items;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (std::size_t a = 0; a + 1 < groups[g].size(); ++a) items.emplace_back(g, a);
  const auto n = static_cast<long>(items.size());
  double best = 0.0;
#pragma omp parallel for schedule(dynamic, 8) reduction(max : best) num_threads(thread_count())
  for (long k = 0; k < n; ++k) {
    const auto& [g, a] = items[static_cast<std::size_t>(k)];
    const auto& members = groups[g];
    for (std::size_t b = a + 1; b < members.size(); ++b)
      best = std::max(best, detail::row_distance(samples, members[a], members[b]));
  }
  return best;
}

}  // namespace unrectify::kernels::omp
