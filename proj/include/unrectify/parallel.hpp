#pragma once

namespace unrectify {

/// Threads used by the OpenMP kernels: omp_get_max_threads(), capped by the
/// UNRECTIFY_THREADS environment variable when it holds a positive integer.
int thread_count();

}  // namespace unrectify
