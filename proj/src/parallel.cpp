#include "unrectify/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <string>

namespace unrectify {

int thread_count() {
  int n = omp_get_max_threads();
  if (const char* cap = std::getenv("UNRECTIFY_THREADS")) {
    try {
      const int v = std::stoi(cap);
      if (v > 0) n = std::min(n, v);
    } catch (const std::exception&) {
      // Unparsable values are ignored.
    }
  }
  return std::max(n, 1);
}

}  // namespace unrectify
