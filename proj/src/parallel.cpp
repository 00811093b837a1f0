#include "fmto/parallel.hpp"

#include <omp.h>

namespace fmto {

int max_threads() noexcept { return omp_get_max_threads(); }

void set_threads(int n) noexcept {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace fmto
