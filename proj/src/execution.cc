#include "ncsched/execution.h"

#include <omp.h>

namespace ncsched {

int parallel_threads() { return omp_get_max_threads(); }

}  // namespace ncsched
