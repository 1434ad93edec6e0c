#pragma once

namespace ncsched {

// Selects between the OpenMP kernel and the serial reference implementation
// it is tested against. Both produce bit-identical results.
enum class Execution { kSerial, kParallel };

// Number of OpenMP threads the parallel kernels will use.
int parallel_threads();

}  // namespace ncsched
