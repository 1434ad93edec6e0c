#pragma once

#include <vector>

#include "ncsched/io.h"
#include "ncsched/pipeline.h"

namespace ncsched::testing {

inline const RunConfig& example_config() {
  static const RunConfig config = parse_config(example_config_json());
  return config;
}

inline const std::vector<PlantModel>& example_plants() {
  return example_config().plants;
}

// Published certificate scalars of the five-plant example, by plant id - 1.
inline const std::vector<CertificateScalars>& reference_scalars() {
  return example_config().reference->plants;
}

inline Matrix mat(int rows, int cols, std::initializer_list<double> data) {
  Matrix m(rows, cols);
  auto it = data.begin();
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = *it++;
  }
  return m;
}

}  // namespace ncsched::testing
