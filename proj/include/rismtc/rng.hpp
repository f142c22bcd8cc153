// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "rismtc/types.hpp"

namespace rismtc {

// SplitMix64 finalizer. Used to derive independent substreams from a root
// seed and a counter (cell index, trial index, candidate index).
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  // Circularly-symmetric standard complex Gaussian, E|x|^2 = 1.
  cd complex_normal() {
    constexpr double kScale = 0.70710678118654752440;
    const double re = normal_(engine_);
    const double im = normal_(engine_);
    return {kScale * re, kScale * im};
  }

  CVec complex_normal_vector(Eigen::Index n);
  CMat complex_normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace rismtc
