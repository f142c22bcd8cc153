// SPDX-License-Identifier: Apache-2.0
#include "rismtc/rng.hpp"

namespace rismtc {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return mix64(mix64(base) ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

CVec Rng::complex_normal_vector(Eigen::Index n) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_normal();
  return v;
}

CMat Rng::complex_normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  // Column-major fill so draws line up with vec() ordering.
  CMat m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = complex_normal();
  return m;
}

}  // namespace rismtc
