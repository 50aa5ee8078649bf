#ifndef MINOUT_TESTS_HELPERS_HPP
#define MINOUT_TESTS_HELPERS_HPP

#include <cstdint>
#include <random>

#include "minout/qmath.hpp"

namespace testing_helpers {

using namespace minout;

inline ComplexMatrix random_hermitian(Eigen::Index n, Rng& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

/// Full-rank (generically) density matrix from G G^dagger.
inline ComplexMatrix random_density(Eigen::Index n, Rng& rng, Eigen::Index rank = -1) {
  const ComplexMatrix g = ginibre(n, rank < 0 ? n : rank, rng);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return 0.5 * (m + m.adjoint());
}

inline RealVector random_spectrum(Eigen::Index n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  RealVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = e(rng);
  return v / v.sum();
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace testing_helpers

#endif  // MINOUT_TESTS_HELPERS_HPP
