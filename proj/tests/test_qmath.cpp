#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "minout/construction.hpp"
#include "minout/qmath.hpp"

using namespace minout;
using namespace testing_helpers;

TEST(BipartiteShape, RejectsTrivialFactors) {
  EXPECT_THROW(BipartiteShape(1, 3), DomainError);
  EXPECT_THROW(BipartiteShape(4, 0), DomainError);
  EXPECT_EQ(BipartiteShape(4, 3).total(), 12);
  EXPECT_EQ(to_string(BipartiteShape(4, 3)), "4x3");
}

TEST(PureVector, Normalizes) {
  ComplexVector v(3);
  v << cplx(3, 0), cplx(0, 4), 0.0;
  const PureVector p(v);
  EXPECT_NEAR(p.amplitudes().norm(), 1.0, 1e-12);
  EXPECT_THROW(PureVector(ComplexVector::Zero(3)), DomainError);
}

TEST(Tensor, IdentityTimesIdentity) {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2), i3 = ComplexMatrix::Identity(3, 3);
  const ComplexMatrix i6 = tensor(i2, i3);
  EXPECT_EQ(max_diff(i6, ComplexMatrix::Identity(6, 6)), 0.0);
}

TEST(Tensor, IndexConvention) {
  Rng rng(1);
  const ComplexMatrix a = ginibre(2, 3, rng), b = ginibre(4, 5, rng);
  const ComplexMatrix k = tensor(a, b);
  ASSERT_EQ(k.rows(), 8);
  ASSERT_EQ(k.cols(), 15);
  EXPECT_EQ(k(1 * 4 + 2, 2 * 5 + 3), a(1, 2) * b(2, 3));
}

TEST(Tensor, RankOneFactorsGiveRankOne) {
  Rng rng(2);
  const ComplexVector x = random_unit_vector(3, rng), y = random_unit_vector(4, rng);
  const ComplexMatrix k = tensor(ComplexMatrix(x * x.adjoint()), ComplexMatrix(y * y.adjoint()));
  EXPECT_EQ(rank_eps(k), 1);
}

TEST(Tensor, TraceIsMultiplicative) {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const ComplexMatrix a = ginibre(3, 3, rng), b = ginibre(4, 4, rng);
    EXPECT_LT(std::abs(tensor(a, b).trace() - a.trace() * b.trace()), 1e-12);
  }
}

TEST(PartialTrace, ProductOperator) {
  Rng rng(4);
  const BipartiteShape sh(3, 2);
  const ComplexMatrix x = ginibre(3, 3, rng), y = ginibre(2, 2, rng);
  EXPECT_LT(max_diff(partial_trace(tensor(x, y), sh, Subsystem::B), y.trace() * x), 1e-12);
  EXPECT_LT(max_diff(partial_trace(tensor(x, y), sh, Subsystem::A), x.trace() * y), 1e-12);
}

TEST(PartialTrace, MaximallyEntangledMarginal) {
  for (int d = 2; d <= 5; ++d) {
    const ComplexVector phi = maximally_entangled(d);
    const ComplexMatrix m = partial_trace(phi * phi.adjoint(), BipartiteShape(d, d), Subsystem::B);
    EXPECT_LT(max_diff(m, ComplexMatrix::Identity(d, d) / double(d)), 1e-15);
  }
}

TEST(PartialTrace, MarginalOfProjectorOntoR) {
  // oracle: dense eigendecomposition of tr_B(Pi_R / 6), computed independently
  const Subspace r = subspace_R();
  const ComplexMatrix rho = projector(r) / 6.0;
  const ComplexMatrix ra = partial_trace(rho, r.shape(), Subsystem::B);
  ASSERT_EQ(ra.rows(), 4);
  const RealVector ev = hermitian_eigenvalues(ra);
  EXPECT_NEAR(ev(0), 2.0 / 9.0, 1e-14);
  EXPECT_NEAR(ev(1), 0.25, 1e-14);
  EXPECT_NEAR(ev(2), 0.25, 1e-14);
  EXPECT_NEAR(ev(3), 5.0 / 18.0, 1e-14);
  const ComplexMatrix rb = partial_trace(rho, r.shape(), Subsystem::A);
  EXPECT_LT(max_diff(rb, ComplexMatrix::Identity(3, 3) / 3.0), 1e-14);
}

TEST(PartialTrace, DimensionMismatchThrows) {
  EXPECT_THROW(partial_trace(ComplexMatrix::Identity(5, 5), BipartiteShape(2, 3), Subsystem::A), DimensionError);
}

TEST(PartialTrace, PreservesTrace) {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const ComplexMatrix m = ginibre(12, 12, rng);
    const BipartiteShape sh(4, 3);
    EXPECT_LT(std::abs(partial_trace(m, sh, Subsystem::A).trace() - m.trace()), 1e-10);
    EXPECT_LT(std::abs(partial_trace(m, sh, Subsystem::B).trace() - m.trace()), 1e-10);
  }
}

TEST(PartialTranspose, ProductCase) {
  Rng rng(6);
  const BipartiteShape sh(2, 3);
  const ComplexMatrix x = ginibre(2, 2, rng), y = ginibre(3, 3, rng);
  EXPECT_LT(max_diff(partial_transpose(tensor(x, y), sh), tensor(x, ComplexMatrix(y.transpose()))), 1e-15);
}

TEST(PartialTranspose, Involution) {
  Rng rng(7);
  const ComplexMatrix m = ginibre(12, 12, rng);
  const BipartiteShape sh(4, 3);
  EXPECT_EQ(max_diff(partial_transpose(partial_transpose(m, sh), sh), m), 0.0);
}

TEST(PartialTranspose, MaximallyEntangledIsSwapOverD) {
  for (int d = 2; d <= 4; ++d) {
    const ComplexVector phi = maximally_entangled(d);
    const RealVector ev = hermitian_eigenvalues(partial_transpose(phi * phi.adjoint(), BipartiteShape(d, d)));
    for (Eigen::Index i = 0; i < ev.size(); ++i) EXPECT_NEAR(std::abs(ev(i)), 1.0 / d, 1e-12);
    EXPECT_NEAR(ev(0), -1.0 / d, 1e-12);
  }
}

TEST(VecToMatrix, BasisVector) {
  const BipartiteShape sh(4, 3);
  ComplexVector v = ComplexVector::Zero(12);
  v(0) = 1.0;
  const ComplexMatrix m = vec_to_matrix(v, sh);
  ASSERT_EQ(m.rows(), 3);
  ASSERT_EQ(m.cols(), 4);
  EXPECT_EQ(m(0, 0), cplx(1.0));
  EXPECT_EQ(m.cwiseAbs().sum(), 1.0);
}

TEST(VecToMatrix, ProductVectorIsRankOne) {
  Rng rng(8);
  const BipartiteShape sh(4, 3);
  const ComplexVector phi = random_unit_vector(4, rng), psi = random_unit_vector(3, rng);
  const ComplexMatrix m = vec_to_matrix(tensor(phi, psi), sh);
  EXPECT_LT(max_diff(m, psi * phi.transpose()), 1e-15);
}

TEST(VecToMatrix, FirstVectorOfRMatchesDisplayedArray) {
  const ComplexMatrix m = vec_to_matrix(subspace_R().vector(0), BipartiteShape(4, 3)) * std::sqrt(2.0);
  ComplexMatrix expect = ComplexMatrix::Zero(3, 4);
  expect(1, 0) = 1.0;
  expect(2, 1) = 1.0;
  EXPECT_LT(max_diff(m, expect), 1e-15);
}

TEST(VecToMatrix, RoundTripIsExact) {
  Rng rng(9);
  const BipartiteShape sh(4, 3);
  for (int i = 0; i < 20; ++i) {
    const ComplexVector v = ginibre(12, 1, rng).col(0);
    EXPECT_EQ(max_diff(matrix_to_vec(vec_to_matrix(v, sh), sh), v), 0.0);
    const ComplexMatrix m = ginibre(3, 4, rng);
    EXPECT_EQ(max_diff(vec_to_matrix(matrix_to_vec(m, sh), sh), m), 0.0);
  }
  EXPECT_THROW(vec_to_matrix(ComplexVector::Zero(11), sh), DimensionError);
}

TEST(Schmidt, MaximallyEntangled) {
  const auto s = schmidt(maximally_entangled(3), BipartiteShape(3, 3));
  ASSERT_EQ(s.rank(), 3);
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(s.coefficients(i), 1.0 / std::sqrt(3.0), 1e-14);
}

TEST(Schmidt, ProductVector) {
  Rng rng(10);
  const ComplexVector v = tensor(random_unit_vector(4, rng), random_unit_vector(3, rng));
  const auto s = schmidt(v, BipartiteShape(4, 3), 1e-12);
  ASSERT_EQ(s.rank(), 1);
  EXPECT_NEAR(s.coefficients(0), 1.0, 1e-14);
}

TEST(Schmidt, RandomVectorsReconstruct) {
  Rng rng(11);
  const BipartiteShape sh(4, 3);
  for (int i = 0; i < 100; ++i) {
    const ComplexVector v = random_unit_vector(12, rng);
    const auto s = schmidt(v, sh);
    EXPECT_NEAR(s.coefficients.squaredNorm(), 1.0, 1e-10);
    EXPECT_LT((s.reconstruct() - v).norm(), 1e-10);
    for (Eigen::Index k = 1; k < s.rank(); ++k) EXPECT_GE(s.coefficients(k - 1), s.coefficients(k));
  }
}

TEST(HermitianEig, Diagonal) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 3);
  m(0, 0) = 3.0;
  m(1, 1) = 1.0;
  m(2, 2) = 2.0;
  const RealVector ev = hermitian_eig(m).values;
  EXPECT_DOUBLE_EQ(ev(0), 1.0);
  EXPECT_DOUBLE_EQ(ev(1), 2.0);
  EXPECT_DOUBLE_EQ(ev(2), 3.0);
}

TEST(HermitianEig, ProjectorEigenvalues) {
  const RealVector ev = hermitian_eigenvalues(projector(subspace_R()));
  for (Eigen::Index i = 0; i < ev.size(); ++i) EXPECT_LT(std::min(std::abs(ev(i)), std::abs(ev(i) - 1.0)), 1e-10);
}

TEST(HermitianEig, RandomResidualAndUnitarity) {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const ComplexMatrix m = random_hermitian(12, rng);
    const auto e = hermitian_eig(m);
    const double scale = m.norm();
    for (Eigen::Index k = 0; k < 12; ++k)
      EXPECT_LT((m * e.vectors.col(k) - e.values(k) * e.vectors.col(k)).norm(), 1e-9 * scale);
    EXPECT_LT(max_diff(e.vectors.adjoint() * e.vectors, ComplexMatrix::Identity(12, 12)), 1e-9);
    EXPECT_LT(std::abs(e.values.sum() - m.trace().real()), 1e-9 * scale);
  }
}

TEST(HermitianEig, RejectsNonHermitian) {
  Rng rng(13);
  EXPECT_THROW(hermitian_eig(ginibre(4, 4, rng)), DomainError);
}

TEST(RankEps, Examples) {
  EXPECT_EQ(rank_eps(ComplexMatrix::Identity(5, 5) / 5.0), 5);
  EXPECT_EQ(rank_eps(projector(subspace_R()) / 6.0), 6);
  ComplexMatrix bad = ComplexMatrix::Identity(3, 3);
  bad(0, 0) = -0.5;
  EXPECT_THROW(rank_eps(bad), DomainError);
}

TEST(SpectralState, Validation) {
  EXPECT_NO_THROW(SpectralState(ComplexMatrix::Identity(3, 3) / 3.0));
  EXPECT_THROW(SpectralState(ComplexMatrix::Identity(3, 3)), DomainError);
  ComplexMatrix neg = ComplexMatrix::Identity(2, 2);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  EXPECT_THROW(SpectralState{neg}, DomainError);
  Rng rng(14);
  const SpectralState s(random_density(6, rng));
  const ComplexMatrix rebuilt = s.eigenvectors() * s.eigenvalues().asDiagonal() * s.eigenvectors().adjoint();
  EXPECT_LT(max_diff(rebuilt, s.matrix()), 1e-10);
}

TEST(MaximallyEntangled, Examples) {
  const ComplexVector one = maximally_entangled(1);
  ASSERT_EQ(one.size(), 1);
  EXPECT_EQ(one(0), cplx(1.0));
  EXPECT_NEAR(maximally_entangled(4).norm(), 1.0, 1e-15);
  EXPECT_LT((gamma_unnormalized(3) - std::sqrt(3.0) * maximally_entangled(3)).norm(), 1e-15);
}

TEST(MaximallyEntangled, TransposeTrick) {
  Rng rng(15);
  for (int d = 2; d <= 4; ++d) {
    const ComplexVector phi = maximally_entangled(d);
    const ComplexMatrix x = ginibre(d, d, rng), y = ginibre(d, d, rng);
    const cplx lhs = (phi.adjoint() * tensor(x, ComplexMatrix(y.transpose())) * phi)(0, 0);
    EXPECT_LT(std::abs(lhs - (x * y).trace() / double(d)), 1e-12);
  }
}

TEST(Subspace, Validation) {
  EXPECT_THROW(Subspace(BipartiteShape(2, 2), ComplexMatrix::Identity(3, 2)), DimensionError);
  ComplexMatrix bad = ComplexMatrix::Identity(4, 2);
  bad(1, 0) = 0.1;
  EXPECT_THROW(Subspace(BipartiteShape(2, 2), bad), DomainError);
}

TEST(HaarSubspace, FullSpaceAndProjectorLaws) {
  const BipartiteShape sh(4, 3);
  const Subspace full = haar_random_subspace(sh, 12, 1);
  EXPECT_LT(max_diff(projector(full), ComplexMatrix::Identity(12, 12)), 1e-10);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Subspace s = haar_random_subspace(sh, 5, seed);
    const ComplexMatrix p = projector(s);
    EXPECT_LT(max_diff(p * p, p), 1e-10);
    EXPECT_LT(max_diff(p, p.adjoint()), 1e-10);
    EXPECT_NEAR(p.trace().real(), 5.0, 1e-10);
    for (Eigen::Index i = 0; i < s.dim(); ++i) EXPECT_LT((p * s.vector(i) - s.vector(i)).norm(), 1e-10);
  }
  EXPECT_THROW(haar_random_subspace(sh, 0, 1), DomainError);
  EXPECT_THROW(haar_random_subspace(sh, 13, 1), DomainError);
}

TEST(HaarSubspace, DeterministicForSeed) {
  const BipartiteShape sh(3, 3);
  EXPECT_EQ(max_diff(haar_random_subspace(sh, 4, 77).basis(), haar_random_subspace(sh, 4, 77).basis()), 0.0);
}

TEST(HaarSubspace, MeanOverlapMonteCarlo) {
  // <v|Pi|v> for fixed v is Beta(d_E, n - d_E) distributed: mean d_E/n,
  // variance d_E (n - d_E) / (n^2 (n + 1)).
  const BipartiteShape sh(4, 3);
  const int n = 12, d_e = 5, samples = 10000;
  ComplexVector v = ComplexVector::Zero(n);
  v(3) = 1.0;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) {
    const Subspace s = haar_random_subspace(sh, d_e, derive_seed(2024, static_cast<std::uint64_t>(i)));
    sum += (s.basis().adjoint() * v).squaredNorm();
  }
  const double mean = sum / samples;
  const double sigma = std::sqrt(double(d_e) * (n - d_e) / (double(n) * n * (n + 1)) / samples);
  EXPECT_NEAR(mean, double(d_e) / n, 3.0 * sigma);
}

TEST(HaarUnitary, IsUnitary) {
  Rng rng(16);
  const ComplexMatrix u = haar_unitary(12, rng);
  EXPECT_LT(max_diff(u.adjoint() * u, ComplexMatrix::Identity(12, 12)), 1e-12);
}

TEST(PermuteSystems, SwapOfProduct) {
  Rng rng(17);
  const ComplexMatrix x = ginibre(2, 2, rng), y = ginibre(3, 3, rng);
  EXPECT_LT(max_diff(permute_systems(tensor(x, y), {2, 3}, {1, 0}), tensor(y, x)), 1e-15);
}
