#ifndef MINOUT_QMATH_HPP
#define MINOUT_QMATH_HPP

// Dense complex linear algebra and bipartite-structure primitives.
//
// Index convention: a vector of C^{d_A} (x) C^{d_B} is stored with the
// composite index (a, b) -> a * d_B + b, i.e. the A factor is the major one.
// Every reshape in this library follows that convention.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace minout {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible with the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the mathematical domain of the operation
/// (non-Hermitian input, negative weight, non-PSD state, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace tol {
inline constexpr double structural = 1e-10;
inline constexpr double hermitian = 1e-12;
inline constexpr double rank_relative = 1e-9;
}  // namespace tol

// ---------------------------------------------------------------------------
// Random numbers

/// The library's only generator. 64-bit Mersenne twister: fully specified by
/// the standard, so a seed pins the raw stream on every platform.
using Rng = std::mt19937_64;

/// Derive an independent child seed from (seed, stream) with a splitmix64
/// finalizer, so restarts and grid points get decorrelated streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Matrix of i.i.d. standard complex Gaussians (real and imaginary parts
/// N(0, 1/2)).
inline ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  ComplexMatrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = cplx(re, im);
    }
  return g;
}

/// Uniformly random unit vector (normalized complex Gaussian).
inline ComplexVector random_unit_vector(Eigen::Index dim, Rng& rng) {
  ComplexVector v = ginibre(dim, 1, rng).col(0);
  return v / v.norm();
}

// ---------------------------------------------------------------------------
// Domain types

/// Input/output dimensions (d_A, d_B) of a bipartite space.
class BipartiteShape {
 public:
  BipartiteShape(int d_a, int d_b) : d_a_(d_a), d_b_(d_b) {
    if (d_a < 2 || d_b < 2)
      throw DomainError("BipartiteShape: both dimensions must be >= 2, got (" +
                        std::to_string(d_a) + ", " + std::to_string(d_b) + ")");
  }

  int d_a() const { return d_a_; }
  int d_b() const { return d_b_; }
  int total() const { return d_a_ * d_b_; }

  friend bool operator==(const BipartiteShape&, const BipartiteShape&) = default;

 private:
  int d_a_;
  int d_b_;
};

inline std::string to_string(const BipartiteShape& s) {
  return std::to_string(s.d_a()) + "x" + std::to_string(s.d_b());
}

/// Unit vector. Construction normalizes; a zero vector is rejected.
class PureVector {
 public:
  explicit PureVector(const ComplexVector& v) : amp_(v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("PureVector: vector has zero or non-finite norm");
    amp_ /= n;
  }

  Eigen::Index dim() const { return amp_.size(); }
  const ComplexVector& amplitudes() const { return amp_; }
  cplx operator[](Eigen::Index i) const { return amp_(i); }
  ComplexMatrix density() const { return amp_ * amp_.adjoint(); }

 private:
  ComplexVector amp_;
};

struct EigenDecomposition {
  RealVector values;      // ascending
  ComplexMatrix vectors;  // columns, unitary
};

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const ComplexMatrix& m, double eps = tol::hermitian) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= eps * std::max(1.0, max_abs(m));
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
inline EigenDecomposition hermitian_eig(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eig: matrix is not square");
  if (!is_hermitian(m)) throw DomainError("hermitian_eig: matrix is not Hermitian");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Eigenvalues only, ascending.
inline RealVector hermitian_eigenvalues(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("hermitian_eigenvalues: matrix is not square");
  if (!is_hermitian(m)) throw DomainError("hermitian_eigenvalues: matrix is not Hermitian");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eigenvalues: eigensolver did not converge");
  return solver.eigenvalues();
}

/// Number of eigenvalues above tol * tr(M) for a PSD matrix.
inline int rank_eps(const ComplexMatrix& m, double rel_tol = tol::rank_relative) {
  const RealVector ev = hermitian_eigenvalues(m);
  const double scale = std::abs(m.trace().real());
  if (ev.size() > 0 && ev(0) < -rel_tol * scale)
    throw DomainError("rank_eps: matrix has eigenvalue " + std::to_string(ev(0)) + " below -tol*tr");
  int rank = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > rel_tol * scale) ++rank;
  return rank;
}

/// Density operator with a cached eigendecomposition.
class SpectralState {
 public:
  /// Validates PSD (eigenvalues >= -1e-10) and unit trace (within 1e-10).
  explicit SpectralState(const ComplexMatrix& m) : matrix_(0.5 * (m + m.adjoint())) {
    if (m.rows() != m.cols()) throw DimensionError("SpectralState: matrix is not square");
    if (!is_hermitian(m)) throw DomainError("SpectralState: matrix is not Hermitian");
    auto eig = hermitian_eig(matrix_);
    values_ = std::move(eig.values);
    vectors_ = std::move(eig.vectors);
    if (values_.size() > 0 && values_(0) < -tol::structural)
      throw DomainError("SpectralState: negative eigenvalue " + std::to_string(values_(0)));
    if (std::abs(values_.sum() - 1.0) > tol::structural)
      throw DomainError("SpectralState: trace " + std::to_string(values_.sum()) + " differs from 1");
  }

  static SpectralState pure(const PureVector& v) { return SpectralState(v.density()); }

  /// Rescales m to unit trace first.
  static SpectralState normalized(const ComplexMatrix& m) {
    const double tr = m.trace().real();
    if (!(tr > 0.0)) throw DomainError("SpectralState::normalized: non-positive trace");
    return SpectralState(m / tr);
  }

  Eigen::Index dim() const { return matrix_.rows(); }
  const ComplexMatrix& matrix() const { return matrix_; }
  const RealVector& eigenvalues() const { return values_; }
  const ComplexMatrix& eigenvectors() const { return vectors_; }

  /// Applies f to the spectrum: V f(diag) V^dagger.
  template <class F>
  ComplexMatrix function(F&& f) const {
    RealVector fv = values_.unaryExpr(std::forward<F>(f));
    return vectors_ * fv.asDiagonal() * vectors_.adjoint();
  }

 private:
  ComplexMatrix matrix_;
  RealVector values_;
  ComplexMatrix vectors_;
};

// ---------------------------------------------------------------------------
// Tensor structure

/// Kronecker product; entry ((i,k),(j,l)) lands at (i*p + k, j*q + l) for
/// B of size p x q.
inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexVector tensor(const ComplexVector& a, const ComplexVector& b) {
  ComplexVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

enum class Subsystem { A, B };

namespace detail {
inline void require_square(const ComplexMatrix& m, const BipartiteShape& shape, const char* op) {
  if (m.rows() != shape.total() || m.cols() != shape.total())
    throw DimensionError(std::string(op) + ": matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", shape " + to_string(shape) + " needs " +
                         std::to_string(shape.total()));
}
}  // namespace detail

/// Traces out `traced`; returns the operator on the remaining factor.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, const BipartiteShape& shape, Subsystem traced) {
  detail::require_square(m, shape, "partial_trace");
  const int da = shape.d_a(), db = shape.d_b();
  if (traced == Subsystem::B) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (int a = 0; a < da; ++a)
      for (int a2 = 0; a2 < da; ++a2) {
        cplx s = 0.0;
        for (int b = 0; b < db; ++b) s += m(a * db + b, a2 * db + b);
        out(a, a2) = s;
      }
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (int a = 0; a < da; ++a) out += m.block(a * db, a * db, db, db);
  return out;
}

/// Transpose on the B factor only.
inline ComplexMatrix partial_transpose(const ComplexMatrix& m, const BipartiteShape& shape) {
  detail::require_square(m, shape, "partial_transpose");
  const int db = shape.d_b();
  ComplexMatrix out(m.rows(), m.cols());
  for (int a = 0; a < shape.d_a(); ++a)
    for (int a2 = 0; a2 < shape.d_a(); ++a2)
      out.block(a * db, a2 * db, db, db) = m.block(a * db, a2 * db, db, db).transpose();
  return out;
}

/// Reorders the tensor factors of a square operator on (x)_k C^{dims[k]}.
/// Factor k of the result is factor perm[k] of the input.
inline ComplexMatrix permute_systems(const ComplexMatrix& m, const std::vector<int>& dims,
                                     const std::vector<int>& perm) {
  const std::size_t n = dims.size();
  if (perm.size() != n) throw DimensionError("permute_systems: permutation length mismatch");
  Eigen::Index total = 1;
  for (int d : dims) total *= d;
  if (m.rows() != total || m.cols() != total) throw DimensionError("permute_systems: matrix size mismatch");

  std::vector<int> new_dims(n);
  for (std::size_t k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];
  // stride of each old factor inside the new composite index
  std::vector<Eigen::Index> old_stride(n), new_stride(n);
  for (std::size_t k = n; k-- > 0;) old_stride[k] = (k + 1 == n) ? 1 : old_stride[k + 1] * dims[k + 1];
  for (std::size_t k = n; k-- > 0;) new_stride[k] = (k + 1 == n) ? 1 : new_stride[k + 1] * new_dims[k + 1];
  std::vector<Eigen::Index> map(total);
  for (Eigen::Index idx = 0; idx < total; ++idx) {
    Eigen::Index rem = idx, target = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const Eigen::Index digit = rem / old_stride[k];
      rem %= old_stride[k];
      // old factor k sits at new position q where perm[q] == k
      const auto q = static_cast<std::size_t>(std::find(perm.begin(), perm.end(), static_cast<int>(k)) - perm.begin());
      target += digit * new_stride[q];
    }
    map[idx] = target;
  }
  ComplexMatrix out(total, total);
  for (Eigen::Index i = 0; i < total; ++i)
    for (Eigen::Index j = 0; j < total; ++j) out(map[i], map[j]) = m(i, j);
  return out;
}

/// Reshape |v> in C^{d_A} (x) C^{d_B} to the d_B x d_A matrix with entry
/// (b, a) = <a, b|v>. Schmidt rank of v equals the matrix rank.
inline ComplexMatrix vec_to_matrix(const ComplexVector& v, const BipartiteShape& shape) {
  if (v.size() != shape.total())
    throw DimensionError("vec_to_matrix: vector of size " + std::to_string(v.size()) + " for shape " +
                         to_string(shape));
  ComplexMatrix m(shape.d_b(), shape.d_a());
  for (int a = 0; a < shape.d_a(); ++a)
    for (int b = 0; b < shape.d_b(); ++b) m(b, a) = v(a * shape.d_b() + b);
  return m;
}

inline ComplexVector matrix_to_vec(const ComplexMatrix& m, const BipartiteShape& shape) {
  if (m.rows() != shape.d_b() || m.cols() != shape.d_a())
    throw DimensionError("matrix_to_vec: expected a " + std::to_string(shape.d_b()) + "x" +
                         std::to_string(shape.d_a()) + " matrix");
  ComplexVector v(shape.total());
  for (int a = 0; a < shape.d_a(); ++a)
    for (int b = 0; b < shape.d_b(); ++b) v(a * shape.d_b() + b) = m(b, a);
  return v;
}

/// |v> = sum_i c_i |left_i>_A |right_i>_B with c descending.
struct SchmidtDecomposition {
  RealVector coefficients;  // sqrt(lambda_i), descending, all > 0
  ComplexMatrix left;       // d_A x rank, orthonormal columns
  ComplexMatrix right;      // d_B x rank, orthonormal columns

  Eigen::Index rank() const { return coefficients.size(); }

  ComplexVector reconstruct() const {
    ComplexVector v = ComplexVector::Zero(left.rows() * right.rows());
    for (Eigen::Index i = 0; i < rank(); ++i) v += coefficients(i) * tensor(ComplexVector(left.col(i)), ComplexVector(right.col(i)));
    return v;
  }
};

/// Singular value decomposition of vec_to_matrix(v). Coefficients below
/// `cutoff` are dropped from the reported Schmidt rank.
inline SchmidtDecomposition schmidt(const ComplexVector& v, const BipartiteShape& shape, double cutoff = 1e-14) {
  const ComplexMatrix m = vec_to_matrix(v, shape);
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RealVector& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  SchmidtDecomposition out;
  out.coefficients = s.head(r);
  // M = U S V^dagger, so v_{a,b} = sum_i s_i conj(V_{a,i}) U_{b,i}
  out.left = svd.matrixV().leftCols(r).conjugate();
  out.right = svd.matrixU().leftCols(r);
  return out;
}

/// |Phi_d> = sum_i |i>|i> / sqrt(d).
inline ComplexVector maximally_entangled(int d) {
  if (d < 1) throw DomainError("maximally_entangled: d must be >= 1");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1.0 / std::sqrt(static_cast<double>(d));
  return v;
}

/// |Gamma> = sum_i |i>|i>, unnormalized.
inline ComplexVector gamma_unnormalized(int d) {
  if (d < 1) throw DomainError("gamma_unnormalized: d must be >= 1");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i) v(i * d + i) = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Subspaces

/// Orthonormal basis (as columns) of a subspace of C^{d_A} (x) C^{d_B}.
class Subspace {
 public:
  Subspace(BipartiteShape shape, ComplexMatrix basis) : shape_(shape), basis_(std::move(basis)) {
    if (basis_.rows() != shape_.total())
      throw DimensionError("Subspace: basis vectors have dimension " + std::to_string(basis_.rows()) +
                           ", shape needs " + std::to_string(shape_.total()));
    if (basis_.cols() < 1 || basis_.cols() > shape_.total())
      throw DomainError("Subspace: dimension " + std::to_string(basis_.cols()) + " out of range");
    const ComplexMatrix gram = basis_.adjoint() * basis_;
    const double err = max_abs(gram - ComplexMatrix::Identity(gram.rows(), gram.cols()));
    if (err > tol::structural)
      throw DomainError("Subspace: basis is not orthonormal (Gram deviation " + std::to_string(err) + ")");
  }

  /// Normalizes each column; columns must already be mutually orthogonal.
  static Subspace from_orthogonal(BipartiteShape shape, ComplexMatrix vectors) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
      const double n = vectors.col(j).norm();
      if (!(n > 0.0)) throw DomainError("Subspace::from_orthogonal: zero vector");
      vectors.col(j) /= n;
    }
    return Subspace(shape, std::move(vectors));
  }

  const BipartiteShape& shape() const { return shape_; }
  Eigen::Index dim() const { return basis_.cols(); }
  const ComplexMatrix& basis() const { return basis_; }
  ComplexVector vector(Eigen::Index i) const { return basis_.col(i); }

 private:
  BipartiteShape shape_;
  ComplexMatrix basis_;
};

/// Pi = sum_i |b_i><b_i|.
inline ComplexMatrix projector(const Subspace& s) { return s.basis() * s.basis().adjoint(); }

/// Unitary with Haar distribution: QR of a Ginibre matrix with the phases of
/// R's diagonal pushed into Q.
inline ComplexMatrix haar_unitary(Eigen::Index n, Rng& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx d = r(j, j);
    const double ad = std::abs(d);
    if (ad > 0.0) q.col(j) *= d / ad;
  }
  return q;
}

/// First d_E columns of a Haar unitary on the full bipartite space.
inline Subspace haar_random_subspace(const BipartiteShape& shape, int d_e, std::uint64_t seed) {
  if (d_e < 1 || d_e > shape.total())
    throw DomainError("haar_random_subspace: d_E = " + std::to_string(d_e) + " outside [1, " +
                      std::to_string(shape.total()) + "]");
  Rng rng(seed);
  const ComplexMatrix u = haar_unitary(shape.total(), rng);
  return Subspace(shape, u.leftCols(d_e));
}

}  // namespace minout

#endif  // MINOUT_QMATH_HPP
