#ifndef MINOUT_CONSTRUCTION_HPP
#define MINOUT_CONSTRUCTION_HPP

// Completely entangled subspaces of C^4 (x) C^3, random orthogonal CJ pairs,
// and numerical product-vector detection.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minout/channels.hpp"
#include "minout/qmath.hpp"

namespace minout {

// ---------------------------------------------------------------------------
// The explicit 4 x 3 subspaces

/// omega = exp(2 pi i / 3).
inline const cplx kOmega{-0.5, 0.86602540378443864676};
inline const cplx kOmega2{-0.5, -0.86602540378443864676};

using ArrayList = std::vector<ComplexMatrix>;

namespace detail {
// Rows are the B index (3), columns the A index (4); blanks are zeros.
inline ComplexMatrix array3x4(std::initializer_list<std::initializer_list<cplx>> rows) {
  ComplexMatrix m = ComplexMatrix::Zero(3, 4);
  int r = 0;
  for (const auto& row : rows) {
    int c = 0;
    for (const cplx& x : row) m(r, c++) = x;
    ++r;
  }
  return m;
}

inline Subspace subspace_from_arrays(const ArrayList& arrays) {
  const BipartiteShape shape(4, 3);
  ComplexMatrix basis(shape.total(), static_cast<Eigen::Index>(arrays.size()));
  for (std::size_t i = 0; i < arrays.size(); ++i) basis.col(static_cast<Eigen::Index>(i)) = matrix_to_vec(arrays[i], shape);
  return Subspace::from_orthogonal(shape, basis);
}
}  // namespace detail

/// The six unnormalized 3 x 4 arrays spanning R.
inline ArrayList arrays_R() {
  using detail::array3x4;
  const cplx w = kOmega, w2 = kOmega2;
  return {
      array3x4({{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}}),
      array3x4({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}),
      array3x4({{1, 0, 0, 0}, {0, w, 0, 0}, {0, 0, w2, 0}}),
      array3x4({{0, 1, 0, 0}, {0, 0, w2, 0}, {0, 0, 0, w}}),
      array3x4({{0, 0, 1, 0}, {0, 0, 0, -1}, {0, 0, 0, 0}}),
      array3x4({{0, 0, 0, 1}, {0, 0, 0, 0}, {-1, 0, 0, 0}}),
  };
}

/// The six unnormalized 3 x 4 arrays spanning S.
inline ArrayList arrays_S() {
  using detail::array3x4;
  const cplx w = kOmega, w2 = kOmega2;
  return {
      array3x4({{0, 0, 0, 0}, {1, 0, 0, 0}, {0, -1, 0, 0}}),
      array3x4({{1, 0, 0, 0}, {0, w2, 0, 0}, {0, 0, w, 0}}),
      array3x4({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}),
      array3x4({{0, 1, 0, 0}, {0, 0, w, 0}, {0, 0, 0, w2}}),
      array3x4({{0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}}),
      array3x4({{0, 0, 0, 1}, {0, 0, 0, 0}, {1, 0, 0, 0}}),
  };
}

inline Subspace subspace_R() { return detail::subspace_from_arrays(arrays_R()); }
inline Subspace subspace_S() { return detail::subspace_from_arrays(arrays_S()); }

struct SubspacePair {
  Subspace r;
  Subspace s;
};

/// Largest |<r_i|s_j>| over the two bases.
inline double max_cross_overlap(const Subspace& r, const Subspace& s) {
  return max_abs(r.basis().adjoint() * s.basis());
}

/// Checks R perp S and dim R + dim S <= d_A d_B.
inline SubspacePair make_subspace_pair(Subspace r, Subspace s, double eps = 1e-12) {
  if (!(r.shape() == s.shape())) throw DimensionError("SubspacePair: shapes differ");
  if (r.dim() + s.dim() > r.shape().total()) throw DomainError("SubspacePair: dimensions exceed the total space");
  const double ov = max_cross_overlap(r, s);
  if (ov > eps) throw DomainError("SubspacePair: subspaces are not orthogonal (overlap " + std::to_string(ov) + ")");
  return {std::move(r), std::move(s)};
}

// ---------------------------------------------------------------------------
// 2 x 2 minors

/// All 2x2 minors of M. Order: row pairs (i<j) lexicographically, and for
/// each row pair the column pairs (k<l) lexicographically. A 3x4 matrix
/// gives 3 * 6 = 18 values.
inline std::vector<cplx> minors_2x2(const ComplexMatrix& m) {
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(m.rows() * (m.rows() - 1) / 2 * m.cols() * (m.cols() - 1) / 2));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.rows(); ++j)
      for (Eigen::Index k = 0; k < m.cols(); ++k)
        for (Eigen::Index l = k + 1; l < m.cols(); ++l) out.push_back(m(i, k) * m(j, l) - m(i, l) * m(j, k));
  return out;
}

/// Minor on rows {i, j} and columns {k, l}, zero-based.
inline cplx minor_2x2(const ComplexMatrix& m, int i, int j, int k, int l) {
  return m(i, k) * m(j, l) - m(i, l) * m(j, k);
}

inline double max_abs_minor(const ComplexMatrix& m) {
  double best = 0.0;
  for (const cplx& x : minors_2x2(m)) best = std::max(best, std::abs(x));
  return best;
}

// ---------------------------------------------------------------------------
// Product-vector search

struct ProductSearchOptions {
  int restarts = 200;
  std::uint64_t seed = 0;
  double gain_tol = 1e-12;
  int max_iterations = 500;
};

struct ProductSearchReport {
  double best_overlap = 0.0;
  ComplexVector witness_a;  // unit vector in C^{d_A}
  ComplexVector witness_b;  // unit vector in C^{d_B}
  int restarts = 0;
  bool converged = false;   // the best restart stopped on the gain criterion
};

namespace detail {

// <a (x) b | P | a (x) b> for P on C^{d_A} (x) C^{d_B}.
inline ComplexMatrix contract_a(const ComplexMatrix& p, const ComplexVector& a, int db) {
  const auto da = a.size();
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Eigen::Index i = 0; i < da; ++i)
    for (Eigen::Index j = 0; j < da; ++j) out += std::conj(a(i)) * a(j) * p.block(i * db, j * db, db, db);
  return out;
}

inline ComplexMatrix contract_b(const ComplexMatrix& p, const ComplexVector& b, int da) {
  const auto db = b.size();
  ComplexMatrix out(da, da);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j) out(i, j) = b.dot(p.block(i * db, j * db, db, db) * b);
  return out;
}

struct SeesawState {
  ComplexVector a, b;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Alternating extremal-eigenvector iteration on <a (x) b|P|a (x) b>.
// `maximize` picks the top eigenvector, otherwise the bottom one.
inline SeesawState seesaw(const ComplexMatrix& p, const BipartiteShape& shape, ComplexVector a, bool maximize,
                          double gain_tol, int max_iterations) {
  SeesawState st;
  ComplexVector b;
  double prev = maximize ? -1e300 : 1e300;
  for (int it = 0; it < max_iterations; ++it) {
    auto eb = hermitian_eig(contract_a(p, a, shape.d_b()));
    const Eigen::Index ib = maximize ? eb.values.size() - 1 : 0;
    b = eb.vectors.col(ib);
    auto ea = hermitian_eig(contract_b(p, b, shape.d_a()));
    const Eigen::Index ia = maximize ? ea.values.size() - 1 : 0;
    a = ea.vectors.col(ia);
    const double value = ea.values(ia);
    st.iterations = it + 1;
    const double gain = maximize ? value - prev : prev - value;
    prev = value;
    if (gain < gain_tol) {
      st.converged = true;
      break;
    }
  }
  st.a = a;
  st.b = b;
  st.value = prev;
  return st;
}

}  // namespace detail

/// Multi-restart see-saw maximization of <phi_A (x) phi_B|Pi_S|phi_A (x) phi_B>.
/// Heuristic: the result is a lower bound on the true maximum.
inline ProductSearchReport product_overlap_max(const Subspace& s, const ProductSearchOptions& opt = {}) {
  if (opt.restarts < 1) throw DomainError("product_overlap_max: restarts must be >= 1");
  const ComplexMatrix p = projector(s);
  ProductSearchReport rep;
  rep.restarts = opt.restarts;
  rep.best_overlap = -1.0;
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
    const ComplexVector a0 = random_unit_vector(s.shape().d_a(), rng);
    auto st = detail::seesaw(p, s.shape(), a0, true, opt.gain_tol, opt.max_iterations);
    if (st.value > rep.best_overlap) {
      rep.best_overlap = st.value;
      rep.witness_a = st.a;
      rep.witness_b = st.b;
      rep.converged = st.converged;
    }
  }
  // report the overlap of the stored witness itself
  const ComplexVector x = tensor(rep.witness_a, rep.witness_b);
  rep.best_overlap = std::clamp((x.adjoint() * p * x)(0, 0).real(), 0.0, 1.0);
  return rep;
}

struct ProductDecision {
  bool contains = false;
  ProductSearchReport report;
  /// |(1 - Pi) x| for the polished product witness x.
  double residual = 1.0;
  /// Pi x / |Pi x|: the in-subspace vector closest to the witness.
  ComplexVector projected_witness;
  /// Largest 2x2 minor of the projected witness (zero iff product).
  double max_minor = 1.0;
};

namespace detail {
// Alternating projection between the subspace and the product vectors.
// Tracks the residual |(1 - Pi) x| directly, which stays accurate where
// 1 - overlap has lost all digits.
inline void polish_product_witness(const Subspace& s, ComplexVector& a, ComplexVector& b, double& residual,
                                   int max_iterations = 5000) {
  const BipartiteShape& shape = s.shape();
  const ComplexMatrix& q = s.basis();
  auto resid = [&](const ComplexVector& x) { return (x - q * (q.adjoint() * x)).norm(); };
  residual = resid(tensor(a, b));
  int stalls = 0;
  for (int it = 0; it < max_iterations && residual > 1e-16; ++it) {
    const ComplexVector y = q * (q.adjoint() * tensor(a, b));
    Eigen::JacobiSVD<ComplexMatrix> svd(vec_to_matrix(y, shape), Eigen::ComputeThinU | Eigen::ComputeThinV);
    ComplexVector na = svd.matrixV().col(0).conjugate();
    ComplexVector nb = svd.matrixU().col(0);
    const double r = resid(tensor(na, nb));
    if (r < residual) {
      stalls = (r > 0.999 * residual) ? stalls + 1 : 0;
      a = na;
      b = nb;
      residual = r;
    } else {
      ++stalls;
    }
    if (stalls >= 20) break;
  }
}
}  // namespace detail

/// True iff the best product overlap found is >= 1 - tol. Positive decisions
/// are polished and carry a minor-checkable witness.
inline ProductDecision contains_product_vector(const Subspace& s, double tol, const ProductSearchOptions& opt = {}) {
  ProductDecision d;
  d.report = product_overlap_max(s, opt);
  d.contains = d.report.best_overlap >= 1.0 - tol;
  ComplexVector a = d.report.witness_a, b = d.report.witness_b;
  if (d.contains) {
    detail::polish_product_witness(s, a, b, d.residual);
  } else {
    const ComplexVector x = tensor(a, b);
    d.residual = (x - s.basis() * (s.basis().adjoint() * x)).norm();
  }
  const ComplexVector y = s.basis() * (s.basis().adjoint() * tensor(a, b));
  d.projected_witness = y / y.norm();
  d.max_minor = max_abs_minor(vec_to_matrix(d.projected_witness, s.shape()));
  return d;
}

/// (d_A - 1)(d_B - 1): the largest subspace dimension that generically avoids
/// the product vectors.
inline int generic_threshold(const BipartiteShape& shape) { return (shape.d_a() - 1) * (shape.d_b() - 1); }

/// d_A d_B > d_A + d_B + d_E - 2.
inline bool lemma1_condition(const BipartiteShape& shape, int d_e) {
  return shape.total() > shape.d_a() + shape.d_b() + d_e - 2;
}

// ---------------------------------------------------------------------------
// CJ states supported on a subspace

/// sum_i w_i |b_i><b_i|.
inline SpectralState weighted_cj(const Subspace& s, const std::vector<double>& weights) {
  if (static_cast<Eigen::Index>(weights.size()) != s.dim())
    throw DimensionError("weighted_cj: " + std::to_string(weights.size()) + " weights for a subspace of dimension " +
                         std::to_string(s.dim()));
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("weighted_cj: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw DomainError("weighted_cj: weights sum to " + std::to_string(sum));
  ComplexMatrix m = ComplexMatrix::Zero(s.shape().total(), s.shape().total());
  for (Eigen::Index i = 0; i < s.dim(); ++i) m += weights[static_cast<std::size_t>(i)] * s.basis().col(i) * s.basis().col(i).adjoint();
  return SpectralState(m);
}

inline std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

inline std::vector<double> renormalized(std::vector<double> w) {
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return w;
}

/// Reference weights for the basis of R, six significant digits; renormalized on use.
inline const std::array<double, 6> kReferenceWeightsR{0.172776, 0.118738, 0.199229, 0.136705, 0.306899, 0.0656529};
/// Reference weights for the basis of S.
inline const std::array<double, 6> kReferenceWeightsS{0.344911, 0.124908, 0.120721, 0.156968, 0.162754, 0.089738};

inline std::vector<double> paper_weights_R() {
  return renormalized(std::vector<double>(kReferenceWeightsR.begin(), kReferenceWeightsR.end()));
}
inline std::vector<double> paper_weights_S() {
  return renormalized(std::vector<double>(kReferenceWeightsS.begin(), kReferenceWeightsS.end()));
}

struct ChannelPair {
  Channel n1;
  Channel n2;
};

/// Channels with rho = weighted_cj(R, w_r) and sigma^T = weighted_cj(S, w_s).
inline ChannelPair channels_from_subspaces(const Subspace& r, const Subspace& s, const std::vector<double>& w_r,
                                           const std::vector<double>& w_s) {
  const SpectralState rho = weighted_cj(r, w_r);
  const SpectralState sigma(weighted_cj(s, w_s).matrix().transpose());
  return {Channel(rho, r.shape()), Channel(sigma, s.shape())};
}

enum class CjVariant { projector, paper_weights, custom };

inline ChannelPair explicit_pair(CjVariant variant, const std::vector<double>& w_r = {},
                                 const std::vector<double>& w_s = {}) {
  switch (variant) {
    case CjVariant::projector:
      return channels_from_subspaces(subspace_R(), subspace_S(), uniform_weights(6), uniform_weights(6));
    case CjVariant::paper_weights:
      return channels_from_subspaces(subspace_R(), subspace_S(), paper_weights_R(), paper_weights_S());
    case CjVariant::custom:
      return channels_from_subspaces(subspace_R(), subspace_S(), w_r, w_s);
  }
  throw DomainError("explicit_pair: unknown variant");
}

// ---------------------------------------------------------------------------
// Random orthogonal pairs

struct RandomPair {
  SubspacePair subspaces;
  SpectralState rho;    // (2 / d_A d_B) Pi
  SpectralState sigma;  // (2 / d_A d_B) (1 - Pi)^T
  std::uint64_t seed;   // seed that produced the accepted sample
  int attempts;         // 1 + number of rejected samples
};

/// Random Pi of rank d_A d_B / 2 from a Haar unitary; sigma^T projects onto
/// the complement. Resamples (derived seeds) while either A-marginal is
/// rank deficient.
inline RandomPair random_orthogonal_pair(const BipartiteShape& shape, std::uint64_t seed, int max_attempts = 16) {
  const int n = shape.total();
  if (n % 2 != 0) throw DomainError("random_orthogonal_pair: d_A * d_B must be even, got " + std::to_string(n));
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt));
    Rng rng(s);
    const ComplexMatrix u = haar_unitary(n, rng);
    Subspace r(shape, u.leftCols(n / 2));
    Subspace c(shape, u.rightCols(n / 2));
    const ComplexMatrix pi = projector(r);
    const ComplexMatrix pc = projector(c);
    SpectralState rho(pi * (2.0 / n));
    SpectralState sigma(ComplexMatrix(pc.transpose()) * (2.0 / n));
    auto min_marginal = [&](const SpectralState& st) {
      return hermitian_eigenvalues(partial_trace(st.matrix(), shape, Subsystem::B))(0);
    };
    if (min_marginal(rho) < channel_tol::marginal_min || min_marginal(sigma) < channel_tol::marginal_min) continue;
    return RandomPair{SubspacePair{std::move(r), std::move(c)}, std::move(rho), std::move(sigma), s, attempt + 1};
  }
  throw NumericalError("random_orthogonal_pair: no sample with full-rank marginals");
}

inline ChannelPair channels_of(const RandomPair& pair) {
  const BipartiteShape& shape = pair.subspaces.r.shape();
  return {Channel(pair.rho, shape), Channel(pair.sigma, shape)};
}

}  // namespace minout

#endif  // MINOUT_CONSTRUCTION_HPP
