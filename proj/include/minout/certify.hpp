#ifndef MINOUT_CERTIFY_HPP
#define MINOUT_CERTIFY_HPP

// One-sided bounds on min_phi lambda_min(N(phi)) and the resulting
// additivity-violation thresholds.
//
// With Omega the standard CJ operator of N,
//   min_phi lambda_min(N(phi)) = min_{phi,psi} tr[Omega (phi (x) psi)]
//                              >= min_{rho PPT} tr[Omega rho].
// A dual point Omega - lambda 1 = X + Y^{T_B} with X, Y >= 0 certifies
// lambda as a lower bound without trusting the solver: for any PPT rho,
// tr(Omega rho) - lambda = tr(X rho) + tr(Y rho^{T_B}) >= 0.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>

#include "minout/construction.hpp"
#include "minout/qmath.hpp"
#include "minout/sdp.hpp"

namespace minout {

struct SdpCertificate {
  double primal_value = 0.0;  // tr(Omega rho) at the solver's primal point
  double dual_value = 0.0;    // certified lambda
  double lambda = 0.0;        // same as dual_value
  ComplexMatrix x;            // Omega - lambda 1 - Y^{T_B}
  ComplexMatrix y;            // PSD part acting through the partial transpose
  double residual = 0.0;      // |Omega - lambda 1 - X - Y^{T_B}|_max
  double min_eig_x = 0.0;
  double min_eig_y = 0.0;
  int iterations = 0;
  bool converged = false;
  double relative_gap = 1.0;
};

struct CertificateCheck {
  double residual = 0.0;
  double min_eig_x = 0.0;
  double min_eig_y = 0.0;
  bool passed = false;
};

namespace certify_tol {
inline constexpr double residual = 1e-8;
inline constexpr double psd = -1e-10;
inline constexpr double safety_margin = 1e-9;
}  // namespace certify_tol

/// Independent re-check of a dual witness: recomputes the residual and the
/// PSD minima from (Omega, lambda, X, Y) alone.
inline CertificateCheck check_certificate(const ComplexMatrix& omega, const BipartiteShape& shape, double lambda,
                                          const ComplexMatrix& x, const ComplexMatrix& y) {
  CertificateCheck c;
  const Eigen::Index n = shape.total();
  if (omega.rows() != n || x.rows() != n || y.rows() != n || x.cols() != n || y.cols() != n)
    throw DimensionError("check_certificate: matrix sizes do not match the shape");
  const ComplexMatrix r = omega - lambda * ComplexMatrix::Identity(n, n) - x - partial_transpose(y, shape);
  c.residual = max_abs(r);
  c.min_eig_x = hermitian_eigenvalues(0.5 * (x + x.adjoint()))(0);
  c.min_eig_y = hermitian_eigenvalues(0.5 * (y + y.adjoint()))(0);
  c.passed = c.residual <= certify_tol::residual && c.min_eig_x >= certify_tol::psd && c.min_eig_y >= certify_tol::psd &&
             is_hermitian(x, 1e-10) && is_hermitian(y, 1e-10);
  return c;
}

inline CertificateCheck check_certificate(const ComplexMatrix& omega, const BipartiteShape& shape,
                                          const SdpCertificate& cert) {
  return check_certificate(omega, shape, cert.lambda, cert.x, cert.y);
}

/// PPT lower bound on min tr(Omega rho) over states. The certified value is
/// rebuilt from the solver's Y: Y is clipped to the PSD cone, then
/// lambda = lambda_min(Omega - Y^{T_B}) and X = Omega - lambda 1 - Y^{T_B}.
/// Throws NumericalError when the solver does not reach the gap target.
inline SdpCertificate ppt_lower_bound(const ComplexMatrix& omega, const BipartiteShape& shape,
                                      const sdp::Options& opt = {}) {
  const sdp::Result res = sdp::solve_ppt(omega, shape, opt);
  const ComplexMatrix om = 0.5 * (omega + omega.adjoint());
  const Eigen::Index n = shape.total();

  auto ey = hermitian_eig(0.5 * (res.y + res.y.adjoint()));
  const RealVector clipped = ey.values.cwiseMax(0.0);
  ComplexMatrix y = ey.vectors * clipped.asDiagonal() * ey.vectors.adjoint();
  y = 0.5 * (y + y.adjoint()).eval();

  const ComplexMatrix shifted = om - partial_transpose(y, shape);
  const double lambda = hermitian_eigenvalues(shifted)(0);
  ComplexMatrix x = shifted - lambda * ComplexMatrix::Identity(n, n);
  x = 0.5 * (x + x.adjoint()).eval();

  SdpCertificate cert;
  const double tr = res.rho.trace().real();
  cert.primal_value = (om * res.rho).trace().real() / tr;
  cert.dual_value = lambda;
  cert.lambda = lambda;
  cert.x = std::move(x);
  cert.y = std::move(y);
  cert.iterations = res.iterations;
  cert.converged = res.converged;
  cert.relative_gap = res.relative_gap;
  const CertificateCheck chk = check_certificate(omega, shape, cert);
  cert.residual = chk.residual;
  cert.min_eig_x = chk.min_eig_x;
  cert.min_eig_y = chk.min_eig_y;
  if (!res.converged)
    throw NumericalError("ppt_lower_bound: solver stopped after " + std::to_string(res.iterations) +
                         " iterations with relative gap " + std::to_string(res.relative_gap));
  return cert;
}

struct SeesawResult {
  double value = 0.0;
  ComplexVector phi;  // on A
  ComplexVector psi;  // on B
};

/// Multi-restart alternating bottom-eigenvector iteration for
/// min_{phi,psi} <phi (x) psi|Omega|phi (x) psi>; an upper bound on the
/// separable minimum.
inline SeesawResult seesaw_separable_min(const ComplexMatrix& omega, const BipartiteShape& shape, int restarts,
                                         std::uint64_t seed, int max_iterations = 500) {
  if (restarts < 1) throw DomainError("seesaw_separable_min: restarts must be >= 1");
  if (omega.rows() != shape.total()) throw DimensionError("seesaw_separable_min: Omega does not match the shape");
  SeesawResult best;
  best.value = 1e300;
  for (int r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    const ComplexVector a0 = random_unit_vector(shape.d_a(), rng);
    auto st = detail::seesaw(omega, shape, a0, false, 1e-14, max_iterations);
    if (st.value < best.value) {
      best.value = st.value;
      best.phi = st.a;
      best.psi = st.b;
    }
  }
  const ComplexVector x = tensor(best.phi, best.psi);
  best.value = (x.adjoint() * omega * x)(0, 0).real();
  return best;
}

// ---------------------------------------------------------------------------
// Entropy bounds and thresholds

/// Lower bound (bits) on S_p of any d_B-dimensional state whose smallest
/// eigenvalue is at least c. sum_i lambda_i^p is concave, so its minimum over
/// the polytope {lambda >= c, sum = 1} sits at the vertex
/// (c, ..., c, 1 - (d_B - 1) c).
inline double entropy_lower_from_eigbound(double c, int d_b, double p) {
  if (d_b < 2) throw DomainError("entropy_lower_from_eigbound: d_B must be >= 2");
  if (!(c > 0.0) || c > 1.0 / d_b * (1.0 + 1e-12))
    throw DomainError("entropy_lower_from_eigbound: c must lie in (0, 1/d_B]");
  if (!(p >= 0.0) || p >= 1.0) throw DomainError("entropy_lower_from_eigbound: p must lie in [0, 1)");
  c = std::min(c, 1.0 / d_b);
  const double big = std::max(0.0, 1.0 - (d_b - 1) * c);
  if (p == 0.0) return std::log2(static_cast<double>(big > 0.0 ? d_b : d_b - 1));
  const double sum = (d_b - 1) * std::pow(c, p) + (big > 0.0 ? std::pow(big, p) : 0.0);
  return std::log2(sum) / (1.0 - p);
}

/// The weaker bound using sum_i lambda_i^p >= d_B c^p:
/// (1/(1-p)) log2(d_B c^p).
inline double entropy_lower_uniform_floor(double c, int d_b, double p) {
  if (!(c > 0.0)) throw DomainError("entropy_lower_uniform_floor: c must be positive");
  if (!(p >= 0.0) || p >= 1.0) throw DomainError("entropy_lower_uniform_floor: p must lie in [0, 1)");
  return (std::log2(static_cast<double>(d_b)) + p * std::log2(c)) / (1.0 - p);
}

enum class EigBoundForm {
  vertex,         // entropy_lower_from_eigbound
  uniform_floor,  // entropy_lower_uniform_floor
};

struct ThresholdReport {
  double c1 = 0.0;
  double c2 = 0.0;
  int d_b = 0;
  int joint_rank_bound = 0;
  double p_star = 0.0;
  EigBoundForm form = EigBoundForm::vertex;
};

/// Largest p (bisection to 1e-6) with L(c1, p) + L(c2, p) > log2(joint rank
/// bound); every p <= p_star is a certified violation. Empty when even p = 0
/// gives no violation.
inline std::optional<ThresholdReport> certified_violation_threshold(double c1, double c2, int d_b, int joint_rank_bound,
                                                                    EigBoundForm form = EigBoundForm::vertex,
                                                                    double p_tol = 1e-6) {
  if (!(c1 > 0.0) || !(c2 > 0.0) || c1 > 1.0 / d_b * (1.0 + 1e-12) || c2 > 1.0 / d_b * (1.0 + 1e-12))
    throw DomainError("certified_violation_threshold: eigenvalue bounds must lie in (0, 1/d_B]");
  if (joint_rank_bound < 1) throw DomainError("certified_violation_threshold: joint rank bound must be >= 1");
  auto bound = [&](double c, double p) {
    return form == EigBoundForm::vertex ? entropy_lower_from_eigbound(c, d_b, p) : entropy_lower_uniform_floor(c, d_b, p);
  };
  const double joint = std::log2(static_cast<double>(joint_rank_bound));
  auto margin = [&](double p) { return bound(c1, p) + bound(c2, p) - joint; };
  if (!(margin(0.0) > 0.0)) return std::nullopt;
  // both lower bounds are Renyi entropies of fixed spectra, so the margin is
  // non-increasing in p
  double lo = 0.0, hi = 1.0 - 1e-12;
  if (margin(hi) > 0.0) {
    lo = hi;
  } else {
    while (hi - lo > p_tol) {
      const double mid = 0.5 * (lo + hi);
      (margin(mid) > 0.0 ? lo : hi) = mid;
    }
  }
  return ThresholdReport{c1, c2, d_b, joint_rank_bound, lo, form};
}

/// 1 / (1 + 2 ln2 d_B^2): sufficient for 2p/(1-p) <= -log2(1 - 1/d_B^2).
/// Meaningful only in the concentration regime (large d_A >> d_B).
inline double concentration_threshold(int d_b) {
  if (d_b < 2) throw DomainError("concentration_threshold: d_B must be >= 2");
  return 1.0 / (1.0 + 2.0 * std::numbers::ln2 * d_b * d_b);
}

/// Certified eigenvalue floor fed to the thresholds: lambda minus a margin.
inline double certified_floor(const SdpCertificate& cert) { return cert.dual_value - certify_tol::safety_margin; }

}  // namespace minout

#endif  // MINOUT_CERTIFY_HPP
