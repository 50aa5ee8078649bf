#ifndef MINOUT_CHANNELS_HPP
#define MINOUT_CHANNELS_HPP

// Channels represented by generalized Choi-Jamiolkowski states.
//
// A channel N : B(C^{d_A}) -> B(C^{d_B}) is stored as rho_AB = (id (x) N) Psi
// for a reference state Psi of full Schmidt rank. With the reference unitary
// fixed to the identity, Psi is determined by rho_A = tr_B rho_AB and
//
//   N(phi) = tr_A[ rho_AB (rho_A^{-1/2} conj(phi) rho_A^{-1/2} (x) 1) ],
//
// conjugation taken in the computational basis. The standard operator
// Omega = (rho_A^{-1/2} (x) 1) rho_AB (rho_A^{-1/2} (x) 1) satisfies
// tr_B Omega = 1 and N(phi) = tr_A[Omega (conj(phi) (x) 1)].

#include <string>
#include <vector>

#include "minout/qmath.hpp"

namespace minout {

namespace channel_tol {
inline constexpr double marginal_floor = 1e-12;   // eigenvalue floor for rho_A^{-1/2}
inline constexpr double marginal_min = 1e-8;      // below this rho_A is rank deficient
}  // namespace channel_tol

/// Immutable channel built from a validated CJ state.
class Channel {
 public:
  /// channel_from_cj. Throws DomainError if rho_A is rank deficient.
  Channel(const SpectralState& cj, BipartiteShape shape) : shape_(shape), cj_(cj) {
    if (cj.dim() != shape.total())
      throw DimensionError("Channel: CJ state has dimension " + std::to_string(cj.dim()) + ", shape " +
                           to_string(shape) + " needs " + std::to_string(shape.total()));
    marginal_ = partial_trace(cj.matrix(), shape, Subsystem::B);
    const auto eig = hermitian_eig(marginal_);
    if (eig.values(0) < channel_tol::marginal_min)
      throw DomainError("Channel: A-marginal of the CJ state is rank deficient (min eigenvalue " +
                        std::to_string(eig.values(0)) + ")");
    const RealVector inv_sqrt =
        eig.values.unaryExpr([](double x) { return 1.0 / std::sqrt(std::max(x, channel_tol::marginal_floor)); });
    const RealVector sqrt_vals = eig.values.unaryExpr([](double x) { return std::sqrt(std::max(x, 0.0)); });
    marginal_inv_sqrt_ = eig.vectors * inv_sqrt.asDiagonal() * eig.vectors.adjoint();
    marginal_sqrt_ = eig.vectors * sqrt_vals.asDiagonal() * eig.vectors.adjoint();
    min_marginal_eigenvalue_ = eig.values(0);

    const ComplexMatrix k = tensor(marginal_inv_sqrt_, ComplexMatrix::Identity(shape.d_b(), shape.d_b()));
    omega_ = k * cj.matrix() * k;
    omega_ = 0.5 * (omega_ + omega_.adjoint()).eval();
  }

  const BipartiteShape& shape() const { return shape_; }
  int input_dim() const { return shape_.d_a(); }
  int output_dim() const { return shape_.d_b(); }
  const SpectralState& cj() const { return cj_; }
  /// rho_A = tr_B rho_AB.
  const ComplexMatrix& marginal() const { return marginal_; }
  const ComplexMatrix& marginal_sqrt() const { return marginal_sqrt_; }
  const ComplexMatrix& marginal_inv_sqrt() const { return marginal_inv_sqrt_; }
  double min_marginal_eigenvalue() const { return min_marginal_eigenvalue_; }
  /// Standard CJ operator Omega (trace d_A).
  const ComplexMatrix& standard_cj() const { return omega_; }

  /// N(phi) through the generalized CJ state.
  ComplexMatrix apply_matrix(const ComplexMatrix& phi) const {
    check_input(phi);
    const ComplexMatrix x = marginal_inv_sqrt_ * phi.conjugate() * marginal_inv_sqrt_;
    const ComplexMatrix t = cj_.matrix() * tensor(x, ComplexMatrix::Identity(output_dim(), output_dim()));
    ComplexMatrix out = partial_trace(t, shape_, Subsystem::A);
    return 0.5 * (out + out.adjoint());
  }

  /// N(phi) through the standard operator Omega.
  ComplexMatrix apply_standard(const ComplexMatrix& phi) const {
    check_input(phi);
    const ComplexMatrix t = omega_ * tensor(ComplexMatrix(phi.conjugate()), ComplexMatrix::Identity(output_dim(), output_dim()));
    ComplexMatrix out = partial_trace(t, shape_, Subsystem::A);
    return 0.5 * (out + out.adjoint());
  }

  /// N(|phi><phi|) for a (not necessarily normalized) vector, scaled by
  /// |phi|^2. Uses N = (conj(phi) (x) 1)^dagger Omega (conj(phi) (x) 1).
  ComplexMatrix apply_pure(const ComplexVector& phi) const {
    if (phi.size() != input_dim()) throw DimensionError("Channel::apply_pure: input dimension mismatch");
    const int db = output_dim();
    // K has rows (a, b) and columns c: K_{(a,b),c} = conj(phi_a) delta_{bc}
    ComplexMatrix out = ComplexMatrix::Zero(db, db);
    for (int a = 0; a < input_dim(); ++a) {
      const cplx ca = phi(a);  // conj(conj(phi_a))
      if (ca == 0.0) continue;
      for (int a2 = 0; a2 < input_dim(); ++a2) {
        const cplx w = ca * std::conj(phi(a2));
        if (w == 0.0) continue;
        out.noalias() += w * omega_.block(a * db, a2 * db, db, db);
      }
    }
    return out;
  }

  SpectralState apply(const SpectralState& phi) const { return SpectralState(apply_matrix(phi.matrix())); }

 private:
  void check_input(const ComplexMatrix& phi) const {
    if (phi.rows() != input_dim() || phi.cols() != input_dim())
      throw DimensionError("Channel::apply: input is " + std::to_string(phi.rows()) + "x" +
                           std::to_string(phi.cols()) + ", channel input dimension is " +
                           std::to_string(input_dim()));
  }

  BipartiteShape shape_;
  SpectralState cj_;
  ComplexMatrix marginal_;
  ComplexMatrix marginal_sqrt_;
  ComplexMatrix marginal_inv_sqrt_;
  double min_marginal_eigenvalue_ = 0.0;
  ComplexMatrix omega_;
};

inline Channel channel_from_cj(const SpectralState& cj, BipartiteShape shape) { return Channel(cj, shape); }

inline ComplexMatrix standard_cj(const Channel& n) { return n.standard_cj(); }

/// Identity channel on C^d (CJ state = Phi_d).
inline Channel identity_channel(int d) {
  const ComplexVector phi = maximally_entangled(d);
  return Channel(SpectralState(phi * phi.adjoint()), BipartiteShape(d, d));
}

/// Completely depolarizing channel C^{d_A} -> C^{d_B}.
inline Channel depolarizing_channel(BipartiteShape shape) {
  return Channel(SpectralState(ComplexMatrix::Identity(shape.total(), shape.total()) / double(shape.total())), shape);
}

/// System permutation taking (A B A' B') to (A A')(B B').
inline ComplexMatrix joint_order(const ComplexMatrix& rho_ab_x_sigma_ab, const BipartiteShape& left,
                                 const BipartiteShape& right) {
  return permute_systems(rho_ab_x_sigma_ab, {left.d_a(), left.d_b(), right.d_a(), right.d_b()}, {0, 2, 1, 3});
}

/// N1 (x) N2. The joint CJ state is rho (x) sigma in system order (A A')(B B').
struct JointChannel {
  Channel left;
  Channel right;
  Channel joint;
};

inline JointChannel tensor_channels(const Channel& n1, const Channel& n2) {
  const ComplexMatrix product = tensor(n1.cj().matrix(), n2.cj().matrix());
  const ComplexMatrix ordered = joint_order(product, n1.shape(), n2.shape());
  BipartiteShape js(n1.input_dim() * n2.input_dim(), n1.output_dim() * n2.output_dim());
  return JointChannel{n1, n2, Channel(SpectralState(ordered), js)};
}

/// Normalized (conj(sqrt rho_A) (x) conj(sqrt sigma_A')) |Phi>_{AA'}: the joint
/// input whose conjugate, after the rho_A^{-1/2} twist, is exactly Phi_{AA'}.
inline PureVector special_input(const Channel& n1, const Channel& n2) {
  if (n1.input_dim() != n2.input_dim())
    throw DimensionError("special_input: channels must have equal input dimension");
  const ComplexMatrix k = tensor(ComplexMatrix(n1.marginal_sqrt().conjugate()), ComplexMatrix(n2.marginal_sqrt().conjugate()));
  return PureVector(k * maximally_entangled(n1.input_dim()));
}

}  // namespace minout

#endif  // MINOUT_CHANNELS_HPP
