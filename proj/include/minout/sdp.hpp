#ifndef MINOUT_SDP_HPP
#define MINOUT_SDP_HPP

// Dense primal-dual interior-point solver for the PPT relaxation
//
//   minimize   tr(Omega rho)
//   subject to rho >= 0,  rho^{T_B} >= 0,  tr rho = 1,
//
// written in standard block form with Z = diag(rho, W):
//
//   (P) min <C, Z>  s.t.  tr rho = 1,  rho^{T_B} - W = 0,  Z >= 0
//   (D) max y_0     s.t.  S = C - A^T(y) >= 0,
//       A^T(y) = diag(y_0 1 + H(y)^{T_B}, -H(y)),
//
// where H(y) = sum_k y_k E_k over an orthonormal basis of Hermitian n x n
// matrices. The dual slack is S = diag(Omega - y_0 1 - Y^{T_B}, Y) with
// Y = H(y), so any dual point gives Omega - y_0 1 = X + Y^{T_B}, X, Y >= 0.
// Search directions are HKM with a Mehrotra predictor-corrector.

#include <cmath>
#include <string>
#include <tuple>

#include "minout/qmath.hpp"

namespace minout::sdp {

struct Options {
  int max_iterations = 200;
  double gap_tol = 1e-9;         // relative duality gap target
  double feas_tol = 1e-9;        // relative primal/dual infeasibility target
  double accept_gap = 1e-7;      // gap at which a capped run still counts as converged
  double step_fraction = 0.95;
};

struct Result {
  ComplexMatrix rho;   // primal block 1 (approximately a PPT state)
  ComplexMatrix w;     // primal block 2, equals rho^{T_B} at feasibility
  double y0 = 0.0;     // dual objective
  ComplexMatrix y;     // Y = H(y)
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double relative_gap = 1.0;
  double primal_infeasibility = 1.0;
  double dual_infeasibility = 1.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Coordinates <E_k, X> = Re tr(E_k X) of a (not necessarily Hermitian) X in
// the orthonormal Hermitian basis: diagonal units, then for i < j the pairs
// (e_ij + e_ji)/sqrt2 and i(e_ij - e_ji)/sqrt2.
inline RealVector herm_coords(const ComplexMatrix& x) {
  const Eigen::Index n = x.rows();
  RealVector c(n * n);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < n; ++i) c(k++) = x(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      c(k++) = r2 * (x(j, i).real() + x(i, j).real());
      c(k++) = r2 * (x(i, j).imag() - x(j, i).imag());
    }
  return c;
}

inline ComplexMatrix herm_from_coords(const RealVector& c, Eigen::Index n) {
  ComplexMatrix h = ComplexMatrix::Zero(n, n);
  Eigen::Index k = 0;
  const double r2 = std::sqrt(0.5);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = c(k++);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double re = r2 * c(k++);
      const double im = r2 * c(k++);
      // i(e_ij - e_ji): entry (i,j) = i, entry (j,i) = -i
      h(i, j) += cplx(re, im);
      h(j, i) += cplx(re, -im);
    }
  return h;
}

inline double inner(const ComplexMatrix& a, const ComplexMatrix& b) { return (a.adjoint() * b).trace().real(); }

inline ComplexMatrix herm(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

struct Block2 {
  ComplexMatrix first, second;
};

class PptProblem {
 public:
  PptProblem(const ComplexMatrix& omega, const BipartiteShape& shape) : omega_(omega), shape_(shape), n_(shape.total()) {}

  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return 1 + n_ * n_; }

  // A(G) for a block pair G (non-Hermitian allowed).
  RealVector apply_a(const Block2& g) const {
    RealVector out(m());
    out(0) = g.first.trace().real();
    out.tail(n_ * n_) = herm_coords(partial_transpose(g.first, shape_)) - herm_coords(g.second);
    return out;
  }

  Block2 apply_at(const RealVector& y) const {
    const ComplexMatrix h = herm_from_coords(y.tail(n_ * n_), n_);
    return {y(0) * ComplexMatrix::Identity(n_, n_) + partial_transpose(h, shape_), -h};
  }

  RealVector b() const {
    RealVector v = RealVector::Zero(m());
    v(0) = 1.0;
    return v;
  }

  Block2 c() const { return {omega_, ComplexMatrix::Zero(n_, n_)}; }

  // Schur complement M_ij = <A_i, Z A_j S^{-1}>, symmetrized.
  Eigen::MatrixXd schur(const Block2& z, const Block2& s_inv) const {
    const Eigen::Index mm = m();
    Eigen::MatrixXd mat(mm, mm);
    RealVector ej = RealVector::Zero(mm);
    for (Eigen::Index j = 0; j < mm; ++j) {
      ej.setZero();
      ej(j) = 1.0;
      const Block2 aj = apply_at(ej);
      const Block2 g{z.first * aj.first * s_inv.first, z.second * aj.second * s_inv.second};
      mat.col(j) = apply_a(g);
    }
    return 0.5 * (mat + mat.transpose());
  }

 private:
  ComplexMatrix omega_;
  BipartiteShape shape_;
  Eigen::Index n_;
};

// Largest alpha in (0, 1] keeping X + alpha dX positive definite.
inline double max_step(const ComplexMatrix& x, const ComplexMatrix& dx) {
  Eigen::LLT<ComplexMatrix> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  const ComplexMatrix linv = llt.matrixL().solve(ComplexMatrix::Identity(x.rows(), x.cols()));
  const ComplexMatrix t = herm(linv * dx * linv.adjoint());
  const double lmin = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(t, Eigen::EigenvaluesOnly).eigenvalues()(0);
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -1.0 / lmin);
}

inline ComplexMatrix inverse_hpd(const ComplexMatrix& x) {
  Eigen::LLT<ComplexMatrix> llt(x);
  if (llt.info() != Eigen::Success) throw NumericalError("sdp: iterate lost positive definiteness");
  return llt.solve(ComplexMatrix::Identity(x.rows(), x.cols()));
}

}  // namespace detail

/// Solves the PPT relaxation of min tr(Omega rho) over states.
inline Result solve_ppt(const ComplexMatrix& omega, const BipartiteShape& shape, const Options& opt = {}) {
  using detail::Block2;
  if (omega.rows() != shape.total() || omega.cols() != shape.total())
    throw DimensionError("solve_ppt: Omega does not match the shape");
  if (!is_hermitian(omega)) throw DomainError("solve_ppt: Omega is not Hermitian");
  const ComplexMatrix om = detail::herm(omega);
  detail::PptProblem prob(om, shape);
  const Eigen::Index n = prob.n();
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);

  const RealVector b = prob.b();
  const Block2 c = prob.c();
  const double c_norm = om.norm();

  Block2 z{id / double(n), id / double(n)};
  const double s0 = 1.0 + c_norm;
  Block2 s{s0 * id, s0 * id};
  RealVector y = RealVector::Zero(prob.m());

  Result res;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Block2 aty = prob.apply_at(y);
    const Block2 rd{c.first - aty.first - s.first, c.second - aty.second - s.second};
    const RealVector rp = b - prob.apply_a(z);
    const double pobj = detail::inner(c.first, z.first);
    const double dobj = y(0);
    const double mu = (detail::inner(z.first, s.first) + detail::inner(z.second, s.second)) / (2.0 * n);

    res.primal_objective = pobj;
    res.dual_objective = dobj;
    res.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    res.primal_infeasibility = rp.norm() / (1.0 + b.norm());
    res.dual_infeasibility = std::sqrt(rd.first.squaredNorm() + rd.second.squaredNorm()) / (1.0 + c_norm);
    res.iterations = it;
    if (res.relative_gap < opt.gap_tol && res.primal_infeasibility < opt.feas_tol &&
        res.dual_infeasibility < opt.feas_tol) {
      res.converged = true;
      break;
    }

    const Block2 sinv{detail::inverse_hpd(s.first), detail::inverse_hpd(s.second)};
    const Eigen::MatrixXd schur = prob.schur(z, sinv);
    Eigen::LLT<Eigen::MatrixXd> chol(schur);
    if (chol.info() != Eigen::Success) break;

    // HKM direction; the corrector adds the second-order term dZ_p dS_p S^{-1}.
    auto direction = [&](double sigma_mu, const Block2* dz_p, const Block2* ds_p) {
      RealVector rhs = b;
      rhs -= prob.apply_a(Block2{sigma_mu * sinv.first, sigma_mu * sinv.second});
      rhs += prob.apply_a(Block2{z.first * rd.first * sinv.first, z.second * rd.second * sinv.second});
      if (dz_p != nullptr)
        rhs += prob.apply_a(Block2{dz_p->first * ds_p->first * sinv.first, dz_p->second * ds_p->second * sinv.second});
      const RealVector dy = chol.solve(rhs);
      const Block2 atdy = prob.apply_at(dy);
      const Block2 ds{detail::herm(rd.first - atdy.first), detail::herm(rd.second - atdy.second)};
      ComplexMatrix d1 = sigma_mu * sinv.first - z.first - z.first * ds.first * sinv.first;
      ComplexMatrix d2 = sigma_mu * sinv.second - z.second - z.second * ds.second * sinv.second;
      if (dz_p != nullptr) {
        d1 -= dz_p->first * ds_p->first * sinv.first;
        d2 -= dz_p->second * ds_p->second * sinv.second;
      }
      return std::tuple<RealVector, Block2, Block2>(dy, Block2{detail::herm(d1), detail::herm(d2)}, ds);
    };

    // predictor
    auto [dy_p, dz_p, ds_p] = direction(0.0, nullptr, nullptr);
    const double ap = std::min(detail::max_step(z.first, dz_p.first), detail::max_step(z.second, dz_p.second));
    const double ad = std::min(detail::max_step(s.first, ds_p.first), detail::max_step(s.second, ds_p.second));
    const double mu_aff = (detail::inner(z.first + ap * dz_p.first, s.first + ad * ds_p.first) +
                           detail::inner(z.second + ap * dz_p.second, s.second + ad * ds_p.second)) /
                          (2.0 * n);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // corrector
    auto [dy, dz, ds] = direction(sigma * mu, &dz_p, &ds_p);
    const double alpha_p =
        std::min(1.0, opt.step_fraction * std::min(detail::max_step(z.first, dz.first), detail::max_step(z.second, dz.second)));
    const double alpha_d =
        std::min(1.0, opt.step_fraction * std::min(detail::max_step(s.first, ds.first), detail::max_step(s.second, ds.second)));
    z.first += alpha_p * dz.first;
    z.second += alpha_p * dz.second;
    y += alpha_d * dy;
    s.first += alpha_d * ds.first;
    s.second += alpha_d * ds.second;
    res.iterations = it + 1;
  }
  if (!res.converged && res.relative_gap < opt.accept_gap && res.primal_infeasibility < opt.accept_gap &&
      res.dual_infeasibility < opt.accept_gap)
    res.converged = true;

  res.rho = z.first;
  res.w = z.second;
  res.y0 = y(0);
  res.y = detail::herm_from_coords(y.tail(n * n), n);
  return res;
}

}  // namespace minout::sdp

#endif  // MINOUT_SDP_HPP
