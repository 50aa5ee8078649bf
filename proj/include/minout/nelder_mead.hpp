#ifndef MINOUT_NELDER_MEAD_HPP
#define MINOUT_NELDER_MEAD_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace minout::optim {

struct NelderMeadOptions {
  double initial_step = 0.25;
  /// Stop once the simplex spread max f - min f falls below
  /// f_tol * max(|f_best|, f_floor).
  double f_tol = 1e-11;
  double f_floor = 1e-3;
  int max_evaluations = 20000;
  /// Rebuild the simplex around the best vertex after convergence, this many
  /// times; guards against collapsed simplices.
  int rebuilds = 1;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Unconstrained Nelder-Mead minimization (standard coefficients 1, 2, 1/2,
/// 1/2). Never returns a point worse than x0.
template <class F>
NelderMeadResult nelder_mead(F&& f, const Eigen::VectorXd& x0, const NelderMeadOptions& opt = {}) {
  const Eigen::Index n = x0.size();
  NelderMeadResult res;
  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1));
  std::vector<double> val(static_cast<std::size_t>(n + 1));
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  Eigen::VectorXd best_x = x0;
  double best_f = eval(x0);

  for (int round = 0; round <= opt.rebuilds; ++round) {
    pts[0] = best_x;
    val[0] = best_f;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd p = best_x;
      const double step = opt.initial_step * (round == 0 ? 1.0 : 0.1);
      p(i) += step;
      pts[static_cast<std::size_t>(i + 1)] = p;
      val[static_cast<std::size_t>(i + 1)] = eval(p);
    }
    std::vector<std::size_t> order(static_cast<std::size_t>(n + 1));
    bool converged = false;
    while (evals < opt.max_evaluations) {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
      const std::size_t lo = order.front(), hi = order.back(), nh = order[order.size() - 2];
      const double spread = val[hi] - val[lo];
      if (spread <= opt.f_tol * std::max(std::abs(val[lo]), opt.f_floor)) {
        converged = true;
        break;
      }
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (i != hi) centroid += pts[i];
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd xr = centroid + (centroid - pts[hi]);
      const double fr = eval(xr);
      if (fr < val[lo]) {
        const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[hi]);
        const double fe = eval(xe);
        if (fe < fr) {
          pts[hi] = xe;
          val[hi] = fe;
        } else {
          pts[hi] = xr;
          val[hi] = fr;
        }
      } else if (fr < val[nh]) {
        pts[hi] = xr;
        val[hi] = fr;
      } else {
        const bool outside = fr < val[hi];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                           : Eigen::VectorXd(centroid + 0.5 * (pts[hi] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : val[hi])) {
          pts[hi] = xc;
          val[hi] = fc;
        } else {
          for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == lo) continue;
            pts[i] = pts[lo] + 0.5 * (pts[i] - pts[lo]);
            val[i] = eval(pts[i]);
          }
        }
      }
    }
    const auto it = std::min_element(val.begin(), val.end());
    const std::size_t ib = static_cast<std::size_t>(it - val.begin());
    if (val[ib] <= best_f) {
      best_f = val[ib];
      best_x = pts[ib];
    }
    res.converged = converged;
    if (evals >= opt.max_evaluations) break;
  }
  res.x = best_x;
  res.value = best_f;
  res.evaluations = evals;
  return res;
}

}  // namespace minout::optim

#endif  // MINOUT_NELDER_MEAD_HPP
