#ifndef MINOUT_ENTROPY_HPP
#define MINOUT_ENTROPY_HPP

// Renyi entropies, minimum output entropy, and violation scans of
//   S_p^min(N1 (x) N2)  <=?  S_p^min(N1) + S_p^min(N2).
//
// The joint side ("red") is S_p of the joint output on the special input,
// an upper bound on S_p^min(N1 (x) N2). The product side ("blue") is the
// numerically minimized sum of single-copy entropies, an upper bound on the
// true sum. A violation at p means red < blue.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minout/certify.hpp"
#include "minout/channels.hpp"
#include "minout/construction.hpp"
#include "minout/nelder_mead.hpp"
#include "minout/qmath.hpp"

namespace minout {

enum class LogBase { bits, nats };

inline double log_in(double x, LogBase base) { return base == LogBase::bits ? std::log2(x) : std::log(x); }

/// Renyi parameter p >= 0 with the limits p = 0 (log rank), p = 1 (von
/// Neumann, used whenever |p - 1| <= 1e-6) and p = inf (min-entropy).
class RenyiOrder {
 public:
  enum class Kind { zero, generic, von_neumann, infinity };

  RenyiOrder(double p) : p_(p) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(p) || p < 0.0) throw DomainError("RenyiOrder: p must be >= 0");
    if (p == 0.0)
      kind_ = Kind::zero;
    else if (std::isinf(p))
      kind_ = Kind::infinity;
    else if (std::abs(p - 1.0) <= 1e-6)
      kind_ = Kind::von_neumann;
    else
      kind_ = Kind::generic;
  }

  static RenyiOrder zero() { return RenyiOrder(0.0); }
  static RenyiOrder one() { return RenyiOrder(1.0); }
  static RenyiOrder infinity() { return RenyiOrder(std::numeric_limits<double>::infinity()); }

  double value() const { return p_; }
  Kind kind() const { return kind_; }

 private:
  double p_;
  Kind kind_;
};

/// S_p of a unit-trace spectrum. For p < 1 eigenvalues <= rank_tol are
/// dropped; for p = 0 the rank counts eigenvalues > rank_tol.
inline double renyi_entropy_spectrum(const RealVector& ev, RenyiOrder order, double rank_tol = tol::rank_relative,
                                     LogBase base = LogBase::bits) {
  switch (order.kind()) {
    case RenyiOrder::Kind::zero: {
      int rank = 0;
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > rank_tol) ++rank;
      return log_in(static_cast<double>(std::max(rank, 1)), base);
    }
    case RenyiOrder::Kind::von_neumann: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > 0.0) s -= ev(i) * log_in(ev(i), base);
      return s;
    }
    case RenyiOrder::Kind::infinity:
      return -log_in(ev.maxCoeff(), base);
    case RenyiOrder::Kind::generic: {
      const double p = order.value();
      const double floor = p < 1.0 ? rank_tol : 0.0;
      double sum = 0.0;
      for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev(i) > floor) sum += std::pow(ev(i), p);
      return log_in(sum, base) / (1.0 - p);
    }
  }
  return 0.0;
}

inline double renyi_entropy(const SpectralState& state, RenyiOrder order, double rank_tol = tol::rank_relative,
                            LogBase base = LogBase::bits) {
  return renyi_entropy_spectrum(state.eigenvalues(), order, rank_tol, base);
}

// ---------------------------------------------------------------------------
// Minimum output entropy

struct MinEntropyOptions {
  int restarts = 100;
  std::uint64_t seed = 0;
  double f_tol = 1e-11;
  int max_evaluations = 20000;
  double rank_tol = tol::rank_relative;
  LogBase base = LogBase::bits;
  /// Extra starting vectors tried before the random restarts.
  std::vector<ComplexVector> warm_starts;
};

struct MinEntropyResult {
  double value = 0.0;
  ComplexVector argmin;                 // unit input vector
  std::vector<ComplexVector> local_minima;  // best few distinct starts, best first
  long evaluations = 0;
};

namespace detail {

inline Eigen::VectorXd pack(const ComplexVector& v) {
  Eigen::VectorXd z(2 * v.size());
  z.head(v.size()) = v.real();
  z.tail(v.size()) = v.imag();
  return z;
}

inline ComplexVector unpack(const Eigen::VectorXd& z) {
  const Eigen::Index n = z.size() / 2;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cplx(z(i), z(n + i));
  return v;
}

/// S_p(N(phi / |phi|)) as a function of the unnormalized phi.
class OutputEntropyObjective {
 public:
  OutputEntropyObjective(const Channel& ch, RenyiOrder order, double rank_tol, LogBase base)
      : ch_(ch), order_(order), rank_tol_(rank_tol), base_(base), solver_(ch.output_dim()) {}

  double operator()(const ComplexVector& phi) {
    const double nrm2 = phi.squaredNorm();
    if (!(nrm2 > 1e-300) || !std::isfinite(nrm2)) return std::numeric_limits<double>::max();
    const ComplexMatrix out = ch_.apply_pure(phi) / nrm2;
    solver_.compute(out, Eigen::EigenvaluesOnly);
    RealVector ev = solver_.eigenvalues().cwiseMax(0.0);
    ev /= ev.sum();
    return renyi_entropy_spectrum(ev, order_, rank_tol_, base_);
  }

  double operator()(const Eigen::VectorXd& z) { return (*this)(unpack(z)); }

 private:
  const Channel& ch_;
  RenyiOrder order_;
  double rank_tol_;
  LogBase base_;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver_;
};

}  // namespace detail

/// Multi-restart Nelder-Mead over unnormalized complex inputs. The value is
/// an upper bound on S_p^min(N), reproducible given (seed, restarts, warm
/// starts).
inline MinEntropyResult min_output_entropy(const Channel& ch, RenyiOrder order, const MinEntropyOptions& opt = {}) {
  if (opt.restarts < 0 || (opt.restarts == 0 && opt.warm_starts.empty()))
    throw DomainError("min_output_entropy: need at least one start");
  detail::OutputEntropyObjective obj(ch, order, opt.rank_tol, opt.base);
  optim::NelderMeadOptions nm;
  nm.f_tol = opt.f_tol;
  nm.max_evaluations = opt.max_evaluations;

  std::vector<std::pair<double, ComplexVector>> found;
  long evals = 0;
  auto run = [&](const ComplexVector& start) {
    const ComplexVector s = start / start.norm();
    nm.initial_step = 0.25;
    auto r = optim::nelder_mead([&](const Eigen::VectorXd& z) { return obj(z); }, detail::pack(s), nm);
    evals += r.evaluations;
    ComplexVector v = detail::unpack(r.x);
    v /= v.norm();
    found.emplace_back(r.value, std::move(v));
  };
  for (const auto& w : opt.warm_starts) {
    if (w.size() != ch.input_dim()) throw DimensionError("min_output_entropy: warm start has wrong dimension");
    run(w);
  }
  for (int r = 0; r < opt.restarts; ++r) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(r)));
    run(random_unit_vector(ch.input_dim(), rng));
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  MinEntropyResult res;
  res.value = found.front().first;
  res.argmin = found.front().second;
  res.evaluations = evals;
  for (std::size_t i = 0; i < found.size() && res.local_minima.size() < 3; ++i) res.local_minima.push_back(found[i].second);
  return res;
}

// ---------------------------------------------------------------------------
// Minimum output rank

struct OutputRankOptions {
  int restarts = 20;
  std::uint64_t seed = 0;
  double rank_tol = tol::rank_relative;
  /// Run the PPT certificate when every candidate has full output rank.
  bool certify = true;
  std::vector<ComplexVector> candidates;
};

struct OutputRankResult {
  int rank = 0;
  ComplexVector witness;
  /// True when the rank is known exactly: full rank backed by a checked SDP
  /// certificate with lambda > 0.
  bool certified = false;
  std::optional<SdpCertificate> certificate;
};

/// Smallest output rank found over (i) see-saw minimizers of lambda_min,
/// (ii) minimizers of S_p at p = 1e-3, (iii) caller candidates.
inline OutputRankResult min_output_rank(const Channel& ch, const OutputRankOptions& opt = {}) {
  std::vector<ComplexVector> cands = opt.candidates;
  {
    // <a (x) b|Omega|a (x) b> = <b|N(conj a)|b>
    const SeesawResult ss = seesaw_separable_min(ch.standard_cj(), ch.shape(), std::max(1, opt.restarts), opt.seed);
    cands.push_back(ss.phi.conjugate());
  }
  {
    MinEntropyOptions mo;
    mo.restarts = std::max(1, opt.restarts / 4);
    mo.seed = derive_seed(opt.seed, 1);
    mo.rank_tol = opt.rank_tol;
    cands.push_back(min_output_entropy(ch, RenyiOrder(1e-3), mo).argmin);
  }
  OutputRankResult res;
  res.rank = std::numeric_limits<int>::max();
  for (const auto& c : cands) {
    if (c.size() != ch.input_dim()) throw DimensionError("min_output_rank: candidate has wrong dimension");
    const ComplexVector u = c / c.norm();
    const int r = rank_eps(ch.apply_pure(u), opt.rank_tol);
    if (r < res.rank) {
      res.rank = r;
      res.witness = u;
    }
  }
  if (res.rank == ch.output_dim() && opt.certify) {
    SdpCertificate cert = ppt_lower_bound(ch.standard_cj(), ch.shape());
    const CertificateCheck chk = check_certificate(ch.standard_cj(), ch.shape(), cert);
    res.certified = chk.passed && certified_floor(cert) > 0.0;
    res.certificate = std::move(cert);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Violation scans

enum class RedVariant { sp, s1 };

inline std::string to_string(RedVariant v) { return v == RedVariant::sp ? "sp" : "s1"; }
inline std::string to_string(CjVariant v) {
  switch (v) {
    case CjVariant::projector:
      return "projector";
    case CjVariant::paper_weights:
      return "paper_weights";
    case CjVariant::custom:
      return "custom";
  }
  return "custom";
}

struct ScanOptions {
  int restarts = 100;
  std::uint64_t seed = 0;
  RedVariant red_variant = RedVariant::sp;
  LogBase base = LogBase::bits;
  double f_tol = 1e-11;
  int max_evaluations = 20000;
  double rank_tol = tol::rank_relative;
  double crossing_tol = 1e-4;
  bool refine_crossing = true;
  std::string cj_variant = "custom";
};

struct ViolationScan {
  std::vector<double> p_grid;
  std::vector<double> red;
  std::vector<double> blue;
  std::vector<int> violated;
  std::optional<double> crossing;
  // metadata
  std::uint64_t seed = 0;
  int restarts = 0;
  std::string cj_variant;
  RedVariant red_variant = RedVariant::sp;
  LogBase base = LogBase::bits;
};

/// `points` uniform values on [start, stop].
inline std::vector<double> linear_grid(double start, double stop, int points) {
  if (points < 1) throw DomainError("linear_grid: points must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = points == 1 ? start : start + (stop - start) * i / (points - 1);
  return g;
}

inline std::vector<double> default_grid() { return linear_grid(0.001, 0.3, 200); }

/// Evaluates (red, blue) at a given p.
/// red < blue by more than rounding noise.
inline constexpr double kViolationMargin = 1e-9;
inline bool is_violation(double red, double blue) { return red < blue - kViolationMargin; }

using CurveEvaluator = std::function<std::pair<double, double>(double)>;

/// First change of the violation flag on the grid, refined by bisection
/// with fresh evaluations until the bracket is <= p_tol. Empty without a
/// change.
inline std::optional<double> crossing_point(const ViolationScan& scan, const CurveEvaluator& evaluate,
                                            double p_tol = 1e-4) {
  const std::size_t n = scan.p_grid.size();
  if (scan.red.size() != n || scan.blue.size() != n) throw DimensionError("crossing_point: curve lengths differ");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const bool v0 = is_violation(scan.red[i], scan.blue[i]);
    const bool v1 = is_violation(scan.red[i + 1], scan.blue[i + 1]);
    if (v0 == v1) continue;
    double lo = scan.p_grid[i], hi = scan.p_grid[i + 1];
    const bool neg_lo = v0;
    while (hi - lo > p_tol) {
      const double mid = 0.5 * (lo + hi);
      const auto [r, b] = evaluate(mid);
      (is_violation(r, b) == neg_lo ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  return std::nullopt;
}

/// Evaluates both curves for a channel pair, remembering minimizers so that
/// later (larger) p are warm-started from earlier ones. Warm starting from the
/// argmin at p' < p keeps the blue curve non-increasing, since S_p of a fixed
/// state does not increase with p.
class ViolationProblem {
 public:
  ViolationProblem(const Channel& n1, const Channel& n2, ScanOptions opt)
      : n1_(n1), n2_(n2), opt_(std::move(opt)) {
    const JointChannel joint = tensor_channels(n1, n2);
    const PureVector x = special_input(n1, n2);
    const ComplexMatrix out = joint.joint.apply_pure(x.amplitudes());
    joint_spectrum_ = hermitian_eigenvalues(0.5 * (out + out.adjoint())).cwiseMax(0.0);
    joint_spectrum_ /= joint_spectrum_.sum();
  }

  const RealVector& joint_spectrum() const { return joint_spectrum_; }
  const ScanOptions& options() const { return opt_; }

  double red(double p) const {
    const RenyiOrder order = opt_.red_variant == RedVariant::sp ? RenyiOrder(p) : RenyiOrder::one();
    return renyi_entropy_spectrum(joint_spectrum_, order, opt_.rank_tol, opt_.base);
  }

  /// min_output_entropy(N1, p) + min_output_entropy(N2, p).
  double blue(double p) {
    double total = 0.0;
    for (int k = 0; k < 2; ++k) {
      const Channel& ch = k == 0 ? n1_ : n2_;
      auto& memory = k == 0 ? memory1_ : memory2_;
      MinEntropyOptions mo;
      mo.restarts = opt_.restarts;
      mo.seed = derive_seed(derive_seed(opt_.seed, static_cast<std::uint64_t>(k)), std::bit_cast<std::uint64_t>(p));
      mo.f_tol = opt_.f_tol;
      mo.max_evaluations = opt_.max_evaluations;
      mo.rank_tol = opt_.rank_tol;
      mo.base = opt_.base;
      // minimizers from the largest remembered p not above this one
      auto it = memory.upper_bound(p);
      if (it != memory.begin()) mo.warm_starts = std::prev(it)->second;
      MinEntropyResult r = min_output_entropy(ch, RenyiOrder(p), mo);
      memory[p] = r.local_minima;
      total += r.value;
    }
    return total;
  }

  std::pair<double, double> evaluate(double p) { return {red(p), blue(p)}; }

  ViolationScan scan(const std::vector<double>& grid) {
    if (grid.empty()) throw DomainError("violation_scan: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (!(grid[i] >= 0.0 && grid[i] < 1.0)) throw DomainError("violation_scan: grid values must lie in [0, 1)");
      if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError("violation_scan: grid must be strictly ascending");
    }
    ViolationScan s;
    s.p_grid = grid;
    s.seed = opt_.seed;
    s.restarts = opt_.restarts;
    s.cj_variant = opt_.cj_variant;
    s.red_variant = opt_.red_variant;
    s.base = opt_.base;
    for (double p : grid) {
      const double r = red(p);
      const double b = blue(p);
      s.red.push_back(r);
      s.blue.push_back(b);
      s.violated.push_back(is_violation(r, b) ? 1 : 0);
    }
    if (opt_.refine_crossing)
      s.crossing = crossing_point(s, [this](double p) { return evaluate(p); }, opt_.crossing_tol);
    return s;
  }

 private:
  const Channel& n1_;
  const Channel& n2_;
  ScanOptions opt_;
  RealVector joint_spectrum_;
  std::map<double, std::vector<ComplexVector>> memory1_, memory2_;
};

inline ViolationScan violation_scan(const Channel& n1, const Channel& n2, const std::vector<double>& grid,
                                    const ScanOptions& opt = {}) {
  ViolationProblem problem(n1, n2, opt);
  return problem.scan(grid);
}

// ---------------------------------------------------------------------------
// Weight optimization

struct WeightOptOptions {
  std::uint64_t seed = 0;
  int budget = 2000;          // crossing evaluations
  int inner_restarts = 4;     // random restarts per blue evaluation inside the search
  int final_restarts = 100;   // restarts for the reported crossing
  double p_lo = 0.001;
  double p_hi = 0.3;
  double p_tol = 1e-4;
  std::vector<double> init_r;  // empty: uniform
  std::vector<double> init_s;
};

struct WeightOptResult {
  std::vector<double> weights_r;
  std::vector<double> weights_s;
  double achieved_crossing = 0.0;  // re-evaluated with final_restarts
  double initial_crossing = 0.0;   // same evaluation at the starting weights
  double search_crossing = 0.0;    // best value seen by the search
  int evaluations = 0;
  std::vector<std::pair<int, double>> trace;  // (evaluation, best search crossing so far)
};

/// Crossing of red and blue on [p_lo, p_hi] by bisection (no grid). Returns
/// p_lo when there is no violation at p_lo and p_hi when the violation
/// persists through p_hi.
inline double bracket_crossing(ViolationProblem& problem, double p_lo, double p_hi, double p_tol) {
  auto violated = [&](double p) {
    const auto [r, b] = problem.evaluate(p);
    return is_violation(r, b);
  };
  if (!violated(p_lo)) return p_lo;
  if (violated(p_hi)) return p_hi;
  double lo = p_lo, hi = p_hi;
  while (hi - lo > p_tol) {
    const double mid = 0.5 * (lo + hi);
    (violated(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {
inline std::vector<double> softmax(const Eigen::VectorXd& z) {
  const double m = z.maxCoeff();
  std::vector<double> w(static_cast<std::size_t>(z.size()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += (w[static_cast<std::size_t>(i)] = std::exp(z(i) - m));
  for (double& x : w) x /= s;
  return w;
}

inline Eigen::VectorXd logits(const std::vector<double>& w) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i) z(static_cast<Eigen::Index>(i)) = std::log(std::max(w[i], 1e-300));
  return z;
}
}  // namespace detail

/// Derivative-free maximization of the crossing over the two weight simplices
/// (softmax-parameterized, Nelder-Mead with a budget on crossing
/// evaluations). The reported crossing is never below the starting point's.
inline WeightOptResult optimize_weights(const Subspace& r, const Subspace& s, const WeightOptOptions& opt = {}) {
  if (opt.budget < 1) throw DomainError("optimize_weights: budget must be >= 1");
  const auto nr = static_cast<std::size_t>(r.dim());
  const auto ns = static_cast<std::size_t>(s.dim());
  const std::vector<double> w0r = opt.init_r.empty() ? uniform_weights(nr) : renormalized(opt.init_r);
  const std::vector<double> w0s = opt.init_s.empty() ? uniform_weights(ns) : renormalized(opt.init_s);
  if (w0r.size() != nr || w0s.size() != ns) throw DimensionError("optimize_weights: initial weights have wrong length");

  Eigen::VectorXd z0(static_cast<Eigen::Index>(nr + ns));
  z0 << detail::logits(w0r), detail::logits(w0s);

  auto split = [&](const Eigen::VectorXd& z) {
    return std::pair{detail::softmax(z.head(static_cast<Eigen::Index>(nr))),
                     detail::softmax(z.tail(static_cast<Eigen::Index>(ns)))};
  };
  auto crossing_for = [&](const std::vector<double>& wr, const std::vector<double>& ws, int restarts,
                          std::uint64_t seed) {
    const ChannelPair pair = channels_from_subspaces(r, s, wr, ws);
    ScanOptions so;
    so.restarts = restarts;
    so.seed = seed;
    so.refine_crossing = false;
    ViolationProblem problem(pair.n1, pair.n2, so);
    return bracket_crossing(problem, opt.p_lo, opt.p_hi, opt.p_tol);
  };

  WeightOptResult res;
  int evals = 0;
  double best = -1.0;
  Eigen::VectorXd best_z = z0;
  auto objective = [&](const Eigen::VectorXd& z) {
    if (evals >= opt.budget) return std::numeric_limits<double>::max();
    const auto [wr, ws] = split(z);
    const double c = crossing_for(wr, ws, opt.inner_restarts, derive_seed(opt.seed, static_cast<std::uint64_t>(evals)));
    ++evals;
    if (c > best) {
      best = c;
      best_z = z;
    }
    res.trace.emplace_back(evals, best);
    return -c;
  };
  optim::NelderMeadOptions nm;
  nm.initial_step = 0.5;
  nm.f_tol = 1e-6;
  nm.max_evaluations = opt.budget;
  nm.rebuilds = 1000;
  optim::nelder_mead(objective, z0, nm);

  const auto [wr, ws] = split(best_z);
  res.search_crossing = best;
  res.evaluations = evals;
  const std::uint64_t final_seed = derive_seed(opt.seed, 0xF1A1ULL);
  res.initial_crossing = crossing_for(w0r, w0s, opt.final_restarts, final_seed);
  const double final_crossing = crossing_for(wr, ws, opt.final_restarts, final_seed);
  if (final_crossing >= res.initial_crossing) {
    res.weights_r = wr;
    res.weights_s = ws;
    res.achieved_crossing = final_crossing;
  } else {
    res.weights_r = w0r;
    res.weights_s = w0s;
    res.achieved_crossing = res.initial_crossing;
  }
  return res;
}

}  // namespace minout

#endif  // MINOUT_ENTROPY_HPP
