// Acceptance checks. Usage: acceptance [criterion ...]; with no argument all
// criteria run. Prints one PASS/FAIL line per criterion and exits nonzero if
// any failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "minout/certify.hpp"
#include "minout/construction.hpp"
#include "minout/entropy.hpp"

using namespace minout;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

const BipartiteShape k43(4, 3);

ComplexMatrix random_density(Eigen::Index n, Rng& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return 0.5 * (m + m.adjoint());
}

double cross_trace(const ChannelPair& p) {
  return std::abs((p.n1.cj().matrix() * p.n2.cj().matrix().transpose()).trace());
}

// ---------------------------------------------------------------------------

void structural(Outcome& o) {
  const Subspace r = subspace_R(), s = subspace_S();
  ComplexMatrix all(12, 12);
  all << r.basis(), s.basis();
  const ComplexMatrix g = all.adjoint() * all - ComplexMatrix::Identity(12, 12);
  const double ortho = g.cwiseAbs().maxCoeff();
  const double tr = cross_trace(explicit_pair(CjVariant::projector));
  o.detail << "max|<v_i|v_j>|=" << ortho << " dims=" << r.dim() << "," << s.dim() << " tr(rho sigma^T)=" << tr << ' ';
  o.require(ortho <= 1e-12, "orthogonality");
  o.require(r.dim() == 6 && s.dim() == 6, "dimensions");
  o.require(tr <= 1e-14, "cross trace");
}

void rank_claims(Outcome& o) {
  const ChannelPair pair = explicit_pair(CjVariant::projector);
  for (const Channel* ch : {&pair.n1, &pair.n2}) {
    const OutputRankResult rr = min_output_rank(*ch);
    const bool cert_ok = rr.certificate && rr.certificate->lambda > 0.0 && rr.certificate->residual <= 1e-8 &&
                         check_certificate(ch->standard_cj(), ch->shape(), *rr.certificate).passed;
    o.detail << "rank=" << rr.rank << " lambda=" << (rr.certificate ? rr.certificate->lambda : 0.0) << ' ';
    o.require(rr.rank == 3 && rr.certified && cert_ok, "single-channel rank 3 certified");
  }
  const ComplexMatrix out =
      tensor_channels(pair.n1, pair.n2).joint.apply_pure(special_input(pair.n1, pair.n2).amplitudes());
  const RealVector ev = hermitian_eigenvalues(out);
  const ComplexVector phi = maximally_entangled(3);
  const double overlap = std::abs((phi.adjoint() * out * phi)(0, 0));
  const int rank = rank_eps(out);
  o.detail << "joint_rank=" << rank << " smallest=" << ev(0) << " phi_overlap=" << overlap << ' ';
  o.require(rank == 8 && std::abs(ev(0)) <= 1e-10 && overlap <= 1e-12, "joint rank 8");
}

double default_crossing(CjVariant v, RedVariant red, Outcome& o) {
  const ChannelPair pair = explicit_pair(v);
  ScanOptions so;
  so.red_variant = red;
  const ViolationScan s = violation_scan(pair.n1, pair.n2, default_grid(), so);
  o.require(s.crossing.has_value(), "crossing exists (" + to_string(v) + ")");
  return s.crossing.value_or(0.0);
}

void crossings(Outcome& o, RedVariant red, double tol) {
  const double cp = default_crossing(CjVariant::projector, red, o);
  const double cw = default_crossing(CjVariant::paper_weights, red, o);
  o.detail << "red=" << to_string(red) << " projector=" << cp << " (0.096+-" << tol << ") paper_weights=" << cw
           << " (0.112+-" << tol << ") ";
  o.require(std::abs(cp - 0.096) <= tol, "projector crossing");
  o.require(std::abs(cw - 0.112) <= tol, "weighted crossing");
  o.require(cw > cp, "weighted crossing above projector crossing");
}

void thresholds(Outcome& o) {
  const double conc = concentration_threshold(3);
  const double conc_exact = 1.0 / (1.0 + 18.0 * std::log(2.0));
  const double t = std::log2(9.0 / 8.0);
  const auto half = certified_violation_threshold(1.0 / 6.0, 1.0 / 6.0, 3, 8, EigBoundForm::uniform_floor);
  o.detail << "concentration(3)=" << conc << " closed_form=" << (half ? half->p_star : -1.0) << " vs " << t / (2 + t)
           << ' ';
  o.require(std::abs(conc - conc_exact) <= 1e-12, "concentration threshold");
  o.require(half && std::abs(half->p_star - t / (2 + t)) <= 1e-6, "closed-form threshold");

  const ChannelPair pair = explicit_pair(CjVariant::projector);
  std::vector<double> floors;
  for (const Channel* ch : {&pair.n1, &pair.n2}) {
    const SdpCertificate c = ppt_lower_bound(ch->standard_cj(), ch->shape());
    o.require(check_certificate(ch->standard_cj(), ch->shape(), c).passed, "certificate re-check");
    floors.push_back(certified_floor(c));
  }
  const int joint_rank = rank_eps(
      tensor_channels(pair.n1, pair.n2).joint.apply_pure(special_input(pair.n1, pair.n2).amplitudes()));
  const auto p = certified_violation_threshold(floors[0], floors[1], 3, joint_rank);
  o.detail << "certified p*=" << (p ? p->p_star : -1.0) << ' ';
  o.require(p && p->p_star >= 1e-3 && p->p_star <= 1e-1, "certified p* in [1e-3, 1e-1]");
}

void lemma1(Outcome& o) {
  const std::uint64_t base = 0;
  for (int d_e : {6, 7}) {
    int detected = 0, verified = 0;
    for (int i = 0; i < 50; ++i) {
      const std::uint64_t seed = derive_seed(derive_seed(base, static_cast<std::uint64_t>(d_e)), static_cast<std::uint64_t>(i));
      const Subspace sub = haar_random_subspace(k43, d_e, seed);
      ProductSearchOptions po;
      po.seed = derive_seed(seed, 1);
      const ProductDecision d = contains_product_vector(sub, 1e-6, po);
      detected += d.contains ? 1 : 0;
      verified += d.contains && d.max_minor <= 1e-8 ? 1 : 0;
    }
    o.detail << "dE=" << d_e << ": detected=" << detected << " verified=" << verified << "/50 ";
    if (d_e == 6)
      o.require(detected == 0, "no product vectors at dE=6");
    else
      o.require(verified >= 48, "verified product vectors at dE=7");
  }
}

void random_pairs(Outcome& o) {
  int trace_ok = 0, zero_ok = 0, certified = 0;
  for (int i = 0; i < 50; ++i) {
    const RandomPair rp = random_orthogonal_pair(k43, derive_seed(0, static_cast<std::uint64_t>(i)));
    const ChannelPair pair = channels_of(rp);
    trace_ok += std::abs((rp.rho.matrix() * rp.sigma.matrix().transpose()).trace()) <= 1e-14 ? 1 : 0;
    const ComplexMatrix out =
        tensor_channels(pair.n1, pair.n2).joint.apply_pure(special_input(pair.n1, pair.n2).amplitudes());
    zero_ok += std::abs(hermitian_eigenvalues(out)(0)) <= 1e-10 ? 1 : 0;
    bool both = true;
    for (const Channel* ch : {&pair.n1, &pair.n2}) {
      try {
        const SdpCertificate c = ppt_lower_bound(ch->standard_cj(), ch->shape());
        both = both && check_certificate(ch->standard_cj(), ch->shape(), c).passed && certified_floor(c) > 0.0;
      } catch (const NumericalError&) {
        both = false;
      }
    }
    certified += both ? 1 : 0;
  }
  o.detail << "cross_trace_ok=" << trace_ok << " joint_zero_ok=" << zero_ok << " certified=" << certified << "/50 ";
  o.require(trace_ok == 50, "cross trace");
  o.require(zero_ok == 50, "joint zero eigenvalue");
  o.require(certified >= 45, "certified fraction >= 0.9");
}

void properties(Outcome& o) {
  constexpr int kInstances = 100;
  Rng rng(20240601);
  int bad = 0;

  // S_p non-increasing in p
  for (int i = 0; i < kInstances; ++i) {
    const RealVector ev = hermitian_eigenvalues(random_density(2 + i % 8, rng));
    double prev = renyi_entropy_spectrum(ev, 0.0);
    for (int k = 1; k <= 40; ++k) {
      const double s = renyi_entropy_spectrum(ev, 0.05 * k);
      bad += s > prev + 1e-10 ? 1 : 0;
      prev = s;
    }
  }
  o.detail << "monotone_bad=" << bad << ' ';
  o.require(bad == 0, "monotonicity in p");

  // additivity on products; eigenvalues at or below the 1e-9 truncation floor
  // are dropped for p < 1, so factors are mixed with 1/d to keep products above it
  auto mixed = [&](Eigen::Index d) {
    return ComplexMatrix(0.9 * random_density(d, rng) + 0.1 * ComplexMatrix::Identity(d, d) / static_cast<double>(d));
  };
  double add_err = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const ComplexMatrix a = mixed(2 + i % 3), b = mixed(2 + i % 4);
    const double p = 0.02 + 0.03 * (i % 40);
    add_err = std::max(add_err, std::abs(renyi_entropy(SpectralState(tensor(a, b)), p) -
                                         renyi_entropy(SpectralState(a), p) - renyi_entropy(SpectralState(b), p)));
  }
  o.detail << "additivity_err=" << add_err << ' ';
  o.require(add_err <= 1e-9, "additivity on products");

  // channel TP/PSD and generalized-vs-standard application
  double tp_err = 0.0, psd_min = 0.0, route_err = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const BipartiteShape sh(2 + i % 3, 2 + (i / 3) % 3);
    const Channel ch(SpectralState(random_density(sh.total(), rng)), sh);
    const ComplexMatrix phi = random_density(sh.d_a(), rng);
    const ComplexMatrix out = ch.apply_matrix(phi);
    tp_err = std::max(tp_err, std::abs(out.trace().real() - 1.0));
    psd_min = std::min(psd_min, hermitian_eigenvalues(out)(0));
    route_err = std::max(route_err, (out - ch.apply_standard(phi)).cwiseAbs().maxCoeff());
  }
  o.detail << "tp_err=" << tp_err << " psd_min=" << psd_min << " route_err=" << route_err << ' ';
  o.require(tp_err <= 1e-10 && psd_min >= -1e-12, "trace preservation and positivity");
  o.require(route_err <= 1e-10, "generalized vs standard CJ");

  // SDP sandwich and independent dual re-check
  int sandwich_bad = 0, recheck_bad = 0;
  for (int i = 0; i < kInstances; ++i) {
    const ComplexMatrix om = random_density(12, rng) * 12.0;
    try {
      const SdpCertificate c = ppt_lower_bound(om, k43);
      const double upper = seesaw_separable_min(om, k43, 5, static_cast<std::uint64_t>(i)).value;
      sandwich_bad += (c.lambda <= upper + 1e-8 && c.lambda >= hermitian_eigenvalues(om)(0) - 1e-9) ? 0 : 1;
      recheck_bad += check_certificate(om, k43, c.lambda, c.x, c.y).passed ? 0 : 1;
    } catch (const NumericalError&) {
      ++recheck_bad;
    }
  }
  o.detail << "sandwich_bad=" << sandwich_bad << " recheck_bad=" << recheck_bad << ' ';
  o.require(sandwich_bad == 0, "SDP sandwich");
  o.require(recheck_bad == 0, "dual re-verification");

  // crossing points do not depend on the log base
  double base_diff = 0.0;
  int compared = 0;
  std::uniform_real_distribution<double> unif(0.2, 1.0);
  for (int i = 0; i < kInstances; ++i) {
    std::vector<double> wr(6), ws(6);
    for (auto& w : wr) w = unif(rng);
    for (auto& w : ws) w = unif(rng);
    const ChannelPair pair = channels_from_subspaces(subspace_R(), subspace_S(), renormalized(wr), renormalized(ws));
    ScanOptions bits;
    bits.restarts = 2;
    bits.seed = static_cast<std::uint64_t>(i);
    ScanOptions nats = bits;
    nats.base = LogBase::nats;
    const auto grid = linear_grid(0.02, 0.3, 4);
    const ViolationScan sb = violation_scan(pair.n1, pair.n2, grid, bits);
    const ViolationScan sn = violation_scan(pair.n1, pair.n2, grid, nats);
    if (sb.crossing.has_value() != sn.crossing.has_value()) {
      base_diff = 1.0;
      continue;
    }
    if (sb.crossing) {
      base_diff = std::max(base_diff, std::abs(*sb.crossing - *sn.crossing));
      ++compared;
    }
  }
  o.detail << "base_crossing_diff=" << base_diff << " over " << compared << " crossings ";
  o.require(base_diff <= 1e-6, "log-base invariance of crossings");
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"1", structural},
      {"2", rank_claims},
      {"3", [](Outcome& o) { crossings(o, RedVariant::sp, 0.02); }},
      {"3s1", [](Outcome& o) { crossings(o, RedVariant::s1, 0.01); }},
      {"4", thresholds},
      {"5", lemma1},
      {"6", random_pairs},
      {"7", properties},
  };
  const std::map<std::string, double> time_limit{{"1", 1.0}, {"2", 30.0}, {"3", 600.0}, {"3s1", 600.0}, {"5", 300.0}};

  std::vector<std::string> selected(argv + 1, argv + argc);
  if (selected.empty())
    for (const auto& [name, fn] : criteria) selected.push_back(name);

  int failures = 0;
  for (const std::string& name : selected) {
    auto it = std::find_if(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == name; });
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", name.c_str());
      return 2;
    }
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      it->second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (auto lim = time_limit.find(name); lim != time_limit.end())
      o.require(dt < lim->second, "runtime limit " + std::to_string(lim->second) + " s");
    std::printf("%s criterion %s: %s(%.2f s)\n", o.passed ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(), dt);
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
