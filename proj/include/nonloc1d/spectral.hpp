#ifndef NONLOC1D_SPECTRAL_HPP
#define NONLOC1D_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nonloc1d/linalg.hpp"
#include "nonloc1d/operator.hpp"
#include "nonloc1d/potential.hpp"
#include "nonloc1d/solvers.hpp"

namespace nonloc1d {

// Thresholds used by the theorem-level certificates. Everything is pinned
// here; certificates never invent tolerances at call time.
struct CertificateTolerances {
  double lambda1_tol = 5e-3;      // near-kernel tolerance at (X,h) = (40,0.01)
  double cosine_min = 0.999;      // alignment of the bottom mode
  double gap_multiplier = 10.0;   // lambda2 >= mult*|lambda1| + floor
  double gap_floor = 1e-2;
  double quotient_osc_cap = 0.1;  // largest oscillation certifiable as const
  double quotient_coupling = 3.0; // premise-to-quotient amplification factor
  double bound_slack = 0.1;       // epsilon in |sigma| <= C (1 + eps)
  double hyp_slack = 1e-3;        // sign-hypothesis slack (scaled)
  double value_slack = 1e-9;      // sign-conclusion slack (relative)
  int eig_count = 6;
  double eig_tol = 1e-8;
  int lanczos_max_steps = 600;
};

struct CertificateReport {
  std::string theorem;
  std::string verdict;  // PASS | FAIL | HYPOTHESES-NOT-MET
  Vec eigs;
  double cosine = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double C_bound = std::numeric_limits<double>::quiet_NaN();
  double oscillation = std::numeric_limits<double>::quiet_NaN();
  json assumptions = json::object();
  json grid = json::object();
  json details = json::object();

  bool pass() const { return verdict == "PASS"; }

  json to_json() const {
    auto num = [](double v) { return std::isfinite(v) ? json(v) : json(); };
    return json{{"theorem", theorem},   {"verdict", verdict},
                {"eigs", eigs},         {"cosine", num(cosine)},
                {"gap", num(gap)},      {"C_bound", num(C_bound)},
                {"oscillation", num(oscillation)},
                {"assumptions", assumptions},
                {"grid", grid},         {"details", details}};
  }
};

inline json grid_record(const Grid1D& g, const OperatorScheme& scheme) {
  return json{{"X", g.X}, {"h", g.h}, {"delta", scheme.resolved_delta(g.h)}};
}

// Discrete linearized operator L - c with the zero-tail convention for
// eigenfunctions. The odd variant acts on nodes x > 0 through the odd
// reflection, which is exactly the antisymmetrized-weight assembly.
class LinearizedOperator {
 public:
  LinearizedOperator(const Kernel& kernel, const PotentialSpec& c,
                     const Grid1D& grid, const OperatorScheme& scheme = {},
                     bool odd = false)
      : disc_(kernel, grid, scheme), grid_(grid), odd_(odd) {
    if (!c.grid().same_as(grid))
      throw std::invalid_argument("LinearizedOperator: potential grid mismatch");
    if (odd_) {
      if (!kernel.monotone())
        throw std::invalid_argument(
            "LinearizedOperator: odd restriction needs a nonincreasing kernel");
      if (!c.even)
        throw std::invalid_argument(
            "LinearizedOperator: odd restriction needs an even potential");
    }
    c_ = c.values.values;
  }

  std::size_t size() const {
    return odd_ ? static_cast<std::size_t>(grid_.M)
                : static_cast<std::size_t>(grid_.size());
  }

  void apply(const Vec& v, Vec& out) const {
    if (!odd_) {
      out = disc_.apply_symmetric(v);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c_[i] * v[i];
      return;
    }
    const int M = grid_.M;
    Vec full(static_cast<std::size_t>(grid_.size()), 0.0);
    for (int k = 1; k <= M; ++k) {
      full[static_cast<std::size_t>(grid_.center() + k)] = v[static_cast<std::size_t>(k - 1)];
      full[static_cast<std::size_t>(grid_.center() - k)] = -v[static_cast<std::size_t>(k - 1)];
    }
    const Vec img = disc_.apply_symmetric(full);
    out.resize(static_cast<std::size_t>(M));
    for (int k = 1; k <= M; ++k) {
      const std::size_t gi = static_cast<std::size_t>(grid_.center() + k);
      out[static_cast<std::size_t>(k - 1)] = img[gi] - c_[gi] * v[static_cast<std::size_t>(k - 1)];
    }
  }

  LinOp op() const {
    return [this](const Vec& v, Vec& out) { apply(v, out); };
  }

  // Explicit assembly from the weight tables; intended for modest sizes.
  DenseSym dense() const {
    const int M = grid_.M;
    const double nu = disc_.near_moment() / (grid_.h * grid_.h);
    const Vec& W = disc_.cell_weights();
    if (!odd_) {
      const int n = grid_.size();
      DenseSym A(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        A.at(si, si) = 2.0 * nu + disc_.row_sums()[si] +
                       disc_.tail_mass_right()[si] +
                       disc_.tail_mass_left()[si] - c_[si];
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          const std::size_t sj = static_cast<std::size_t>(j);
          double v = -W[static_cast<std::size_t>(std::abs(i - j))];
          if (std::abs(i - j) == 1) v -= nu;
          A.at(si, sj) += v;
        }
      }
      return A;
    }
    DenseSym A(static_cast<std::size_t>(M));
    for (int i = 1; i <= M; ++i) {
      const std::size_t gi = static_cast<std::size_t>(grid_.center() + i);
      const std::size_t si = static_cast<std::size_t>(i - 1);
      A.at(si, si) = 2.0 * nu + disc_.row_sums()[gi] +
                     disc_.tail_mass_right()[gi] + disc_.tail_mass_left()[gi] -
                     c_[gi] + W[static_cast<std::size_t>(2 * i)];
      for (int j = 1; j <= M; ++j) {
        if (i == j) continue;
        const std::size_t sj = static_cast<std::size_t>(j - 1);
        double v = -W[static_cast<std::size_t>(std::abs(i - j))] +
                   W[static_cast<std::size_t>(i + j)];
        if (std::abs(i - j) == 1) v -= nu;
        A.at(si, sj) += v;
      }
    }
    return A;
  }

  const Grid1D& grid() const { return grid_; }
  bool odd() const { return odd_; }
  const Discretization& discretization() const { return disc_; }

 private:
  Discretization disc_;
  Grid1D grid_;
  bool odd_;
  Vec c_;
};

inline LinearizedOperator assemble_linearized(const Kernel& kernel,
                                              const PotentialSpec& c,
                                              const Grid1D& grid,
                                              const OperatorScheme& scheme = {},
                                              bool odd = false) {
  return LinearizedOperator(kernel, c, grid, scheme, odd);
}

// Bottom eigenpairs via Lanczos with full reorthogonalization; the operator
// application is FFT-backed, so this covers every grid size used here.
inline EigenPairs bottom_spectrum(const LinearizedOperator& A, int k,
                                  const CertificateTolerances& tol = {}) {
  const int n = static_cast<int>(A.size());
  const int steps = std::min(n, tol.lanczos_max_steps);
  return lanczos_smallest(A.op(), A.size(), std::min(k, n), tol.eig_tol, steps);
}

inline double alignment_cosine(const Vec& a, const Vec& b) {
  const double na = norm2(a), nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::abs(dot(a, b)) / (na * nb);
}

// Potential c = f'(u) on the grid of a solver output.
inline PotentialSpec linearization_potential(const GridFunction& u,
                                             const NonlinearitySpec& f) {
  GridFunction c(u.grid, TailModel::zero());
  for (int i = 0; i < u.grid.size(); ++i) c[i] = f.fprime(u[i]);
  const int n = u.grid.size();
  bool even = true;
  const double scale = c.sup_norm() + 1e-300;
  for (int i = 0; i < n && even; ++i)
    if (std::abs(c[i] - c[n - 1 - i]) > 1e-8 * scale) even = false;
  if (even)
    for (int i = 0; i < n / 2; ++i) {
      const double avg = 0.5 * (c[i] + c[n - 1 - i]);
      c[i] = avg;
      c[n - 1 - i] = avg;
    }
  c.sym = even ? Symmetry::even : Symmetry::none;
  const auto rec = auto_negativity(c);
  return make_potential(std::move(c), even, rec, f.holder_gamma);
}

// Nondegeneracy of a converged profile: the bottom of the spectrum of
// L - f'(u) must be a simple near-zero eigenvalue carried by u', with a
// clean gap above it. The odd flag restricts to the odd subspace (the
// certificate for even decaying profiles).
inline CertificateReport nondegeneracy_certificate(
    const SolveResult& solution, const Kernel& kernel,
    const NonlinearitySpec& f, bool odd = false,
    const OperatorScheme& scheme = {}, const CertificateTolerances& tol = {}) {
  const GridFunction& u = solution.u;
  const Grid1D& g = u.grid;

  CertificateReport rep;
  rep.theorem = odd ? "odd-nondegeneracy" : "layer-nondegeneracy";
  rep.grid = grid_record(g, scheme);
  rep.assumptions = json{{"holder_gamma_declared", f.holder_gamma},
                         {"order_lower", kernel.order_lower()},
                         {"order_upper", kernel.order_upper()}};
  rep.details["solver_residual"] = solution.report.residual;

  if (!solution.report.converged || solution.report.has_flag("TRIVIAL-LIMIT")) {
    rep.verdict = "HYPOTHESES-NOT-MET";
    rep.details["reason"] = "solution not a converged nontrivial profile";
    return rep;
  }

  const PotentialSpec c = linearization_potential(u, f);
  if (odd && !c.even) {
    rep.verdict = "HYPOTHESES-NOT-MET";
    rep.details["reason"] = "odd restriction needs an even potential";
    return rep;
  }

  const GridFunction uprime = derivative(u, 1.0 + 2.0 * kernel.order_lower());
  const LinearizedOperator A(kernel, c, g, scheme, odd);
  const EigenPairs pairs = bottom_spectrum(A, tol.eig_count, tol);
  rep.eigs = pairs.values;
  rep.details["eigensolver_converged"] = pairs.converged;
  rep.details["lanczos_steps"] = pairs.lanczos_steps;

  if (pairs.values.size() < 2) {
    rep.verdict = "HYPOTHESES-NOT-MET";
    rep.details["reason"] = "eigensolver breakdown";
    return rep;
  }

  Vec ref;
  if (odd) {
    ref.resize(static_cast<std::size_t>(g.M));
    for (int k = 1; k <= g.M; ++k)
      ref[static_cast<std::size_t>(k - 1)] = uprime[g.center() + k];
  } else {
    ref = uprime.values;
  }
  rep.cosine = alignment_cosine(pairs.vectors[0], ref);
  const double l1 = pairs.values[0];
  const double l2 = pairs.values[1];
  rep.gap = l2;
  rep.details["lambda1"] = l1;

  const bool ok = std::abs(l1) <= tol.lambda1_tol && rep.cosine >= tol.cosine_min &&
                  l2 >= tol.gap_multiplier * std::abs(l1) + tol.gap_floor;
  rep.verdict = ok ? "PASS" : "FAIL";
  return rep;
}

namespace specdetail {

// Quotient wt/w with the odd-origin value filled by one-sided quadratic
// extrapolation; callers guarantee w != 0 away from the odd origin.
inline Vec quotient_values(const GridFunction& w, const GridFunction& wt,
                           bool odd) {
  const Grid1D& g = w.grid;
  Vec sigma(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    if (odd && i == g.center()) continue;
    sigma[static_cast<std::size_t>(i)] = wt[i] / w[i];
  }
  if (odd) {
    const int m = g.center();
    sigma[static_cast<std::size_t>(m)] =
        3.0 * sigma[static_cast<std::size_t>(m + 1)] -
        3.0 * sigma[static_cast<std::size_t>(m + 2)] +
        sigma[static_cast<std::size_t>(m + 3)];
  }
  return sigma;
}

}  // namespace specdetail

// Boundedness and constancy of the quotient wt/w of two near-solutions of
// the linear problem. The tolerance couples to the measured residuals of
// both inputs and to the exterior mass their tail models carry, all scaled
// pointwise by the local potential strength and |w|.
inline CertificateReport quotient_certificate(
    const GridFunction& w, const GridFunction& wt, const Kernel& kernel,
    const PotentialSpec& c, bool odd = false, const OperatorScheme& scheme = {},
    const CertificateTolerances& tol = {}) {
  const Grid1D& g = w.grid;
  CertificateReport rep;
  rep.theorem = odd ? "odd-quotient-uniqueness" : "quotient-uniqueness";
  rep.grid = grid_record(g, scheme);
  rep.assumptions = json{{"beta0_declared", c.beta0}};

  if (!wt.grid.same_as(g) || !c.grid().same_as(g))
    throw std::invalid_argument("quotient_certificate: grid mismatch");
  if (!c.negativity) {
    rep.verdict = "HYPOTHESES-NOT-MET";
    rep.details["reason"] = "potential has no negativity record";
    return rep;
  }
  const double R0 = c.negativity->R0;
  const double c0 = c.negativity->c0;
  const double r0 = odd ? (c.r0 > 0.0 ? c.r0 : g.h) : 0.0;

  // Positivity of the reference solution where required.
  const int first = odd ? g.center() + 1 : 0;
  for (int i = first; i < g.size(); ++i) {
    if (!(w[i] > 0.0)) {
      rep.verdict = "HYPOTHESES-NOT-MET";
      rep.details["reason"] = "w is not positive on the required range";
      return rep;
    }
  }

  const Vec sigma = specdetail::quotient_values(w, wt, odd);
  const GridFunction rw = residual(kernel, c.values, w, scheme);
  const GridFunction rwt = residual(kernel, c.values, wt, scheme);

  // Bound from the inner interval (Prop-style boundedness).
  double C = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    const double ax = std::abs(x);
    const bool inner = odd ? (x >= r0 && x <= R0) : (ax <= R0);
    if (inner) C = std::max(C, std::abs(sigma[static_cast<std::size_t>(i)]));
  }
  rep.C_bound = C;
  bool bounded_ok = true;
  double worst_excess = 0.0;
  for (int i = first; i < g.size(); ++i) {
    const double s = std::abs(sigma[static_cast<std::size_t>(i)]);
    if (s > C * (1.0 + tol.bound_slack)) {
      bounded_ok = false;
      worst_excess = std::max(worst_excess, s - C);
    }
  }
  rep.details["bound_excess"] = worst_excess;

  // Oscillation over the inner 90% of nodes.
  const double inner_lim = 0.9 * g.X;
  double smin = kInf, smax = -kInf;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    const bool in = odd ? (x > 0.0 && x <= inner_lim) : (std::abs(x) <= inner_lim);
    if (!in) continue;
    smin = std::min(smin, sigma[static_cast<std::size_t>(i)]);
    smax = std::max(smax, sigma[static_cast<std::size_t>(i)]);
  }
  rep.oscillation = smax - smin;
  const double sigma_mid = 0.5 * (smax + smin);

  // Premise-to-quotient coupling, measured pointwise on the inner region:
  // residuals of both inputs plus the mismatch between their exterior tail
  // conventions (a zero-tail eigenvector next to a tail-carrying reference
  // solves a slightly different truncation; that gap is charged here).
  const Discretization disc(kernel, g, scheme);
  const Vec ext_w = disc.exterior_tail_field(w.tail);
  const Vec ext_wt = disc.exterior_tail_field(wt.tail);
  double ratio = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    const bool in = odd ? (x >= r0 && x <= inner_lim) : (std::abs(x) <= inner_lim);
    if (!in) continue;
    const double cbar = std::max(c0, std::abs(c[i]));
    const double denom = cbar * std::abs(w[i]);
    const std::size_t si = static_cast<std::size_t>(i);
    const double mismatch = std::abs(ext_wt[si] - sigma_mid * ext_w[si]);
    const double numer =
        std::abs(rwt[i]) + std::abs(sigma_mid) * std::abs(rw[i]) + mismatch;
    ratio = std::max(ratio, numer / denom);
  }
  const double premise_tol = tol.quotient_coupling * ratio + 1e-6;
  const double osc_tol = std::min(tol.quotient_osc_cap, premise_tol);
  const bool premise_ok = premise_tol <= tol.quotient_osc_cap;
  rep.details["premise_ratio"] = ratio;
  rep.details["oscillation_tolerance"] = osc_tol;
  rep.details["premise_ok"] = premise_ok;
  rep.details["bounded_ok"] = bounded_ok;

  if (rep.oscillation > osc_tol || !bounded_ok)
    rep.verdict = "FAIL";
  else
    rep.verdict = premise_ok ? "PASS" : "HYPOTHESES-NOT-MET";
  return rep;
}

// Sign propagation from an interval to the whole line: nonnegativity of a
// supersolution of L - c outside [-R0, R0] given nonnegativity inside. The
// odd variant works on (0, r0) u (R0, inf) against [r0, R0] and gates on the
// small-domain condition |c|_inf < lambda / (s r0^{2s}); it also reports the
// shifted potential c - 2 * int_x^inf K.
inline CertificateReport max_principle_check(const Kernel& kernel,
                                             const PotentialSpec& c,
                                             const GridFunction& phi,
                                             bool odd = false,
                                             const OperatorScheme& scheme = {},
                                             const CertificateTolerances& tol = {}) {
  const Grid1D& g = phi.grid;
  CertificateReport rep;
  rep.theorem = odd ? "odd-exterior-max-principle" : "exterior-max-principle";
  rep.grid = grid_record(g, scheme);
  rep.assumptions = json{{"beta0_declared", c.beta0}};

  if (!c.grid().same_as(g))
    throw std::invalid_argument("max_principle_check: grid mismatch");
  if (!c.negativity) {
    rep.verdict = "HYPOTHESES-NOT-MET";
    rep.details["reason"] = "potential has no negativity record";
    return rep;
  }
  const double R0 = c.negativity->R0;

  double r0 = 0.0;
  if (odd) {
    if (phi.sym != Symmetry::odd) {
      rep.verdict = "HYPOTHESES-NOT-MET";
      rep.details["reason"] = "odd check needs odd data";
      return rep;
    }
    if (!c.even || !kernel.monotone() || !(c.r0 > 0.0) || c.r0 >= R0) {
      rep.verdict = "HYPOTHESES-NOT-MET";
      rep.details["reason"] = "odd check needs even c, monotone kernel, 0 < r0 < R0";
      return rep;
    }
    r0 = c.r0;
    if (!kernel.two_sided_record()) {
      rep.verdict = "HYPOTHESES-NOT-MET";
      rep.details["reason"] = "small-domain gate needs a two-sided kernel record";
      return rep;
    }
    const double lambda = kernel.two_sided_record()->lambda;
    const double s = kernel.two_sided_record()->s;
    const double gate = lambda / (s * std::pow(r0, 2.0 * s));
    rep.details["small_domain_bound"] = gate;
    rep.details["c_sup"] = c.sup_norm();
    const bool gate_ok = c.sup_norm() < gate;
    rep.details["small_domain_gate"] = gate_ok;
    if (!gate_ok) {
      rep.verdict = "HYPOTHESES-NOT-MET";
      rep.details["reason"] = "small-domain condition rejected r0";
      return rep;
    }
    // Shifted potential on the half line; it must stay uniformly negative on
    // the hypothesis region.
    double ctilde_max = -kInf;
    for (int i = g.center() + 1; i < g.size(); ++i) {
      const double x = g.node(i);
      if ((x > 0.0 && x < r0) || x > R0) {
        const double ct = c[i] - 2.0 * tail_mass(kernel, x);
        ctilde_max = std::max(ctilde_max, ct);
      }
    }
    rep.details["ctilde_negativity"] = -ctilde_max;
    if (!(ctilde_max < 0.0)) {
      rep.verdict = "HYPOTHESES-NOT-MET";
      rep.details["reason"] = "shifted potential not negative on the region";
      return rep;
    }
  }

  const GridFunction r = residual(kernel, c.values, phi, scheme);
  const double hyp_eps =
      tol.hyp_slack * (1.0 + c.sup_norm() * phi.sup_norm());
  const double val_eps = tol.value_slack * (phi.sup_norm() + 1e-300);

  double worst_residual = 0.0;   // violation of L phi - c phi >= 0 outside
  double worst_inner = 0.0;      // violation of phi >= 0 inside
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    if (odd && x <= 0.0) continue;
    const bool hyp_region = odd ? ((x > 0.0 && x < r0) || x > R0)
                                : (std::abs(x) > R0);
    const bool sign_region = odd ? (x >= r0 && x <= R0) : (std::abs(x) <= R0);
    if (hyp_region) worst_residual = std::max(worst_residual, -r[i]);
    if (sign_region) worst_inner = std::max(worst_inner, -phi[i]);
  }
  rep.details["hypothesis_residual_violation"] = worst_residual;
  rep.details["hypothesis_sign_violation"] = worst_inner;
  rep.details["hypothesis_slack"] = hyp_eps;

  if (worst_residual > hyp_eps || worst_inner > val_eps) {
    rep.verdict = "HYPOTHESES-NOT-MET";
    return rep;
  }

  double min_phi = kInf;
  for (int i = 0; i < g.size(); ++i) {
    const double x = g.node(i);
    if (odd && x < 0.0) continue;
    min_phi = std::min(min_phi, phi[i]);
  }
  rep.details["min_value"] = min_phi;
  rep.verdict = (min_phi >= -val_eps) ? "PASS" : "FAIL";
  return rep;
}

}  // namespace nonloc1d

#endif  // NONLOC1D_SPECTRAL_HPP
