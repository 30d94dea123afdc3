#include <doctest.h>

#include <cmath>
#include <random>

#include "nonloc1d/forms.hpp"
#include "nonloc1d/spectral.hpp"
#include "support/oracles.hpp"

using namespace nonloc1d;

namespace {

PotentialSpec constant_potential(const Grid1D& g, double value, double R0) {
  GridFunction c(g, TailModel::constant(value, value), Symmetry::even);
  for (auto& v : c.values) v = value;
  std::optional<NegativityRecord> rec;
  if (value < 0.0) rec = NegativityRecord{-value, R0};
  return make_potential(std::move(c), true, rec);
}

// Smooth bump supported in [-1, 1] with unit height.
double unit_bump(double x) { return CutoffFamily::profile(2.0 * std::abs(x)); }

}  // namespace

TEST_CASE("assembled operator is exactly symmetric and matches its matvec") {
  const Kernel k = make_mixture_kernel({{0.5, 0.5}, {0.75, 0.5}}, true);
  const Grid1D g = Grid1D::make(4.0, 0.25);
  const PotentialSpec c = constant_potential(g, -1.0, 1.0);

  for (bool odd : {false, true}) {
    const LinearizedOperator A(k, c, g, {}, odd);
    const DenseSym D = A.dense();
    CHECK(D.asymmetry() == 0.0);

    std::mt19937_64 rng(5 + odd);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec v(A.size()), via_op, via_dense;
    for (auto& x : v) x = u(rng);
    A.apply(v, via_op);
    D.apply(v, via_dense);
    for (std::size_t i = 0; i < A.size(); ++i)
      CHECK(via_op[i] == doctest::Approx(via_dense[i]).epsilon(1e-11));
  }
}

TEST_CASE("uniformly negative potential lifts the bottom eigenvalue") {
  const Kernel k = make_fractional_kernel(0.6, true);
  const Grid1D g = Grid1D::make(10.0, 0.01);  // about 2000 nodes
  const PotentialSpec c = constant_potential(g, -1.0, 1.0);
  const LinearizedOperator A(k, c, g);
  const auto pairs = bottom_spectrum(A, 2);
  REQUIRE(pairs.values.size() >= 1);
  CHECK(pairs.values[0] >= 1.0 - 1e-3);

  // Rayleigh quotients of arbitrary vectors sit above the bottom.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    Vec v(A.size()), av;
    for (auto& x : v) x = gauss(rng);
    A.apply(v, av);
    CHECK(dot(v, av) / dot(v, v) >= pairs.values[0] - 1e-9);
  }
}

TEST_CASE("layer nondegeneracy certificate") {
  const Kernel k = make_fractional_kernel(0.5, true);
  const Grid1D g = Grid1D::make(20.0, 0.05);
  const auto sol = solve_layer(k, sine_nonlinearity(), g);
  REQUIRE(sol.report.converged);
  const auto rep = nondegeneracy_certificate(sol, k, sine_nonlinearity());
  CHECK(rep.verdict == "PASS");
  REQUIRE(rep.eigs.size() >= 2);
  CHECK(std::abs(rep.eigs[0]) <= 5e-3);
  CHECK(rep.cosine >= 0.999);
  CHECK(rep.eigs[1] >= 10.0 * std::abs(rep.eigs[0]) + 1e-2);

  // The bottom mode aligns with the closed-form derivative as well.
  Vec ana(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i)
    ana[static_cast<std::size_t>(i)] = oracles::layer_half_deriv(g.node(i));
  const PotentialSpec c = linearization_potential(sol.u, sine_nonlinearity());
  const LinearizedOperator A(k, c, g);
  const auto pairs = bottom_spectrum(A, 2);
  CHECK(alignment_cosine(pairs.vectors[0], ana) >= 0.999);
}

TEST_CASE("certificate is stable under a one-node translation") {
  const Kernel k = make_fractional_kernel(0.5, true);
  const Grid1D g = Grid1D::make(16.0, 0.05);
  const auto sol = solve_layer(k, sine_nonlinearity(), g);
  REQUIRE(sol.report.converged);

  SolveResult shifted = sol;
  for (int i = g.size() - 1; i >= 1; --i) shifted.u[i] = sol.u[i - 1];
  shifted.u[0] = sol.u.tail.value(-g.X - g.h);

  const auto a = nondegeneracy_certificate(sol, k, sine_nonlinearity());
  const auto b = nondegeneracy_certificate(shifted, k, sine_nonlinearity());
  REQUIRE(a.eigs.size() >= 1);
  REQUIRE(b.eigs.size() >= 1);
  CHECK(std::abs(a.eigs[0] - b.eigs[0]) < 1e-4);
}

TEST_CASE("non-converged input is rejected as a hypothesis failure") {
  const Kernel k = make_fractional_kernel(0.5, true);
  const Grid1D g = Grid1D::make(10.0, 0.1);
  SolveResult fake;
  fake.u = GridFunction(g, TailModel::constant(-1.0, 1.0));
  fake.report.converged = false;
  const auto rep = nondegeneracy_certificate(fake, k, sine_nonlinearity());
  CHECK(rep.verdict == "HYPOTHESES-NOT-MET");
}

TEST_CASE("quotient certificate on exact multiples and perturbations") {
  const Kernel k = make_fractional_kernel(0.5, true);
  const Grid1D g = Grid1D::make(20.0, 0.05);
  // w = 1/(1+x^2) is positive with c = Lw/w negative at infinity.
  GridFunction w = GridFunction::sample(
      g, [](double x) { return 1.0 / (1.0 + x * x); },
      TailModel::algebraic(0.0, 0.0, 1.0, 1.0, 2.0), Symmetry::even);
  const GridFunction Lw = apply_operator(k, w);
  GridFunction cv(g, TailModel::zero(), Symmetry::even);
  for (int i = 0; i < g.size(); ++i) cv[i] = Lw[i] / w[i];
  const auto rec = auto_negativity(cv);
  REQUIRE(rec.has_value());
  const PotentialSpec c = make_potential(std::move(cv), true, rec);

  SUBCASE("exact multiple passes with zero oscillation") {
    GridFunction wt = w;
    for (auto& v : wt.values) v *= 2.5;
    wt.tail = TailModel::algebraic(0.0, 0.0, 2.5, 2.5, 2.0);
    const auto rep = quotient_certificate(w, wt, k, c);
    CHECK(rep.verdict == "PASS");
    CHECK(rep.oscillation <= 1e-12);
    CHECK(rep.C_bound == doctest::Approx(2.5).epsilon(1e-12));
  }

  SUBCASE("negative multiple is still bounded and constant") {
    GridFunction wt = w;
    for (auto& v : wt.values) v *= -0.7;
    wt.tail = TailModel::algebraic(0.0, 0.0, -0.7, -0.7, 2.0);
    const auto rep = quotient_certificate(w, wt, k, c);
    CHECK(rep.verdict == "PASS");
    CHECK(rep.oscillation <= 1e-12);
  }

  SUBCASE("a compact bump breaks constancy") {
    GridFunction wt = w;
    for (int i = 0; i < g.size(); ++i) wt[i] += 0.25 * unit_bump(g.node(i));
    wt.tail = w.tail;
    const auto rep = quotient_certificate(w, wt, k, c);
    CHECK(rep.verdict == "FAIL");
    CHECK(rep.oscillation > 0.1);
  }

  SUBCASE("sign-changing w is a hypothesis failure") {
    GridFunction bad = w;
    bad[g.center()] = -1.0;
    const auto rep = quotient_certificate(bad, w, k, c);
    CHECK(rep.verdict == "HYPOTHESES-NOT-MET");
  }

  SUBCASE("missing negativity record is a hypothesis failure") {
    GridFunction cv2 = c.values;
    const PotentialSpec c2 = make_potential(std::move(cv2), true, std::nullopt);
    const auto rep = quotient_certificate(w, w, k, c2);
    CHECK(rep.verdict == "HYPOTHESES-NOT-MET");
  }
}

TEST_CASE("exterior maximum principle") {
  const Kernel k = make_fractional_kernel(0.5, true);
  const Grid1D g = Grid1D::make(20.0, 0.05);

  SUBCASE("positive solution of its own equation passes") {
    GridFunction w = GridFunction::sample(
        g, [](double x) { return 1.0 / (1.0 + x * x); },
        TailModel::algebraic(0.0, 0.0, 1.0, 1.0, 2.0), Symmetry::even);
    const GridFunction Lw = apply_operator(k, w);
    GridFunction cv(g, TailModel::zero(), Symmetry::even);
    for (int i = 0; i < g.size(); ++i) cv[i] = Lw[i] / w[i];
    const auto rec = auto_negativity(cv);
    REQUIRE(rec.has_value());
    const PotentialSpec c = make_potential(std::move(cv), true, rec);
    const auto rep = max_principle_check(k, c, w);
    CHECK(rep.verdict == "PASS");
    CHECK(rep.details["min_value"].get<double>() > 0.0);
  }

  SUBCASE("the constant -1 violates the exterior hypothesis") {
    const PotentialSpec c = constant_potential(g, -1.0, 1.0);
    GridFunction phi(g, TailModel::constant(-1.0, -1.0));
    for (auto& v : phi.values) v = -1.0;
    const auto rep = max_principle_check(k, c, phi);
    CHECK(rep.verdict == "HYPOTHESES-NOT-MET");
  }
}

TEST_CASE("odd maximum principle with the small-domain gate") {
  const Kernel k = make_fractional_kernel(0.5, true);  // lambda = 1/pi
  const Grid1D g = Grid1D::make(12.0, 0.05);

  auto make_c = [&](double r0) {
    GridFunction cv(g, TailModel::constant(-1.0, -1.0), Symmetry::even);
    for (auto& v : cv.values) v = -1.0;
    return make_potential(std::move(cv), true, NegativityRecord{1.0, 1.0}, 0.0,
                          r0);
  };

  // Odd positive data manufactured by solving (L + 1) w = rho with rho > 0.
  const PotentialSpec c_ok = make_c(0.5);
  const LinearizedOperator A(k, c_ok, g, {}, true);
  Vec rho(A.size());
  for (std::size_t j = 0; j < A.size(); ++j) {
    const double x = (double(j) + 1.0) * g.h;
    rho[j] = x * std::exp(-x * x);
  }
  Vec wh;
  GmresOptions gopt;
  gopt.rtol = 1e-12;
  const auto stats = gmres(A.op(), rho, wh, gopt);
  REQUIRE(stats.converged);
  GridFunction phi(g, TailModel::zero(), Symmetry::odd);
  for (int kk = 1; kk <= g.M; ++kk) {
    phi[g.center() + kk] = wh[static_cast<std::size_t>(kk - 1)];
    phi[g.center() - kk] = -wh[static_cast<std::size_t>(kk - 1)];
  }

  SUBCASE("admissible inner radius is accepted and the sign propagates") {
    const auto rep = max_principle_check(k, c_ok, phi, true);
    CHECK(rep.details["small_domain_gate"] == true);
    CHECK(rep.verdict == "PASS");
    CHECK(rep.details["ctilde_negativity"].get<double>() > 0.0);
  }

  SUBCASE("too large an inner radius is rejected by the gate") {
    // Bound is (lambda/(s |c|))^{1/2s} = 2/pi = 0.6366.
    const auto rep = max_principle_check(k, make_c(0.7), phi, true);
    CHECK(rep.verdict == "HYPOTHESES-NOT-MET");
    CHECK(rep.details["small_domain_gate"] == false);
    const auto ok = max_principle_check(k, make_c(0.5), phi, true);
    CHECK(ok.details["small_domain_gate"] == true);
  }
}
