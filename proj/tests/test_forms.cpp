#include <doctest.h>

#include <cmath>
#include <random>

#include "nonloc1d/forms.hpp"
#include "nonloc1d/solvers.hpp"
#include "support/oracles.hpp"

using namespace nonloc1d;

namespace {

GridFunction smooth_positive(const Grid1D& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = 1.5 + 0.5 * u(rng);
  const double b = 0.5 * u(rng);
  const double c = 0.3 * u(rng);
  GridFunction f = GridFunction::sample(
      g,
      [&](double x) {
        return a + b * std::exp(-x * x) + c * std::exp(-(x - 1.0) * (x - 1.0));
      },
      TailModel::constant(a, a));
  return f;
}

}  // namespace

TEST_CASE("cutoff family profile") {
  const CutoffFamily eta = make_cutoff(3.0);
  CHECK(eta(0.0) == 1.0);
  CHECK(eta(1.5) == 1.0);      // 0.5 R
  CHECK(eta(-3.0) == 1.0);     // exactly R
  CHECK(eta(9.0) == 0.0);      // 3 R
  CHECK(eta(6.0) == 0.0);      // exactly 2R
  CHECK(eta(4.5) > 0.0);
  CHECK(eta(4.5) < 1.0);
  CHECK(eta.base_lipschitz() == doctest::Approx(1.875));
  CHECK_THROWS(make_cutoff(0.0));

  // Transition is C^1 with the analytic derivative.
  for (double x : {3.2, 4.0, 5.7}) {
    const double fd = (eta(x + 1e-6) - eta(x - 1e-6)) / 2e-6;
    CHECK(eta.derivative(x) == doctest::Approx(fd).epsilon(1e-6));
  }

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-12.0, 12.0);
  for (int t = 0; t < 10000; ++t) {
    const double x = u(rng), y = u(rng);
    const double lhs = std::abs(eta(x) - eta(y));
    const double rhs = eta.base_lipschitz() *
                       std::min(1.0, std::abs(x - y) / eta.R);
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("constant quotient gives vanishing forms") {
  const Kernel k = make_fractional_kernel(0.6, true);
  const Grid1D g = Grid1D::make(8.0, 0.1);
  GridFunction w = smooth_positive(g, 1);
  GridFunction sigma(g, TailModel::constant(4.0, 4.0));
  for (auto& v : sigma.values) v = 4.0;
  const auto r = bilinear_forms(sigma, w, make_cutoff(2.0), k, false);
  CHECK(r.J1 == 0.0);
  CHECK(r.RHS == 0.0);
}

TEST_CASE("J1 is shift invariant in the quotient") {
  const Kernel k = make_fractional_kernel(0.7, true);
  const Grid1D g = Grid1D::make(8.0, 0.1);
  GridFunction w = smooth_positive(g, 2);
  GridFunction sigma = GridFunction::sample(
      g, [](double x) { return std::sin(0.7 * x); }, TailModel::zero());
  GridFunction shifted = sigma;
  for (auto& v : shifted.values) v += 5.0;
  shifted.tail = TailModel::constant(5.0, 5.0);
  const auto a = bilinear_forms(sigma, w, make_cutoff(2.0), k, false);
  const auto b = bilinear_forms(shifted, w, make_cutoff(2.0), k, false);
  CHECK(b.J1 == doctest::Approx(a.J1).epsilon(1e-10));
  CHECK(a.J1 > 0.0);
}

TEST_CASE("five-node brute-force double sum") {
  const Kernel k = make_fractional_kernel(0.75, true);
  const Grid1D g = Grid1D::make(2.0, 1.0);  // five nodes
  GridFunction sigma(g, TailModel::zero());
  GridFunction w(g, TailModel::zero());
  sigma.values = {0.3, -0.7, 1.1, 0.4, -0.2};
  w.values = {1.0, 2.0, 0.5, 1.5, 0.8};
  const CutoffFamily tau = make_cutoff(1.0);
  const auto got = bilinear_forms(sigma, w, tau, k, false);

  // Independent evaluation over all 25 cell pairs.
  const double h = g.h;
  const double mu2 = 2.0 * k.second_moment(0.0, h);
  const auto slopes = centered_slopes(sigma);
  double j1 = 0.0, rhs = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double xi = g.node(i), xj = g.node(j);
      const double ti = tau(xi), tj = tau(xj);
      if (i == j) {
        const double band = w[i] * w[i] * mu2;
        j1 += slopes[static_cast<std::size_t>(i)] *
              slopes[static_cast<std::size_t>(i)] * 2.0 * ti * ti * band;
        rhs += -(2.0 * sigma[i] * slopes[static_cast<std::size_t>(i)]) *
               (2.0 * ti * tau.derivative(xi)) * band;
        continue;
      }
      const double d = std::abs(xi - xj);
      const double lo = std::max(h, d - 0.5 * h);
      const double hi = d + 0.5 * h;
      const double wgt = (lo < hi) ? k.integrate(lo, hi) : 0.0;
      const double dsig = sigma[i] - sigma[j];
      j1 += dsig * dsig * (ti * ti + tj * tj) * w[i] * w[j] * wgt;
      rhs += -(sigma[i] * sigma[i] - sigma[j] * sigma[j]) *
             (ti * ti - tj * tj) * w[i] * w[j] * wgt;
    }
  j1 *= h;
  rhs *= h;
  CHECK(got.J1 == doctest::Approx(j1).epsilon(1e-12));
  CHECK(got.RHS == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("half-line forms equal half of the full-line forms") {
  const Kernel k = make_fractional_kernel(0.6, true);
  const Grid1D g = Grid1D::make(10.0, 0.05);
  GridFunction w = GridFunction::sample(
      g, [](double x) { return x * std::exp(-0.3 * x * x); },
      TailModel::zero(), Symmetry::odd);
  GridFunction sigma = GridFunction::sample(
      g, [](double x) { return 1.0 + 0.5 * std::exp(-x * x); },
      TailModel::constant(1.0, 1.0), Symmetry::even);
  const CutoffFamily tau = make_cutoff(3.0);
  const auto full = bilinear_forms(sigma, w, tau, k, false);
  const auto half = bilinear_forms(sigma, w, tau, k, true);
  CHECK(full.J1 == doctest::Approx(2.0 * half.J1).epsilon(1e-6));
  CHECK(full.RHS == doctest::Approx(2.0 * half.RHS).epsilon(1e-6));
  CHECK(half.J1 > 0.0);
}

TEST_CASE("odd flag requires a monotone kernel") {
  std::vector<double> z{0.5, 1.0, 2.0}, K{1.0, 2.0, 0.5};  // not monotone
  const Kernel bad = make_tabulated_kernel(z, K, 0.6, 0.6);
  const Grid1D g = Grid1D::make(4.0, 0.5);
  GridFunction w(g, TailModel::zero(), Symmetry::odd);
  GridFunction sigma(g, TailModel::zero());
  CHECK_THROWS(bilinear_forms(sigma, w, make_cutoff(1.0), bad, true));
}

TEST_CASE("quotient identity on a manufactured exact pair") {
  const Kernel k = make_fractional_kernel(0.75, true);
  const Grid1D g = Grid1D::make(10.0, 0.05);
  GridFunction w = GridFunction::sample(
      g, [](double x) { return 2.0 + std::exp(-x * x); },
      TailModel::constant(2.0, 2.0));
  const GridFunction Lw = apply_operator(k, w);
  GridFunction cvals(g, TailModel::zero());
  for (int i = 0; i < g.size(); ++i) cvals[i] = Lw[i] / w[i];
  const PotentialSpec c = make_potential(cvals, false);

  GridFunction wt = w;
  for (auto& v : wt.values) v *= 3.0;
  wt.tail = TailModel::constant(6.0, 6.0);

  const auto rep = caccioppoli_check(w, wt, k, c, 3.0, false);
  CHECK(rep.verdict == "EQUALITY");
  CHECK(std::abs(rep.J1 - rep.RHS) <= 1e-10 * rep.scale);
  CHECK(rep.premise_neg <= 1e-10 * rep.premise_scale + 1e-30);
}

TEST_CASE("quotient identity on a solved profile derivative") {
  const Kernel k = make_fractional_kernel(0.75, true);
  const Grid1D g = Grid1D::make(15.0, 0.05);
  const auto sol = solve_layer(k, cubic_nonlinearity(), g);
  REQUIRE(sol.report.converged);
  GridFunction uprime = derivative(sol.u, 1.0 + 2.0 * 0.75);
  GridFunction cv(g, TailModel::zero(), Symmetry::even);
  for (int i = 0; i < g.size(); ++i)
    cv[i] = cubic_nonlinearity().fprime(sol.u[i]);
  const PotentialSpec c = make_potential(std::move(cv), false);

  // Both slots hold the same near-solution; its measured residual drives the
  // tolerance and the forms agree within it.
  const auto rep = caccioppoli_check(uprime, uprime, k, c, 3.0, false);
  CHECK(rep.verdict == "EQUALITY");
  CHECK(std::abs(rep.J1 - rep.RHS) <= rep.tol);
  CHECK(rep.premise_pos < rep.premise_scale);
}

TEST_CASE("premise-coupled inequality holds on rejection-sampled quotients") {
  const Kernel k = make_fractional_kernel(0.6, true);
  const Grid1D g = Grid1D::make(8.0, 0.1);
  int accepted = 0;
  for (unsigned seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GridFunction w = smooth_positive(g, 100 + seed);
    const double a = 1.0 + 0.5 * u(rng);
    const double eps = 1e-3 * std::abs(u(rng));
    const double x0 = u(rng);
    GridFunction wt(g, TailModel::zero());
    for (int i = 0; i < g.size(); ++i) {
      const double x = g.node(i);
      const double sig = a + eps * std::exp(-2.0 * (x - x0) * (x - x0));
      wt[i] = sig * w[i];
    }
    wt.tail = TailModel::constant(a * w.tail.ell_minus, a * w.tail.ell_plus);

    // Potential manufactured from wt, so the second premise holds exactly;
    // the first is measured and samples violating it badly are skipped.
    const GridFunction Lwt = apply_operator(k, wt);
    GridFunction cvals(g, TailModel::zero());
    for (int i = 0; i < g.size(); ++i) cvals[i] = Lwt[i] / wt[i];
    const PotentialSpec c = make_potential(cvals, false);

    const auto rep = caccioppoli_check(w, wt, k, c, 2.0, false);
    if (rep.premise_neg > 1e-2 * rep.premise_scale) continue;  // rejected
    ++accepted;
    CHECK(rep.J1 <= rep.RHS + rep.tol);
  }
  CHECK(accepted > 0);
}

TEST_CASE("cauchy-schwarz chain for the discrete quadrature") {
  const Kernel k = make_fractional_kernel(0.55, true);
  const Grid1D g = Grid1D::make(12.0, 0.1);
  GridFunction w = GridFunction::sample(
      g, [](double x) { return 1.0 / (1.0 + 0.3 * x * x); },
      TailModel::zero());
  GridFunction sigma = GridFunction::sample(
      g, [](double x) { return 1.0 + 0.4 * std::exp(-x * x); },
      TailModel::constant(1.0, 1.0));
  const CutoffFamily tau = make_cutoff(3.0);
  const auto forms = bilinear_forms(sigma, w, tau, k, false);

  // Cross term sum (sigma(x)+sigma(y))^2 (tau(x)-tau(y))^2 w w k, assembled
  // with the same cell weights.
  const double h = g.h;
  const double mu2 = 2.0 * k.second_moment(0.0, h);
  const auto slopes = centered_slopes(sigma);
  double cross = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double xi = g.node(i);
    const double ti = tau(xi);
    for (int j = i + 1; j < g.size(); ++j) {
      const double xj = g.node(j);
      const double d = std::abs(xi - xj);
      const double lo = std::max(h, d - 0.5 * h);
      const double hi = d + 0.5 * h;
      if (lo >= hi) continue;
      const double wgt = k.integrate(lo, hi);
      const double ssum = sigma[i] + sigma[j];
      const double tdiff = ti - tau(xj);
      cross += 2.0 * ssum * ssum * tdiff * tdiff * w[i] * w[j] * wgt;
    }
    const double td = tau.derivative(xi);
    cross += 4.0 * sigma[i] * sigma[i] * td * td * w[i] * w[i] * mu2;
    (void)slopes;
  }
  cross *= h;
  CHECK(forms.RHS * forms.RHS <= 2.0 * forms.J1 * cross * (1.0 + 1e-10));
}

TEST_CASE("J1 grows with the cutoff scale and saturates") {
  const Kernel k = make_fractional_kernel(0.6, true);
  const Grid1D g = Grid1D::make(16.0, 0.05);
  GridFunction w = GridFunction::sample(
      g, [](double x) { return 1.0 / (1.0 + x * x); }, TailModel::zero());
  GridFunction sigma = GridFunction::sample(
      g,
      [](double x) {
        return 1.0 + CutoffFamily::profile(std::abs(x));  // bump on [-2,2]
      },
      TailModel::constant(1.0, 1.0));
  double prev = 0.0;
  std::vector<double> vals;
  for (double R : {1.0, 2.0, 4.0, 8.0}) {
    const auto f = bilinear_forms(sigma, w, make_cutoff(R), k, false);
    CHECK(f.J1 >= prev);
    prev = f.J1;
    vals.push_back(f.J1);
  }
  CHECK(vals.back() <= 1.05 * vals[vals.size() - 2]);
}
