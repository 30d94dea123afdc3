#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nonloc1d/kernels.hpp"
#include "nonloc1d/quadrature.hpp"
#include "support/oracles.hpp"

using namespace nonloc1d;
namespace pi_ns = std::numbers;

TEST_CASE("normalization constant") {
  CHECK(fractional_constant(0.5) == doctest::Approx(1.0 / pi_ns::pi).epsilon(1e-14));
  CHECK_THROWS(fractional_constant(0.0));
  CHECK_THROWS(fractional_constant(1.0));

  // Independent check via the Fourier symbol applied to a Gaussian:
  // the operator of order s at 0 on exp(-x^2) equals 4^s Gamma(s+1/2)/sqrt(pi),
  // computed here by direct quadrature of the singular integral.
  for (double s : {0.5, 0.75}) {
    const Kernel k = make_fractional_kernel(s, true);
    auto gauss = [](double x) { return std::exp(-x * x); };
    const double via_pv = oracles::pv_apply(k, gauss, 0.0, 1e-11);
    const double via_symbol =
        std::pow(4.0, s) * std::tgamma(s + 0.5) / std::sqrt(pi_ns::pi);
    CHECK(via_pv == doctest::Approx(via_symbol).epsilon(1e-8));
  }
}

TEST_CASE("fractional kernel values and symmetry") {
  const Kernel k = make_fractional_kernel(0.5, true);
  CHECK(k(1.0) == doctest::Approx(1.0 / pi_ns::pi).epsilon(1e-14));

  const Kernel k75 = make_fractional_kernel(0.75, false);
  CHECK(k75(2.0) == k75(-2.0));
  CHECK(k75(0.5) == doctest::Approx(std::pow(2.0, 2.5)).epsilon(1e-14));

  CHECK_THROWS(make_fractional_kernel(1.5));
  CHECK_THROWS(k(0.0));
}

TEST_CASE("kernel positivity and monotonicity on samples") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> logu(-5.0, 5.0);
  for (const Kernel& k :
       {make_fractional_kernel(0.6, true),
        make_mixture_kernel({{0.5, 0.5}, {0.75, 0.5}}, false)}) {
    for (int t = 0; t < 2000; ++t) {
      const double z = std::pow(10.0, logu(rng));
      CHECK(k(z) > 0.0);
      CHECK(k(z) == k(-z));
    }
    for (int t = 0; t < 2000; ++t) {
      double a = std::pow(10.0, logu(rng));
      double b = std::pow(10.0, logu(rng));
      if (a > b) std::swap(a, b);
      if (a == b) continue;
      CHECK(k(a) >= k(b));
    }
  }
}

TEST_CASE("mixture kernels") {
  CHECK_THROWS(make_mixture_kernel({}));
  CHECK_THROWS(make_mixture_kernel({{0.3, 1.0}}));
  CHECK_THROWS(make_mixture_kernel({{0.6, -1.0}}));

  SUBCASE("single atom equals the plain fractional kernel") {
    for (bool normalized : {false, true}) {
      const Kernel m = make_mixture_kernel({{0.5, 1.0}}, normalized);
      const Kernel f = make_fractional_kernel(0.5, normalized);
      for (double z : {1e-3, 0.1, 1.0, 7.0, 1e4})
        CHECK(m(z) == doctest::Approx(f(z)).epsilon(1e-15));
    }
  }

  SUBCASE("two-atom values and the split upper bound") {
    const Kernel m = make_mixture_kernel({{0.5, 0.5}, {0.75, 0.5}}, false);
    CHECK(m(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (double z : {0.1, 1.0, 10.0})
      CHECK(m(z) <= std::pow(z, -2.0) + std::pow(z, -2.5) + 1e-15);
    REQUIRE(m.upper_record().has_value());
    CHECK(m.upper_record()->Lambda1 == doctest::Approx(1.0));
    CHECK(m.upper_record()->Lambda2 == doctest::Approx(1.0));
  }
}

TEST_CASE("bound verification") {
  SUBCASE("equality case passes with worst ratio 1") {
    const Kernel k = make_fractional_kernel(0.6, false);
    auto rep = verify_kernel_bounds(k, EllipticityTwoSided{1.0, 1.0, 0.6}, 50);
    CHECK(rep.pass);
    CHECK(rep.worst_lower_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.worst_upper_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("own record passes across the order range") {
    for (int i = 1; i <= 20; ++i) {
      const double s = i / 21.0;
      const Kernel k = make_fractional_kernel(s, true);
      REQUIRE(k.two_sided_record().has_value());
      auto rep = verify_kernel_bounds(k, *k.two_sided_record(), 40);
      CHECK(rep.pass);
    }
  }

  SUBCASE("mixture violates a single-order upper bound near the origin") {
    const Kernel m = make_mixture_kernel({{0.5, 0.5}, {0.75, 0.5}}, false);
    auto rep = verify_kernel_bounds(m, EllipticityTwoSided{1e-9, 1.0, 0.5});
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.upper_ok);
    // Direct evaluation of both sides at z = 0.01.
    CHECK(m(0.01) > 1.0 * std::pow(0.01, -2.0));
    CHECK(rep.witness_upper < 0.1);
  }

  SUBCASE("wrong constants fail the lower bound with ratio 1/2") {
    const Kernel k = make_fractional_kernel(0.6, false);
    auto rep = verify_kernel_bounds(k, EllipticityTwoSided{2.0, 3.0, 0.6});
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.lower_ok);
    CHECK(rep.worst_lower_ratio == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("mixture passes its split upper claim") {
    const Kernel m = make_mixture_kernel({{0.5, 0.5}, {0.75, 0.5}}, false);
    auto rep = verify_kernel_bounds(m, EllipticityUpper{1.0, 1.0, 0.5, 0.75});
    CHECK(rep.pass);
  }
}

TEST_CASE("antisymmetrized kernel difference") {
  const Kernel k = make_fractional_kernel(0.5, true);
  CHECK(antisymmetrized_value(k, 1.0, 2.0) ==
        doctest::Approx(8.0 / (9.0 * pi_ns::pi)).epsilon(1e-13));
  CHECK_THROWS(antisymmetrized_value(k, 1.0, 1.0));
  CHECK_THROWS(antisymmetrized_value(k, -1.0, 2.0));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-3, 50.0);
  const Kernel m = make_mixture_kernel({{0.5, 0.3}, {0.9, 0.7}}, true);
  for (int t = 0; t < 10000; ++t) {
    double x = u(rng), y = u(rng);
    if (x == y) continue;
    CHECK(antisymmetrized_value(m, x, y) >= 0.0);
  }

  // x -> 0+ limit vanishes by symmetry of the kernel.
  CHECK(antisymmetrized_value(k, 1e-9, 2.0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("tail masses") {
  const Kernel k = make_fractional_kernel(0.5, true);
  CHECK(tail_mass(k, 2.0) == doctest::Approx(1.0 / (2.0 * pi_ns::pi)).epsilon(1e-14));
  CHECK_THROWS(tail_mass(k, 0.0));

  SUBCASE("strictly decreasing to zero") {
    const Kernel m = make_mixture_kernel({{0.55, 1.0}, {0.8, 2.0}}, false);
    double prev = tail_mass(m, 0.5);
    for (double x : {1.0, 2.0, 4.0, 16.0, 256.0, 1e5}) {
      const double t = tail_mass(m, x);
      CHECK(t < prev);
      prev = t;
    }
    CHECK(prev < 1e-5);
  }

  SUBCASE("mixture tail mass is the weighted sum of atom tails") {
    const Kernel m = make_mixture_kernel({{0.5, 0.25}, {0.75, 0.75}}, true);
    const Kernel a = make_fractional_kernel(0.5, true);
    const Kernel b = make_fractional_kernel(0.75, true);
    for (double x : {0.3, 1.0, 9.0})
      CHECK(tail_mass(m, x) ==
            doctest::Approx(0.25 * tail_mass(a, x) + 0.75 * tail_mass(b, x))
                .epsilon(1e-14));
  }

  SUBCASE("closed forms match adaptive quadrature") {
    for (double s : {0.5, 0.66, 0.9}) {
      const Kernel k2 = make_fractional_kernel(s, true);
      for (double x : {0.25, 1.0, 5.0}) {
        const double quad =
            integrate_upper([&](double z) { return k2(z); }, x, 1e-12).value;
        CHECK(tail_mass(k2, x) == doctest::Approx(quad).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("tabulated kernels") {
  // Table sampled from an exact power law: interpolation must reproduce it.
  const Kernel f = make_fractional_kernel(0.7, false);
  std::vector<double> z, K;
  for (int i = -8; i <= 8; ++i) {
    z.push_back(std::pow(2.0, i));
    K.push_back(f(z.back()));
  }
  const Kernel t = make_tabulated_kernel(z, K, 0.7, 0.7);
  for (double zz : {1e-5, 0.037, 1.0, 55.0, 1e6})
    CHECK(t(zz) == doctest::Approx(f(zz)).epsilon(1e-12));
  CHECK(t.monotone());
  for (double x : {0.2, 3.0})
    CHECK(tail_mass(t, x) == doctest::Approx(tail_mass(f, x)).epsilon(1e-10));
  CHECK(t.second_moment(0.0, 0.5) ==
        doctest::Approx(f.second_moment(0.0, 0.5)).epsilon(1e-10));
}

TEST_CASE("kernel JSON round trip") {
  const Kernel m = make_mixture_kernel({{0.5, 0.5}, {0.75, 0.5}}, true);
  const Kernel m2 = Kernel::from_json(m.to_json());
  for (double z : {0.01, 1.0, 100.0})
    CHECK(m(z) == doctest::Approx(m2(z)).epsilon(1e-15));

  const Kernel f = make_fractional_kernel(0.62, false);
  const Kernel f2 = Kernel::from_json(f.to_json());
  CHECK(f(0.3) == f2(0.3));
  CHECK_THROWS(Kernel::from_json(nlohmann::json{{"kind", "bogus"}}));
}
