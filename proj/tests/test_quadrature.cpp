#include <doctest.h>

#include <cmath>

#include "nonloc1d/quadrature.hpp"

using namespace nonloc1d;

TEST_CASE("adaptive quadrature on smooth integrands") {
  auto r = integrate_adaptive([](double x) { return x * x; }, 0.0, 1.0);
  CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-13));

  auto osc = integrate_adaptive([](double x) { return std::sin(10.0 * x); },
                                0.0, 3.0, 1e-12);
  CHECK(osc.value ==
        doctest::Approx((1.0 - std::cos(30.0)) / 10.0).epsilon(1e-11));
}

TEST_CASE("upper-tail transform handles algebraic decay") {
  auto r = integrate_upper([](double z) { return 1.0 / (z * z); }, 1.0, 1e-12);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-11));

  auto r2 = integrate_upper([](double z) { return std::pow(z, -2.5); }, 2.0,
                            1e-12);
  CHECK(r2.value == doctest::Approx(std::pow(2.0, -1.5) / 1.5).epsilon(1e-11));
}

TEST_CASE("integrable endpoint singularity") {
  auto r = integrate_singular([](double x) { return 1.0 / std::sqrt(x); }, 0.0,
                              1.0, 1e-10);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-8));
}
