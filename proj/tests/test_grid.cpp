#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "nonloc1d/grid.hpp"

using namespace nonloc1d;

TEST_CASE("grid construction") {
  const Grid1D g = Grid1D::make(4.0, 0.5);
  CHECK(g.size() == 17);
  CHECK(g.node(g.center()) == 0.0);
  CHECK(g.node(0) == doctest::Approx(-4.0));
  CHECK(g.node(g.size() - 1) == doctest::Approx(4.0));
  CHECK(g.index_of(1.5) == g.center() + 3);
  CHECK_THROWS(Grid1D::make(4.0, 0.3));
  CHECK_THROWS(Grid1D::make(0.5, 0.1));
  CHECK_THROWS(Grid1D::make(4.0, -0.5));
}

TEST_CASE("symmetry validation") {
  const Grid1D g = Grid1D::make(2.0, 0.5);
  GridFunction odd = GridFunction::sample(
      g, [](double x) { return x * std::exp(-x * x); },
      TailModel::algebraic(-0.0, 0.0, -0.0, 0.0, 2.0), Symmetry::odd);
  CHECK_NOTHROW(odd.validate());

  GridFunction bad = odd;
  bad[0] += 1.0;
  CHECK_THROWS(bad.validate());

  GridFunction even = GridFunction::sample(
      g, [](double x) { return std::cos(x); }, TailModel::zero(), Symmetry::even);
  CHECK_NOTHROW(even.validate());

  GridFunction layer_tail(g, TailModel::algebraic(-1.0, 1.0, 0.6, -0.6, 1.0),
                          Symmetry::odd);
  CHECK_NOTHROW(layer_tail.validate());
  CHECK(layer_tail.tail.value(10.0) == doctest::Approx(1.0 - 0.06));
  CHECK(layer_tail.tail.value(-10.0) == doctest::Approx(-1.0 + 0.06));
}

TEST_CASE("tail amplitude fit recovers an exact power correction") {
  const Grid1D g = Grid1D::make(20.0, 0.1);
  GridFunction f = GridFunction::sample(
      g, [](double x) { return 2.0 / (1.0 + x * x); }, TailModel::zero(),
      Symmetry::even);
  fit_tail_amplitude(f, 0.0, 0.0, 2.0);
  // 2/(1+x^2) ~ 2 x^{-2} - 2 x^{-4}; outer-decade fit lands close to 2.
  CHECK(f.tail.amp_plus == doctest::Approx(2.0).epsilon(5e-3));
  CHECK(f.tail.amp_minus == doctest::Approx(f.tail.amp_plus));
}

TEST_CASE("csv round trip") {
  namespace fs = std::filesystem;
  const Grid1D g = Grid1D::make(1.0, 0.25);
  GridFunction f = GridFunction::sample(
      g, [](double x) { return std::sin(x) + 0.125; },
      TailModel::constant(0.5, -0.25), Symmetry::none);
  const std::string path = (fs::temp_directory_path() / "nonloc1d_gf.csv").string();
  write_csv(f, path);
  const GridFunction f2 = read_csv(path, sidecar_json(f));
  REQUIRE(f2.grid.size() == g.size());
  for (int i = 0; i < g.size(); ++i) CHECK(f2[i] == f[i]);
  CHECK(f2.tail.ell_minus == 0.5);
  CHECK(f2.tail.ell_plus == -0.25);
  fs::remove(path);
}

TEST_CASE("centered slopes use tail ghosts at the edges") {
  const Grid1D g = Grid1D::make(2.0, 1.0);
  GridFunction f = GridFunction::sample(g, [](double x) { return 3.0 * x; },
                                        TailModel::constant(-9.0, 9.0));
  const auto s = centered_slopes(f);
  CHECK(s[2] == doctest::Approx(3.0));
  // Edge slope mixes the node and the constant ghost.
  CHECK(s[4] == doctest::Approx((9.0 - 3.0) / 2.0));
}
