#ifndef NONLOC1D_SOLVERS_HPP
#define NONLOC1D_SOLVERS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "nonloc1d/operator.hpp"

namespace nonloc1d {

struct NonlinearitySpec {
  std::string name = "custom";
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  double holder_gamma = 1.0;  // declared smoothness record
};

inline NonlinearitySpec sine_nonlinearity() {
  return {"sin",
          [](double u) { return std::sin(std::numbers::pi * u) / std::numbers::pi; },
          [](double u) { return std::cos(std::numbers::pi * u); },
          1.0};
}
inline NonlinearitySpec cubic_nonlinearity() {
  return {"cubic", [](double u) { return u - u * u * u; },
          [](double u) { return 1.0 - 3.0 * u * u; }, 1.0};
}
inline NonlinearitySpec quadratic_nonlinearity() {
  return {"quadratic", [](double u) { return u * u - u; },
          [](double u) { return 2.0 * u - 1.0; }, 1.0};
}

inline NonlinearitySpec make_nonlinearity(const std::string& name) {
  if (name == "sin") return sine_nonlinearity();
  if (name == "cubic") return cubic_nonlinearity();
  if (name == "quadratic") return quadratic_nonlinearity();
  throw std::invalid_argument("make_nonlinearity: unknown name '" + name + "'");
}

struct SolverConfig {
  int max_iterations = 50;
  double residual_target = 1e-8;  // sup norm
  int max_backtracks = 25;
  int tail_refit_passes = 2;
  std::vector<double> continuation;  // optional order ladder (fractional only)
  std::string initial_guess = "default";  // default | zero (ground states)
  double guess_amplitude = 2.0;           // bump height for ground states
  int center_offset = 0;  // node offset of the layer normalization point
  double gmres_rtol = 1e-10;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double residual = kInf;  // sup norm of L u - f(u) on |x| <= X - 5
  // Residual of the equation displaced by the translation normalization; it
  // is not part of the solved system and vanishes only under symmetry.
  double normalization_residual = 0.0;
  std::vector<std::string> flags;
  TailModel tail;

  bool has_flag(const std::string& f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
  }
  json to_json() const {
    return json{{"iterations", iterations},
                {"residual", residual},
                {"normalization_residual", normalization_residual},
                {"converged", converged},
                {"flags", flags},
                {"tail", tail.to_json()}};
  }
};

struct SolveResult {
  GridFunction u;
  SolveReport report;
};

// Centered-difference derivative with a freshly fitted algebraic tail; the
// symmetry tag flips (derivatives of even data are odd and vice versa).
inline GridFunction derivative(const GridFunction& u, double tail_decay) {
  GridFunction d(u.grid, TailModel::zero(),
                 u.sym == Symmetry::odd    ? Symmetry::even
                 : u.sym == Symmetry::even ? Symmetry::odd
                                           : Symmetry::none);
  const Vec s = centered_slopes(u);
  d.values.assign(s.begin(), s.end());
  fit_tail_amplitude(d, 0.0, 0.0, tail_decay);
  return d;
}

// L u - f(u) with the function's own tail model.
inline GridFunction semilinear_residual(const Discretization& disc,
                                        const NonlinearitySpec& f,
                                        const GridFunction& u) {
  GridFunction r(u.grid, TailModel::zero());
  r.values = disc.apply(u);
  for (int i = 0; i < u.grid.size(); ++i) r[i] -= f.f(u[i]);
  return r;
}

namespace solvedetail {

// One damped Newton sweep on F(u) = L u - f(u). The Jacobian acts
// matrix-free (the operator is affine in the node values once the tail is
// frozen); a tridiagonal sketch of it preconditions GMRES. `fix_row` >= 0
// replaces that equation with u[fix_row] = 0.
struct NewtonDriver {
  const Discretization& disc;
  const NonlinearitySpec& f;
  const SolverConfig& cfg;
  int fix_row = -1;

  Vec residual_vec(const GridFunction& u) const {
    Vec F = disc.apply(u);
    for (int i = 0; i < u.grid.size(); ++i)
      F[static_cast<std::size_t>(i)] -= f.f(u[i]);
    if (fix_row >= 0) F[static_cast<std::size_t>(fix_row)] = u[fix_row];
    return F;
  }

  bool step(GridFunction& u) const {
    const Grid1D& g = u.grid;
    const int n = g.size();
    Vec F = residual_vec(u);

    Vec fp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) fp[static_cast<std::size_t>(i)] = f.fprime(u[i]);

    auto jac = [&](const Vec& v, Vec& out) {
      GridFunction gv(g, TailModel::zero());
      gv.values = v;
      out = disc.apply(gv);
      for (int i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] -=
            fp[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
      if (fix_row >= 0)
        out[static_cast<std::size_t>(fix_row)] = v[static_cast<std::size_t>(fix_row)];
    };

    Tridiagonal M;
    M.lower.assign(static_cast<std::size_t>(n), 0.0);
    M.diag.assign(static_cast<std::size_t>(n), 0.0);
    M.upper.assign(static_cast<std::size_t>(n), 0.0);
    const double nu = disc.near_moment() / (g.h * g.h);
    const double w1 = disc.cell_weights()[1];
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      M.diag[si] = 2.0 * nu + disc.row_sums()[si] + disc.tail_mass_right()[si] +
                   disc.tail_mass_left()[si] - fp[si];
      if (i > 0) M.lower[si] = -nu - w1;
      if (i + 1 < n) M.upper[si] = -nu - w1;
    }
    if (fix_row >= 0) {
      const std::size_t r = static_cast<std::size_t>(fix_row);
      M.lower[r] = 0.0;
      M.upper[r] = 0.0;
      M.diag[r] = 1.0;
    }
    auto precond = [&](const Vec& v, Vec& out) { M.solve(v, out); };

    Vec rhs(F);
    for (auto& v : rhs) v = -v;
    Vec delta;
    GmresOptions gopt;
    gopt.rtol = std::max(cfg.gmres_rtol, 1e-4 * std::min(1.0, norm_inf(F)));
    gopt.restart = 150;
    gopt.max_iters = 3000;
    gmres(jac, rhs, delta, gopt, precond);

    const double f0 = norm2(F);
    double t = 1.0;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      GridFunction trial = u;
      for (int i = 0; i < n; ++i)
        trial[i] += t * delta[static_cast<std::size_t>(i)];
      if (norm2(residual_vec(trial)) <= (1.0 - 1e-4 * t) * f0) {
        u = trial;
        return true;
      }
      t *= 0.5;
    }
    return false;
  }

  bool run(GridFunction& u, int& iterations) const {
    while (iterations < cfg.max_iterations) {
      if (norm_inf(residual_vec(u)) <= cfg.residual_target) return true;
      ++iterations;
      if (!step(u)) return false;
    }
    return norm_inf(residual_vec(u)) <= cfg.residual_target;
  }
};

inline SolveResult solve_layer_impl(const Kernel& kernel,
                                    const NonlinearitySpec& f,
                                    const Grid1D& grid,
                                    const SolverConfig& cfg,
                                    const OperatorScheme& scheme,
                                    const GridFunction* warm) {
  const double p_decay = 2.0 * kernel.order_lower();
  const double x0 = grid.node(grid.center() + cfg.center_offset);
  GridFunction u(grid, TailModel::algebraic(-1.0, 1.0, 0.0, 0.0, p_decay));
  if (warm) {
    u.values = warm->values;
  } else {
    for (int i = 0; i < grid.size(); ++i)
      u[i] = std::tanh(grid.node(i) - x0);
  }
  fit_tail_amplitude(u, -1.0, 1.0, p_decay);

  const Discretization disc(kernel, grid, scheme);
  NewtonDriver driver{disc, f, cfg, grid.center() + cfg.center_offset};

  SolveResult out;
  int iterations = 0;
  bool ok = driver.run(u, iterations);
  for (int pass = 0; pass < cfg.tail_refit_passes && ok; ++pass) {
    fit_tail_amplitude(u, -1.0, 1.0, p_decay);
    ok = driver.run(u, iterations);
  }

  out.u = u;
  out.u.sym = Symmetry::none;
  out.report.iterations = iterations;
  out.report.tail = u.tail;
  const GridFunction res_full = semilinear_residual(disc, f, u);
  const int fixed = grid.center() + cfg.center_offset;
  out.report.normalization_residual = std::abs(res_full[fixed]);
  double sup = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    if (i == fixed || std::abs(grid.node(i)) > grid.X - 5.0) continue;
    sup = std::max(sup, std::abs(res_full[i]));
  }
  out.report.residual = sup;
  out.report.converged = ok && out.report.residual <= 10.0 * cfg.residual_target;
  if (!ok) out.report.flags.push_back("FAILED");
  bool increasing = true;
  for (int i = 0; i + 1 < grid.size(); ++i)
    if (!(u[i + 1] > u[i])) increasing = false;
  if (out.report.converged && !increasing)
    out.report.flags.push_back("DEGENERATE");
  return out;
}

}  // namespace solvedetail

// Increasing profile connecting the limits -1 and +1. The translation is
// pinned by replacing one equation with u(x_center) = 0; the tail amplitude
// is refit between Newton passes.
inline SolveResult solve_layer(const Kernel& kernel, const NonlinearitySpec& f,
                               const Grid1D& grid, const SolverConfig& cfg = {},
                               const OperatorScheme& scheme = {}) {
  if (std::abs(f.f(1.0)) > 1e-9 || std::abs(f.f(-1.0)) > 1e-9)
    throw std::invalid_argument("solve_layer: need f(+-1) = 0");
  if (!(f.fprime(1.0) < 0.0 && f.fprime(-1.0) < 0.0))
    throw std::invalid_argument("solve_layer: need f'(+-1) < 0");
  if (!(kernel.order_lower() >= 0.5 - 1e-12 && kernel.order_upper() < 1.0))
    throw std::invalid_argument("solve_layer: kernel order outside [1/2,1)");

  if (cfg.continuation.empty())
    return solvedetail::solve_layer_impl(kernel, f, grid, cfg, scheme, nullptr);

  if (kernel.kind() != KernelKind::fractional)
    throw std::invalid_argument(
        "solve_layer: continuation ladder only supports fractional kernels");
  SolverConfig inner = cfg;
  inner.continuation.clear();
  SolveResult last;
  bool have = false;
  for (double s : cfg.continuation) {
    const Kernel ks = make_fractional_kernel(s, kernel.normalized());
    last = solvedetail::solve_layer_impl(ks, f, grid, inner, scheme,
                                         have ? &last.u : nullptr);
    have = true;
  }
  return solvedetail::solve_layer_impl(kernel, f, grid, inner, scheme,
                                       have ? &last.u : nullptr);
}

// Even positive profile decaying to zero, solved on the half line with even
// reflection.
inline SolveResult solve_ground_state(const Kernel& kernel,
                                      const NonlinearitySpec& f,
                                      const Grid1D& grid,
                                      const SolverConfig& cfg = {},
                                      const OperatorScheme& scheme = {}) {
  if (std::abs(f.f(0.0)) > 1e-9)
    throw std::invalid_argument("solve_ground_state: need f(0) = 0");
  if (!(f.fprime(0.0) < 0.0))
    throw std::invalid_argument("solve_ground_state: need f'(0) < 0");

  const double p_decay = 1.0 + 2.0 * kernel.order_lower();
  const int M = grid.M;
  const std::size_t nh = static_cast<std::size_t>(M) + 1;
  Vec psi(nh, 0.0);
  if (cfg.initial_guess != "zero") {
    for (int k = 0; k <= M; ++k) {
      const double x = k * grid.h;
      psi[static_cast<std::size_t>(k)] = cfg.guess_amplitude / (1.0 + x * x);
    }
  }

  const Discretization disc(kernel, grid, scheme);

  auto reflect = [&](const Vec& half, const TailModel& tail) {
    GridFunction u(grid, tail, Symmetry::even);
    for (int k = 0; k <= M; ++k) {
      u[grid.center() + k] = half[static_cast<std::size_t>(k)];
      u[grid.center() - k] = half[static_cast<std::size_t>(k)];
    }
    return u;
  };

  GridFunction u = reflect(psi, TailModel::algebraic(0, 0, 0, 0, p_decay));
  fit_tail_amplitude(u, 0.0, 0.0, p_decay);

  auto residual_half = [&](const GridFunction& uu) {
    const Vec full = disc.apply(uu);
    Vec F(nh);
    for (int k = 0; k <= M; ++k)
      F[static_cast<std::size_t>(k)] =
          full[static_cast<std::size_t>(grid.center() + k)] -
          f.f(uu[grid.center() + k]);
    return F;
  };

  SolveResult out;
  int iterations = 0;
  bool ok = true;
  auto newton_pass = [&]() {
    while (iterations < cfg.max_iterations) {
      Vec F = residual_half(u);
      if (norm_inf(F) <= cfg.residual_target) return true;
      ++iterations;

      Vec fp(nh);
      for (int k = 0; k <= M; ++k)
        fp[static_cast<std::size_t>(k)] = f.fprime(u[grid.center() + k]);

      auto jac = [&](const Vec& v, Vec& outv) {
        GridFunction gv(grid, TailModel::zero(), Symmetry::even);
        for (int k = 0; k <= M; ++k) {
          gv[grid.center() + k] = v[static_cast<std::size_t>(k)];
          gv[grid.center() - k] = v[static_cast<std::size_t>(k)];
        }
        const Vec full = disc.apply(gv);
        outv.resize(nh);
        for (int k = 0; k <= M; ++k)
          outv[static_cast<std::size_t>(k)] =
              full[static_cast<std::size_t>(grid.center() + k)] -
              fp[static_cast<std::size_t>(k)] * v[static_cast<std::size_t>(k)];
      };

      Tridiagonal Mpre;
      Mpre.lower.assign(nh, 0.0);
      Mpre.diag.assign(nh, 0.0);
      Mpre.upper.assign(nh, 0.0);
      const double nu = disc.near_moment() / (grid.h * grid.h);
      const double w1 = disc.cell_weights()[1];
      for (int k = 0; k <= M; ++k) {
        const std::size_t sk = static_cast<std::size_t>(k);
        const std::size_t gi = static_cast<std::size_t>(grid.center() + k);
        Mpre.diag[sk] = 2.0 * nu + disc.row_sums()[gi] +
                        disc.tail_mass_right()[gi] + disc.tail_mass_left()[gi] -
                        fp[sk];
        const double coupling = -nu - w1;
        if (k > 0) Mpre.lower[sk] = coupling;
        if (k + 1 <= M) Mpre.upper[sk] = coupling * ((k == 0) ? 2.0 : 1.0);
      }
      auto precond = [&](const Vec& v, Vec& outv) { Mpre.solve(v, outv); };

      Vec rhs(F);
      for (auto& v : rhs) v = -v;
      Vec delta;
      GmresOptions gopt;
      gopt.rtol = std::max(cfg.gmres_rtol, 1e-4 * std::min(1.0, norm_inf(F)));
      gopt.restart = 150;
      gopt.max_iters = 3000;
      gmres(jac, rhs, delta, gopt, precond);

      const double f0 = norm2(F);
      double t = 1.0;
      bool accepted = false;
      for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
        Vec trial = psi;
        for (std::size_t k = 0; k < nh; ++k) trial[k] += t * delta[k];
        GridFunction ut = reflect(trial, u.tail);
        if (norm2(residual_half(ut)) <= (1.0 - 1e-4 * t) * f0) {
          psi = trial;
          u = ut;
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) return false;
    }
    return norm_inf(residual_half(u)) <= cfg.residual_target;
  };

  ok = newton_pass();
  for (int pass = 0; pass < cfg.tail_refit_passes && ok; ++pass) {
    fit_tail_amplitude(u, 0.0, 0.0, p_decay);
    ok = newton_pass();
  }

  out.u = u;
  out.report.iterations = iterations;
  out.report.tail = u.tail;
  Vec F = residual_half(u);
  double sup = 0.0;
  for (int k = 0; k <= M; ++k)
    if (k * grid.h <= grid.X - 5.0)
      sup = std::max(sup, std::abs(F[static_cast<std::size_t>(k)]));
  out.report.residual = sup;
  out.report.converged = ok && sup <= 10.0 * cfg.residual_target;
  if (!ok) out.report.flags.push_back("FAILED");
  if (out.report.converged && u.sup_norm() < 0.05)
    out.report.flags.push_back("TRIVIAL-LIMIT");
  if (out.report.converged && !out.report.has_flag("TRIVIAL-LIMIT")) {
    bool positive = true, decreasing = true;
    for (int k = 0; k <= M; ++k) {
      if (!(u[grid.center() + k] > 0.0)) positive = false;
      if (k > 0 && !(u[grid.center() + k] < u[grid.center() + k - 1]))
        decreasing = false;
    }
    if (!positive || !decreasing) out.report.flags.push_back("DEGENERATE");
  }
  return out;
}

}  // namespace nonloc1d

#endif  // NONLOC1D_SOLVERS_HPP
