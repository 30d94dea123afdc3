#ifndef NONLOC1D_OPERATOR_HPP
#define NONLOC1D_OPERATOR_HPP

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nonloc1d/grid.hpp"
#include "nonloc1d/kernels.hpp"
#include "nonloc1d/linalg.hpp"
#include "nonloc1d/quadrature.hpp"

namespace nonloc1d {

// Near/mid/far splitting of the principal-value integral:
//   near  |z| <= delta   second differences with the exact moment of z^2 K
//   mid   cells on the grid, exact kernel antiderivatives per cell against
//         cell-wise quadratic data (value, centered slope, second difference)
//   far   |y| > X + h/2  tail model, closed forms plus adaptive quadrature
struct OperatorScheme {
  double delta = 0.0;  // near-field split radius; <= 0 means "use h"
  double far_rtol = 1e-8;
  std::string singular_rule = "second-difference-moment";

  double resolved_delta(double h) const {
    const double d = delta <= 0.0 ? h : delta;
    if (!(d > 0.0 && d <= 4.0 * h * (1.0 + 1e-12)))
      throw std::invalid_argument("OperatorScheme: need 0 < delta <= 4h");
    return d;
  }
};

// Precomputed tables for one (kernel, grid, scheme) triple. All members are
// immutable after construction except the per-exponent cache of far-field
// integrals, so concurrent reads are safe once a given exponent was touched.
class Discretization {
 public:
  Discretization(const Kernel& kernel, const Grid1D& grid,
                 const OperatorScheme& scheme = {})
      : kernel_(kernel), grid_(grid), scheme_(scheme) {
    const int n = grid_.size();
    const double h = grid_.h;
    delta_ = scheme_.resolved_delta(h);
    mu_ = kernel_.second_moment(0.0, delta_);

    W_.assign(static_cast<std::size_t>(n), 0.0);
    Mom_.assign(static_cast<std::size_t>(n), 0.0);
    Mom2_.assign(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k) {
      const double d = k * h;
      const double lo = std::max(delta_, d - 0.5 * h);
      const double hi = d + 0.5 * h;
      if (lo < hi) {
        const double p0 = kernel_.integrate(lo, hi);
        const double p1 = kernel_.first_moment(lo, hi);
        const double p2 = kernel_.second_moment(lo, hi);
        W_[static_cast<std::size_t>(k)] = p0;
        Mom_[static_cast<std::size_t>(k)] = p1 - d * p0;
        Mom2_[static_cast<std::size_t>(k)] = p2 - 2.0 * d * p1 + d * d * p0;
      }
    }
    Vec prefix(static_cast<std::size_t>(n), 0.0);
    for (int k = 1; k < n; ++k)
      prefix[static_cast<std::size_t>(k)] =
          prefix[static_cast<std::size_t>(k - 1)] + W_[static_cast<std::size_t>(k)];
    rowsum_.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      rowsum_[static_cast<std::size_t>(i)] =
          prefix[static_cast<std::size_t>(i)] +
          prefix[static_cast<std::size_t>(n - 1 - i)];

    toepW_ = SymmetricToeplitz(W_);
    toepM2_ = SymmetricToeplitz(Mom2_);
    slope_symbol_.assign(static_cast<std::size_t>(2 * n - 1), 0.0);
    for (int k = 1; k < n; ++k) {
      slope_symbol_[static_cast<std::size_t>(n - 1 - k)] = Mom_[static_cast<std::size_t>(k)];
      slope_symbol_[static_cast<std::size_t>(n - 1 + k)] = -Mom_[static_cast<std::size_t>(k)];
    }

    const double Xb = grid_.boundary();
    tm_right_.assign(static_cast<std::size_t>(n), 0.0);
    tm_left_.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const double x = grid_.node(i);
      tm_right_[static_cast<std::size_t>(i)] = kernel_.integrate(Xb - x, kInf);
      tm_left_[static_cast<std::size_t>(i)] = kernel_.integrate(Xb + x, kInf);
    }
  }

  const Kernel& kernel() const { return kernel_; }
  const Grid1D& grid() const { return grid_; }
  double delta() const { return delta_; }
  double near_moment() const { return mu_; }
  const Vec& cell_weights() const { return W_; }         // W[k], k = |i-j|
  const Vec& cell_moments() const { return Mom_; }       // first moments
  const Vec& row_sums() const { return rowsum_; }
  const Vec& tail_mass_right() const { return tm_right_; }
  const Vec& tail_mass_left() const { return tm_left_; }

  // Action of the exactly symmetric part of the scheme on zero-extended node
  // values: near-field second differences, the Toeplitz cell weights, and
  // the exterior escape masses. This is the matrix used for spectral work;
  // the slope/curvature corrections of apply() are dropped on purpose so the
  // assembled operator stays symmetric to the last bit.
  Vec apply_symmetric(const Vec& v) const {
    const int n = grid_.size();
    if (static_cast<int>(v.size()) != n)
      throw std::invalid_argument("apply_symmetric: size mismatch");
    Vec toep_v;
    toepW_.apply(v, toep_v);
    const double nu = mu_ / (grid_.h * grid_.h);
    Vec out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const double up = (i + 1 < n) ? v[si + 1] : 0.0;
      const double dn = (i >= 1) ? v[si - 1] : 0.0;
      out[si] = nu * (2.0 * v[si] - up - dn) + v[si] * rowsum_[si] -
                toep_v[si] + (tm_right_[si] + tm_left_[si]) * v[si];
    }
    return out;
  }

  // Signed exterior contribution carried by a tail model: the value the
  // operator sees from beyond the grid, pointwise per node. Linear in the
  // tail parameters, so convention mismatches between two functions can be
  // formed by subtraction.
  Vec exterior_tail_field(const TailModel& tail) const {
    const int n = grid_.size();
    Vec out(static_cast<std::size_t>(n), 0.0);
    const auto [jr, jl] = far_integrals(tail);
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      out[si] = tail.ell_plus * tm_right_[si] + tail.ell_minus * tm_left_[si];
      if (tail.kind == TailKind::algebraic)
        out[si] += tail.amp_plus * jr[si] + tail.amp_minus * jl[si];
    }
    return out;
  }

  // L phi at every node, using the function's tail model beyond the grid.
  Vec apply(const GridFunction& phi) const {
    const int n = grid_.size();
    if (static_cast<int>(phi.values.size()) != n || !phi.grid.same_as(grid_))
      throw std::invalid_argument("Discretization::apply: grid mismatch");
    for (double v : phi.values)
      if (!std::isfinite(v))
        throw std::invalid_argument("Discretization::apply: non-finite value");

    const double h = grid_.h;
    const Vec& f = phi.values;
    const Vec g = centered_slopes(phi);
    const double ghost_r = phi.tail.value(grid_.X + h);
    const double ghost_l = phi.tail.value(-grid_.X - h);
    Vec q(static_cast<std::size_t>(n));  // discrete curvature -phi''
    for (int i = 0; i < n; ++i) {
      const double up = (i + 1 < n) ? f[static_cast<std::size_t>(i + 1)] : ghost_r;
      const double dn = (i >= 1) ? f[static_cast<std::size_t>(i - 1)] : ghost_l;
      q[static_cast<std::size_t>(i)] =
          (up - 2.0 * f[static_cast<std::size_t>(i)] + dn) / (h * h);
    }

    Vec toep_f, toep_q;
    toepW_.apply(f, toep_f);
    toepM2_.apply(q, toep_q);
    const Vec conv = linear_convolution(slope_symbol_, g);

    const auto [jr, jl] = far_integrals(phi.tail);

    Vec out(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const double near = -q[si] * mu_;
      const double mid = f[si] * rowsum_[si] - toep_f[si] -
                         conv[static_cast<std::size_t>(i + n - 1)] -
                         0.5 * toep_q[si];
      double far = (f[si] - phi.tail.ell_plus) * tm_right_[si] +
                   (f[si] - phi.tail.ell_minus) * tm_left_[si];
      if (phi.tail.kind == TailKind::algebraic)
        far -= phi.tail.amp_plus * jr[si] + phi.tail.amp_minus * jl[si];
      out[si] = near + mid + far;
    }
    return out;
  }

 private:
  // J_right[i] = int_{Xb}^inf y^{-p} K(y - x_i) dy and the mirrored
  // J_left[i] with K(y + x_i); cached per decay exponent.
  const std::pair<Vec, Vec>& far_integrals(const TailModel& tail) const {
    static const std::pair<Vec, Vec> kEmpty{};
    if (tail.kind != TailKind::algebraic) return kEmpty;
    auto it = far_cache_.find(tail.p);
    if (it != far_cache_.end()) return it->second;
    const int n = grid_.size();
    const double Xb = grid_.boundary();
    Vec jr(static_cast<std::size_t>(n)), jl(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double x = grid_.node(i);
      jr[static_cast<std::size_t>(i)] =
          integrate_upper(
              [&](double y) { return std::pow(y, -tail.p) * kernel_(y - x); },
              Xb, scheme_.far_rtol)
              .value;
      jl[static_cast<std::size_t>(i)] =
          integrate_upper(
              [&](double y) { return std::pow(y, -tail.p) * kernel_(y + x); },
              Xb, scheme_.far_rtol)
              .value;
    }
    return far_cache_.emplace(tail.p, std::make_pair(std::move(jr), std::move(jl)))
        .first->second;
  }

  Kernel kernel_;
  Grid1D grid_;
  OperatorScheme scheme_;
  double delta_ = 0.0, mu_ = 0.0;
  Vec W_, Mom_, Mom2_, rowsum_, tm_right_, tm_left_, slope_symbol_;
  SymmetricToeplitz toepW_, toepM2_;
  mutable std::map<double, std::pair<Vec, Vec>> far_cache_;
};

inline GridFunction apply_operator(const Kernel& kernel, const GridFunction& phi,
                                   const OperatorScheme& scheme = {}) {
  if (!(kernel.order_lower() > 0.0 && kernel.order_upper() < 1.0))
    throw std::invalid_argument("apply_operator: kernel order outside (0,1)");
  Discretization disc(kernel, phi.grid, scheme);
  GridFunction out(phi.grid, TailModel::zero(), phi.sym);
  out.values = disc.apply(phi);
  return out;
}

// Half-line evaluation of L for odd data via the regional rewrite
//   L phi(x) = int_0^inf (phi(x)-phi(y)) (K(x-y)-K(x+y)) dy
//              + 2 phi(x) int_x^inf K(z) dz,   x > 0,
// discretized with the same near/mid/far machinery. Index k of the result
// corresponds to the node x = k h; the origin entry is 0 by symmetry.
inline Vec apply_operator_odd(const Kernel& kernel, const GridFunction& phi,
                              const OperatorScheme& scheme = {}) {
  if (phi.sym != Symmetry::odd)
    throw std::invalid_argument("apply_operator_odd: input is not odd-tagged");
  phi.validate(1e-8);
  const Grid1D& g = phi.grid;
  const double h = g.h;
  const double delta = scheme.resolved_delta(h);
  if (delta > h * (1.0 + 1e-12))
    throw std::invalid_argument(
        "apply_operator_odd: near radius must not exceed h on the half-line");
  const int M = g.M;
  const double Xb = g.boundary();
  const double mu = kernel.second_moment(0.0, delta);

  // psi_k = phi(k h), k = 0..M; centered slopes with the odd ghost at the
  // origin and the tail ghost at the far end.
  Vec psi(static_cast<std::size_t>(M) + 1);
  for (int k = 0; k <= M; ++k) psi[static_cast<std::size_t>(k)] = phi[g.center() + k];
  Vec slope(static_cast<std::size_t>(M) + 1), curv(static_cast<std::size_t>(M) + 1);
  for (int k = 0; k <= M; ++k) {
    const double up = (k + 1 <= M) ? psi[static_cast<std::size_t>(k + 1)]
                                   : phi.tail.value(g.X + h);
    const double dn = (k >= 1) ? psi[static_cast<std::size_t>(k - 1)]
                               : -psi[1];  // odd reflection through 0
    slope[static_cast<std::size_t>(k)] = (up - dn) / (2.0 * h);
    curv[static_cast<std::size_t>(k)] =
        (up - 2.0 * psi[static_cast<std::size_t>(k)] + dn) / (h * h);
  }

  // Direct-part cell tables (distance-indexed, delta-clipped) and
  // reflected-part tables (sum-indexed, never clipped since i + j >= 1).
  Vec Wd(static_cast<std::size_t>(M) + 1, 0.0), Md(static_cast<std::size_t>(M) + 1, 0.0),
      Sd(static_cast<std::size_t>(M) + 1, 0.0);
  for (int k = 1; k <= M; ++k) {
    const double d = k * h;
    const double lo = std::max(delta, d - 0.5 * h);
    const double hi = d + 0.5 * h;
    if (lo < hi) {
      const double p0 = kernel.integrate(lo, hi);
      const double p1 = kernel.first_moment(lo, hi);
      const double p2 = kernel.second_moment(lo, hi);
      Wd[static_cast<std::size_t>(k)] = p0;
      Md[static_cast<std::size_t>(k)] = p1 - d * p0;
      Sd[static_cast<std::size_t>(k)] = p2 - 2.0 * d * p1 + d * d * p0;
    }
  }
  Vec Wp(static_cast<std::size_t>(2 * M) + 1, 0.0), Mp(static_cast<std::size_t>(2 * M) + 1, 0.0),
      Sp(static_cast<std::size_t>(2 * M) + 1, 0.0);
  for (int m = 1; m <= 2 * M; ++m) {
    const double c = m * h;
    const double lo = c - 0.5 * h;
    const double hi = c + 0.5 * h;
    const double p0 = kernel.integrate(lo, hi);
    const double p1 = kernel.first_moment(lo, hi);
    const double p2 = kernel.second_moment(lo, hi);
    Wp[static_cast<std::size_t>(m)] = p0;
    Mp[static_cast<std::size_t>(m)] = p1 - c * p0;
    Sp[static_cast<std::size_t>(m)] = p2 - 2.0 * c * p1 + c * c * p0;
  }

  const bool algebraic = phi.tail.kind == TailKind::algebraic;
  const double ell = phi.tail.ell_plus;
  const double amp = phi.tail.amp_plus;
  const double p_exp = phi.tail.p;

  Vec out(static_cast<std::size_t>(M) + 1, 0.0);
  for (int i = 1; i <= M; ++i) {
    const double x = i * h;
    const double fi = psi[static_cast<std::size_t>(i)];

    const double up = (i + 1 <= M) ? psi[static_cast<std::size_t>(i + 1)]
                                   : phi.tail.value(g.X + h);
    const double dn = psi[static_cast<std::size_t>(i - 1)];
    double acc = (2.0 * fi - dn - up) / (h * h) * mu;

    // Mid field: whole cells j = 1..M for both kernel arguments.
    for (int j = 1; j <= M; ++j) {
      const std::size_t sj = static_cast<std::size_t>(j);
      const double diff = fi - psi[sj];
      const int k = std::abs(i - j);
      if (k > 0) {
        const double dir = (j > i) ? 1.0 : -1.0;
        acc += diff * Wd[static_cast<std::size_t>(k)] -
               slope[sj] * dir * Md[static_cast<std::size_t>(k)] -
               0.5 * curv[sj] * Sd[static_cast<std::size_t>(k)];
      }
      acc -= diff * Wp[static_cast<std::size_t>(i + j)] -
             slope[sj] * Mp[static_cast<std::size_t>(i + j)] -
             0.5 * curv[sj] * Sp[static_cast<std::size_t>(i + j)];
    }
    // Origin half-cell y in [0, h/2], linear data through (0, 0).
    {
      const double g0 = slope[0];
      {  // direct piece, clipped by |x-y| > delta
        const double lo = std::max(delta, x - 0.5 * h);
        const double hi = x;
        if (lo < hi) {
          const double p0 = kernel.integrate(lo, hi);
          const double p1 = kernel.first_moment(lo, hi);
          // y = x - t, so y-moment = x*p0 - p1.
          acc += fi * p0 - g0 * (x * p0 - p1);
        }
      }
      {
        const double p0 = kernel.integrate(x, x + 0.5 * h);
        const double p1 = kernel.first_moment(x, x + 0.5 * h);
        acc -= fi * p0 - g0 * (p1 - x * p0);
      }
    }

    // Far field of the regional integral plus the zeroth-order term.
    const double tm_direct = kernel.integrate(Xb - x, kInf);
    const double tm_reflect = kernel.integrate(Xb + x, kInf);
    acc += (fi - ell) * tm_direct - (fi - ell) * tm_reflect;
    if (algebraic) {
      const double jr =
          integrate_upper(
              [&](double y) { return std::pow(y, -p_exp) * kernel(y - x); }, Xb,
              scheme.far_rtol)
              .value;
      const double jl =
          integrate_upper(
              [&](double y) { return std::pow(y, -p_exp) * kernel(y + x); }, Xb,
              scheme.far_rtol)
              .value;
      acc -= amp * (jr - jl);
    }
    acc += 2.0 * kernel.integrate(x, kInf) * fi;

    out[static_cast<std::size_t>(i)] = acc;
  }
  return out;
}

// Pointwise L phi - c phi on the shared grid.
inline GridFunction residual(const Kernel& kernel, const GridFunction& c,
                             const GridFunction& phi,
                             const OperatorScheme& scheme = {}) {
  if (!c.grid.same_as(phi.grid))
    throw std::invalid_argument("residual: potential and function grids differ");
  GridFunction r = apply_operator(kernel, phi, scheme);
  for (int i = 0; i < r.grid.size(); ++i) r[i] -= c[i] * phi[i];
  r.sym = Symmetry::none;
  return r;
}

inline double residual_sup(const Kernel& kernel, const GridFunction& c,
                           const GridFunction& phi, double a, double b,
                           const OperatorScheme& scheme = {}) {
  return residual(kernel, c, phi, scheme).sup_norm_on(a, b);
}

}  // namespace nonloc1d

#endif  // NONLOC1D_OPERATOR_HPP
