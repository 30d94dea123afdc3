#ifndef NONLOC1D_SETGEOM_HPP
#define NONLOC1D_SETGEOM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <variant>
#include <vector>

#include "nonloc1d/kernels.hpp"
#include "nonloc1d/quadrature.hpp"

namespace nonloc1d {

// Cross-shaped regions in R^n x R^n used by the kernel integrability bounds.
// Predicates work in any dimension; the integrals are one-dimensional.
//
//   S_R  = (B_2R x B_R^c) u (B_R^c x B_2R)
//   D_R  = { |x-y| <= 4R }
//   Tx_R = { |x| < 2R, |x-y| >= 4R }      Ty_R symmetric in y
//   Rx_r = { |x| < r,  |x-y| <= 2r }      Ry_r symmetric in y

using PointN = std::vector<double>;

namespace setdetail {
inline double norm(const PointN& p) {
  double s = 0.0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}
inline double dist(const PointN& a, const PointN& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}
}  // namespace setdetail

inline bool in_S(double R, const PointN& x, const PointN& y) {
  const double nx = setdetail::norm(x), ny = setdetail::norm(y);
  return (nx < 2.0 * R && ny >= R) || (nx >= R && ny < 2.0 * R);
}
inline bool in_D(double R, const PointN& x, const PointN& y) {
  return setdetail::dist(x, y) <= 4.0 * R;
}
inline bool in_Tx(double R, const PointN& x, const PointN& y) {
  return setdetail::norm(x) < 2.0 * R && setdetail::dist(x, y) >= 4.0 * R;
}
inline bool in_Ty(double R, const PointN& x, const PointN& y) {
  return setdetail::norm(y) < 2.0 * R && setdetail::dist(x, y) >= 4.0 * R;
}
inline bool in_Rx(double r, const PointN& x, const PointN& y) {
  return setdetail::norm(x) < r && setdetail::dist(x, y) <= 2.0 * r;
}
inline bool in_Ry(double r, const PointN& x, const PointN& y) {
  return setdetail::norm(y) < r && setdetail::dist(x, y) <= 2.0 * r;
}

struct Membership {
  bool S = false, D = false, Tx = false, Ty = false, Rx = false, Ry = false;
  bool S_and_D = false, S_minus_D = false, S_pp = false;
};

struct RegionQuery {
  double R = 1.0;
  int n = 1;
};

inline Membership classify_point(const RegionQuery& q, const PointN& x,
                                 const PointN& y) {
  if (!(q.R > 0.0)) throw std::invalid_argument("classify_point: need R > 0");
  if (static_cast<int>(x.size()) != q.n || static_cast<int>(y.size()) != q.n)
    throw std::invalid_argument("classify_point: dimension mismatch");
  Membership m;
  m.S = in_S(q.R, x, y);
  m.D = in_D(q.R, x, y);
  m.Tx = in_Tx(q.R, x, y);
  m.Ty = in_Ty(q.R, x, y);
  m.Rx = in_Rx(q.R, x, y);
  m.Ry = in_Ry(q.R, x, y);
  m.S_and_D = m.S && m.D;
  m.S_minus_D = m.S && !m.D;
  bool pos = true;
  for (double v : x) pos = pos && v > 0.0;
  for (double v : y) pos = pos && v > 0.0;
  m.S_pp = m.S && pos;
  return m;
}

struct IdentityReport {
  std::int64_t samples = 0;
  std::int64_t disjointness_violations = 0;
  std::int64_t union_violations = 0;
  std::int64_t inclusion_lower_violations = 0;
  std::int64_t inclusion_upper_violations = 0;
  std::int64_t swap_violations = 0;
  std::vector<std::array<double, 2>> witnesses;  // first coordinates only

  std::int64_t total_violations() const {
    return disjointness_violations + union_violations +
           inclusion_lower_violations + inclusion_upper_violations +
           swap_violations;
  }

  json to_json() const {
    return json{{"samples", samples},
                {"violations", total_violations()},
                {"disjointness", disjointness_violations},
                {"union", union_violations},
                {"inclusion_lower", inclusion_lower_violations},
                {"inclusion_upper", inclusion_upper_violations},
                {"swap", swap_violations}};
  }
};

// Uniform samples from [-8R, 8R]^{2n}; checks, per point,
//   (a) Tx and Ty are disjoint,
//   (b) S \ D  ==  Tx u Ty,
//   (c) Rx_{2R} \ Rx_R  c  S n D  c  (Rx_{2R}\Rx_{2R/3}) u (Ry_{2R}\Ry_{2R/3}),
//   (d) membership in S and D is invariant under swapping x and y.
inline IdentityReport verify_set_identities(double R, int n,
                                            std::int64_t samples,
                                            std::uint64_t seed) {
  if (samples < 1)
    throw std::invalid_argument("verify_set_identities: need samples >= 1");
  if (n < 1) throw std::invalid_argument("verify_set_identities: need n >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-8.0 * R, 8.0 * R);
  IdentityReport rep;
  rep.samples = samples;
  PointN x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  auto witness = [&]() {
    if (rep.witnesses.size() < 5) rep.witnesses.push_back({x[0], y[0]});
  };
  for (std::int64_t t = 0; t < samples; ++t) {
    for (auto& v : x) v = u(rng);
    for (auto& v : y) v = u(rng);
    const bool S = in_S(R, x, y), D = in_D(R, x, y);
    const bool Tx = in_Tx(R, x, y), Ty = in_Ty(R, x, y);
    if (Tx && Ty) {
      ++rep.disjointness_violations;
      witness();
    }
    if ((S && !D) != (Tx || Ty)) {
      ++rep.union_violations;
      witness();
    }
    const bool lower = in_Rx(2.0 * R, x, y) && !in_Rx(R, x, y);
    if (lower && !(S && D)) {
      ++rep.inclusion_lower_violations;
      witness();
    }
    const bool upper = (in_Rx(2.0 * R, x, y) && !in_Rx(2.0 * R / 3.0, x, y)) ||
                       (in_Ry(2.0 * R, x, y) && !in_Ry(2.0 * R / 3.0, x, y));
    if ((S && D) && !upper) {
      ++rep.inclusion_upper_violations;
      witness();
    }
    if (S != in_S(R, y, x) || D != in_D(R, y, x)) {
      ++rep.swap_violations;
      witness();
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Cross-region integrals (n = 1).

// Integrand kernel factor: either an evaluable Kernel or the pure power
// |x-y|^{-exponent}.
struct PowerTerm {
  double exponent = 2.0;
};
using CrossTerm = std::variant<Kernel, PowerTerm>;

enum class CrossRegion {
  SIntersectD,     // plain kernel factor on S n D
  SMinusD,         // plain kernel factor on S \ D
  SCutoff,         // min{1,|x-y|/R}^2 weight on all of S
  SPlusPlusCutoff  // antisymmetrized kernel with the cutoff on S n (R+ x R+)
};

struct CrossOptions {
  double rtol = 1e-4;       // overall relative target
  double tail_rel = 1e-6;   // relative mass allowed beyond the truncation
  double min_trunc = 1e3;   // truncation radius is at least min_trunc * R
};

namespace setdetail {

struct Iv {
  double a, b;
};

inline void push_clip(std::vector<Iv>& out, double a, double b, double lo,
                      double hi) {
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (a < b) out.push_back({a, b});
}

}  // namespace setdetail

inline double cross_region_integral(const CrossTerm& term, double R,
                                    double gamma, CrossRegion region,
                                    const CrossOptions& opt = {}) {
  if (!(R > 0.0))
    throw std::invalid_argument("cross_region_integral: need R > 0");
  if (!(gamma >= 0.0 && gamma <= 0.5))
    throw std::invalid_argument("cross_region_integral: gamma out of [0,1/2]");

  const bool is_power = std::holds_alternative<PowerTerm>(term);
  const Kernel* kernel = is_power ? nullptr : &std::get<Kernel>(term);
  const double p_eff =
      is_power ? std::get<PowerTerm>(term).exponent
               : 1.0 + 2.0 * kernel->order_lower();
  const bool cutoff =
      region == CrossRegion::SCutoff || region == CrossRegion::SPlusPlusCutoff;
  const bool positive_quadrant = region == CrossRegion::SPlusPlusCutoff;
  if (region == CrossRegion::SPlusPlusCutoff && is_power)
    throw std::invalid_argument(
        "cross_region_integral: the antisymmetrized region needs a kernel");
  const bool unbounded = region != CrossRegion::SIntersectD;
  if (unbounded && !(p_eff - 2.0 * gamma > 1.0))
    throw std::invalid_argument(
        "cross_region_integral: weight too strong for an unbounded region");

  auto term_at = [&](double x, double y) {
    double base;
    if (is_power) {
      const double e = std::get<PowerTerm>(term).exponent;
      base = (e == 0.0) ? 1.0 : std::pow(std::abs(x - y), -e);
    } else if (positive_quadrant) {
      base = (*kernel)(x - y) - (*kernel)(x + y);
    } else {
      base = (*kernel)(x - y);
    }
    if (cutoff) {
      const double m = std::min(1.0, std::abs(x - y) / R);
      base *= m * m;
    }
    const double w = (gamma == 0.0) ? 1.0 : std::pow(std::abs(x), 2.0 * gamma);
    return w * base;
  };

  // Truncation radii from the power-law majorant of the integrand tails.
  const double y_exp = p_eff - 1.0;  // decay of the inner-tail mass
  const double x_exp = p_eff - 2.0 * gamma - 1.0;
  const double Ymax =
      2.0 * R + R * std::max(opt.min_trunc,
                             std::pow(opt.tail_rel, -1.0 / std::max(y_exp, 0.25)));
  const double Xmax =
      unbounded ? 2.0 * R + R * std::max(opt.min_trunc,
                                         std::pow(opt.tail_rel,
                                                  -1.0 / std::max(x_exp, 0.25)))
                : 6.0 * R;

  const double rtol_in = opt.rtol * 0.05;
  const double rtol_out = opt.rtol * 0.2;

  // y-intervals of the region slice at fixed x (before sign clipping).
  auto slice = [&](double x) {
    using setdetail::Iv;
    std::vector<Iv> s;
    const double ax = std::abs(x);
    const double ylo = positive_quadrant ? 0.0 : -Ymax;
    if (ax < 2.0 * R) {  // B1: |y| >= R
      setdetail::push_clip(s, R, Ymax, ylo, Ymax);
      setdetail::push_clip(s, -Ymax, -R, ylo, Ymax);
    }
    if (ax >= 2.0 * R)  // B2: |y| < 2R
      setdetail::push_clip(s, -2.0 * R, 2.0 * R, ylo, Ymax);
    if (ax >= R && ax < 2.0 * R)  // B3: |y| < R
      setdetail::push_clip(s, -R, R, ylo, Ymax);

    std::vector<Iv> out;
    for (const Iv& iv : s) {
      switch (region) {
        case CrossRegion::SIntersectD:
          setdetail::push_clip(out, iv.a, iv.b, x - 4.0 * R, x + 4.0 * R);
          break;
        case CrossRegion::SMinusD:
          setdetail::push_clip(out, iv.a, iv.b, -Ymax, x - 4.0 * R);
          setdetail::push_clip(out, iv.a, iv.b, x + 4.0 * R, Ymax);
          break;
        default:
          out.push_back(iv);
      }
    }
    return out;
  };

  auto inner = [&](double x) {
    double total = 0.0;
    for (const auto& iv : slice(x)) {
      // Split at the diagonal and at the cutoff kinks so each panel is smooth.
      std::vector<double> cuts{iv.a, iv.b};
      for (double c : {x, x - R, x + R})
        if (c > iv.a && c < iv.b) cuts.push_back(c);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const auto r = integrate_adaptive(
            [&](double y) { return term_at(x, y); }, cuts[i], cuts[i + 1],
            rtol_in, 0.0, 6000);
        total += r.value;
      }
    }
    return total;
  };

  std::vector<double> xb;
  const double x_origin = positive_quadrant ? 0.0 : -Xmax;
  for (double c : {-Xmax, -6.0 * R, -2.0 * R, -R, 0.0, R, 2.0 * R, 6.0 * R, Xmax})
    if (c >= x_origin && c <= Xmax) xb.push_back(c);
  std::sort(xb.begin(), xb.end());
  xb.erase(std::unique(xb.begin(), xb.end()), xb.end());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < xb.size(); ++i) {
    const auto r =
        integrate_adaptive(inner, xb[i], xb[i + 1], rtol_out, 0.0, 600);
    total += r.value;
  }
  return total;
}

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

// Least-squares slope of log(value) against log(R).
inline ScalingFit fit_scaling_exponent(
    const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3)
    throw std::invalid_argument("fit_scaling_exponent: need at least 3 pairs");
  double prev_R = 0.0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [R, v] : pairs) {
    if (!(R > prev_R))
      throw std::invalid_argument("fit_scaling_exponent: R not increasing");
    if (!(v > 0.0))
      throw std::invalid_argument("fit_scaling_exponent: nonpositive value");
    prev_R = R;
    const double lx = std::log(R), ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(pairs.size());
  ScalingFit fit;
  fit.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / n;
  for (const auto& [R, v] : pairs)
    fit.max_residual =
        std::max(fit.max_residual,
                 std::abs(std::log(v) - fit.intercept - fit.slope * std::log(R)));
  return fit;
}

}  // namespace nonloc1d

#endif  // NONLOC1D_SETGEOM_HPP
