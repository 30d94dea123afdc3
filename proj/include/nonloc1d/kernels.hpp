#ifndef NONLOC1D_KERNELS_HPP
#define NONLOC1D_KERNELS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace nonloc1d {

using json = nlohmann::json;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Constant c making c*|z|^{-1-2s} the kernel of the operator with Fourier
// symbol |xi|^{2s} in one dimension:
//   c_{1,s} = 4^s * s * Gamma(s + 1/2) / (sqrt(pi) * Gamma(1 - s)).
// At s = 1/2 this is 1/pi.
inline double fractional_constant(double s) {
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("fractional_constant: s out of (0,1)");
  return std::pow(4.0, s) * s * std::tgamma(s + 0.5) /
         (std::sqrt(std::numbers::pi) * std::tgamma(1.0 - s));
}

// Two-sided power bound record: lambda*|z|^{-1-2s} <= K(z) <= Lambda*|z|^{-1-2s}.
struct EllipticityTwoSided {
  double lambda = 1.0;
  double Lambda = 1.0;
  double s = 0.5;
};

// Upper bound with possibly different order at origin and infinity:
//   K(z) <= Lambda1*|z|^{-1-2s_lower} + Lambda2*|z|^{-1-2s_upper}.
struct EllipticityUpper {
  double Lambda1 = 1.0;
  double Lambda2 = 1.0;
  double s_lower = 0.5;
  double s_upper = 0.5;
};

using EllipticityClaim = std::variant<EllipticityTwoSided, EllipticityUpper>;

enum class KernelKind { fractional, mixture, tabulated };

namespace detail {

// Closed-form antiderivatives of pure powers z^q over 0 < a < b <= inf.
inline double power_integral(double q, double a, double b) {
  if (q == -1.0) {
    if (b == kInf) return kInf;
    return std::log(b / a);
  }
  const double e = q + 1.0;
  const double vb = (b == kInf) ? (e < 0.0 ? 0.0 : kInf) : std::pow(b, e);
  const double va = (a == 0.0) ? (e > 0.0 ? 0.0 : kInf) : std::pow(a, e);
  return (vb - va) / e;
}

}  // namespace detail

// Symmetric positive kernel on the line, of order within a declared window
// in (0,1). Three concrete families are supported:
//   fractional  K(z) = c * |z|^{-1-2s}
//   mixture     K(z) = sum_i w_i * c_i * |z|^{-1-2s_i}
//   tabulated   log K piecewise linear in log|z| between knots, extended by
//               the declared power laws outside the table (each table
//               interval is itself an exact power law, so all integrals
//               below stay closed-form).
class Kernel {
 public:
  struct Atom {
    double s;
    double weight;
    double coeff;  // weight times the per-atom normalization constant
  };

  Kernel() = default;

  KernelKind kind() const { return kind_; }
  double order_lower() const { return s_lower_; }
  double order_upper() const { return s_upper_; }
  bool monotone() const { return monotone_; }
  bool normalized() const { return normalized_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<EllipticityTwoSided>& two_sided_record() const {
    return two_sided_;
  }
  const std::optional<EllipticityUpper>& upper_record() const {
    return upper_;
  }

  double operator()(double z) const {
    const double az = std::abs(z);
    if (az == 0.0)
      throw std::domain_error("Kernel: evaluation at the singular point z=0");
    if (kind_ != KernelKind::tabulated) {
      double v = 0.0;
      for (const auto& a : atoms_) v += a.coeff * std::pow(az, -1.0 - 2.0 * a.s);
      return v;
    }
    return tabulated_value(az);
  }

  // \int_a^b K(z) dz over 0 < a < b <= inf.
  double integrate(double a, double b) const { return moment(0, a, b); }
  // \int_a^b z K(z) dz.
  double first_moment(double a, double b) const { return moment(1, a, b); }
  // \int_a^b z^2 K(z) dz, a >= 0 allowed (integrable for orders < 1).
  double second_moment(double a, double b) const { return moment(2, a, b); }

  json to_json() const {
    json j;
    switch (kind_) {
      case KernelKind::fractional:
        j["kind"] = "fractional";
        j["s"] = atoms_[0].s;
        break;
      case KernelKind::mixture: {
        j["kind"] = "mixture";
        json arr = json::array();
        for (const auto& a : atoms_) arr.push_back({{"s", a.s}, {"w", a.weight}});
        j["atoms"] = arr;
        break;
      }
      case KernelKind::tabulated: {
        j["kind"] = "tabulated";
        json zs = json::array(), ks = json::array();
        for (std::size_t i = 0; i < log_z_.size(); ++i) {
          zs.push_back(std::exp(log_z_[i]));
          ks.push_back(std::exp(log_k_[i]));
        }
        j["z"] = zs;
        j["K"] = ks;
        j["s_lower"] = s_lower_;
        j["s_upper"] = s_upper_;
        break;
      }
    }
    j["normalized"] = normalized_;
    j["monotone"] = monotone_;
    return j;
  }

  static Kernel from_json(const json& j);

 private:
  friend Kernel make_fractional_kernel(double, bool);
  friend Kernel make_mixture_kernel(const std::vector<std::pair<double, double>>&,
                                    bool);
  friend Kernel make_tabulated_kernel(const std::vector<double>&,
                                      const std::vector<double>&, double,
                                      double);

  double tabulated_value(double az) const {
    const double lz = std::log(az);
    if (lz <= log_z_.front())
      return std::exp(log_k_.front() - (1.0 + 2.0 * s_upper_) * (lz - log_z_.front()));
    if (lz >= log_z_.back())
      return std::exp(log_k_.back() - (1.0 + 2.0 * s_lower_) * (lz - log_z_.back()));
    auto it = std::upper_bound(log_z_.begin(), log_z_.end(), lz);
    const std::size_t i = static_cast<std::size_t>(it - log_z_.begin()) - 1;
    const double t = (lz - log_z_[i]) / (log_z_[i + 1] - log_z_[i]);
    return std::exp(log_k_[i] + t * (log_k_[i + 1] - log_k_[i]));
  }

  // \int_a^b z^m K(z) dz assembled from exact power-law pieces.
  double moment(int m, double a, double b) const {
    if (!(a >= 0.0) || !(b > a))
      throw std::invalid_argument("Kernel::moment: need 0 <= a < b");
    if (a == 0.0 && m < 2)
      throw std::invalid_argument("Kernel::moment: integral diverges at 0");
    if (kind_ != KernelKind::tabulated) {
      double v = 0.0;
      for (const auto& at : atoms_)
        v += at.coeff * detail::power_integral(m - 1.0 - 2.0 * at.s, a, b);
      return v;
    }
    // Piecewise power law: knots plus the two extension rays.
    double total = 0.0;
    auto piece = [&](double z0, double z1, double q, double coeff) {
      const double lo = std::max(a, z0);
      const double hi = std::min(b, z1);
      if (lo < hi) total += coeff * detail::power_integral(q + m, lo, hi);
    };
    const double zf = std::exp(log_z_.front());
    const double zb = std::exp(log_z_.back());
    // Inner ray: K = Kf * (z/zf)^{-1-2s_upper}.
    piece(0.0, zf, -1.0 - 2.0 * s_upper_,
          std::exp(log_k_.front()) * std::pow(zf, 1.0 + 2.0 * s_upper_));
    for (std::size_t i = 0; i + 1 < log_z_.size(); ++i) {
      const double q =
          (log_k_[i + 1] - log_k_[i]) / (log_z_[i + 1] - log_z_[i]);
      const double coeff = std::exp(log_k_[i] - q * log_z_[i]);
      piece(std::exp(log_z_[i]), std::exp(log_z_[i + 1]), q, coeff);
    }
    piece(zb, kInf, -1.0 - 2.0 * s_lower_,
          std::exp(log_k_.back()) * std::pow(zb, 1.0 + 2.0 * s_lower_));
    return total;
  }

  KernelKind kind_ = KernelKind::fractional;
  double s_lower_ = 0.5, s_upper_ = 0.5;
  bool normalized_ = false, monotone_ = true;
  std::vector<Atom> atoms_;
  std::vector<double> log_z_, log_k_;
  std::optional<EllipticityTwoSided> two_sided_;
  std::optional<EllipticityUpper> upper_;
};

inline Kernel make_fractional_kernel(double s, bool normalized = true) {
  if (!(s > 0.0 && s < 1.0))
    throw std::invalid_argument("make_fractional_kernel: s out of (0,1)");
  Kernel k;
  k.kind_ = KernelKind::fractional;
  k.s_lower_ = k.s_upper_ = s;
  k.normalized_ = normalized;
  k.monotone_ = true;
  const double c = normalized ? fractional_constant(s) : 1.0;
  k.atoms_.push_back({s, 1.0, c});
  k.two_sided_ = EllipticityTwoSided{c, c, s};
  return k;
}

// atoms: (s_i, weight_i) with s_i in [1/2,1), weight_i > 0.
inline Kernel make_mixture_kernel(
    const std::vector<std::pair<double, double>>& atoms, bool normalized = false) {
  if (atoms.empty())
    throw std::invalid_argument("make_mixture_kernel: empty atom list");
  Kernel k;
  k.kind_ = KernelKind::mixture;
  k.normalized_ = normalized;
  k.monotone_ = true;
  double s_lo = 1.0, s_hi = 0.0, wsum = 0.0, csum = 0.0;
  for (const auto& [s, w] : atoms) {
    if (!(s >= 0.5 && s < 1.0))
      throw std::invalid_argument("make_mixture_kernel: atom order out of [1/2,1)");
    if (!(w > 0.0))
      throw std::invalid_argument("make_mixture_kernel: nonpositive weight");
    const double c = w * (normalized ? fractional_constant(s) : 1.0);
    k.atoms_.push_back({s, w, c});
    s_lo = std::min(s_lo, s);
    s_hi = std::max(s_hi, s);
    wsum += w;
    csum += c;
  }
  (void)wsum;
  k.s_lower_ = s_lo;
  k.s_upper_ = s_hi;
  k.upper_ = EllipticityUpper{csum, csum, s_lo, s_hi};
  if (atoms.size() == 1)
    k.two_sided_ = EllipticityTwoSided{csum, csum, s_lo};
  return k;
}

// Positive samples (z_i, K_i) with strictly increasing z_i; the declared
// window (s_lower, s_upper) fixes the extension power laws.
inline Kernel make_tabulated_kernel(const std::vector<double>& z,
                                    const std::vector<double>& K,
                                    double s_lower, double s_upper) {
  if (z.size() != K.size() || z.size() < 2)
    throw std::invalid_argument("make_tabulated_kernel: need >= 2 samples");
  if (!(s_lower > 0.0 && s_lower <= s_upper && s_upper < 1.0))
    throw std::invalid_argument("make_tabulated_kernel: bad order window");
  Kernel k;
  k.kind_ = KernelKind::tabulated;
  k.s_lower_ = s_lower;
  k.s_upper_ = s_upper;
  k.normalized_ = false;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i] > 0.0 && K[i] > 0.0))
      throw std::invalid_argument("make_tabulated_kernel: nonpositive sample");
    if (i > 0 && !(z[i] > z[i - 1]))
      throw std::invalid_argument("make_tabulated_kernel: z not increasing");
    k.log_z_.push_back(std::log(z[i]));
    k.log_k_.push_back(std::log(K[i]));
  }
  bool mono = true;
  for (std::size_t i = 0; i + 1 < K.size(); ++i)
    if (K[i + 1] > K[i]) mono = false;
  k.monotone_ = mono;
  return k;
}

inline Kernel Kernel::from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const bool normalized = j.value("normalized", false);
  if (kind == "fractional")
    return make_fractional_kernel(j.at("s").get<double>(), normalized);
  if (kind == "mixture") {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : j.at("atoms"))
      atoms.emplace_back(a.at("s").get<double>(), a.at("w").get<double>());
    return make_mixture_kernel(atoms, normalized);
  }
  if (kind == "tabulated")
    return make_tabulated_kernel(j.at("z").get<std::vector<double>>(),
                                 j.at("K").get<std::vector<double>>(),
                                 j.at("s_lower").get<double>(),
                                 j.at("s_upper").get<double>());
  throw std::invalid_argument("Kernel::from_json: unknown kind '" + kind + "'");
}

// K(x-y) - K(x+y) for x, y > 0. Nonnegative whenever K is nonincreasing on
// (0,inf), since |x-y| <= x+y.
inline double antisymmetrized_value(const Kernel& k, double x, double y) {
  if (!(x > 0.0 && y > 0.0))
    throw std::invalid_argument("antisymmetrized_value: need x, y > 0");
  if (x == y)
    throw std::domain_error("antisymmetrized_value: singular at x == y");
  return k(x - y) - k(x + y);
}

// \int_x^infty K(z) dz, x > 0.
inline double tail_mass(const Kernel& k, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("tail_mass: need x > 0");
  return k.integrate(x, kInf);
}

struct BoundReport {
  bool pass = false;
  bool lower_ok = true;
  bool upper_ok = true;
  // Extremal ratios over the sample set. For a two-sided claim these are
  // min K(z)|z|^{1+2s}/lambda and max K(z)|z|^{1+2s}/Lambda; for an upper
  // claim only the upper ratio max K(z)/bound(z) is meaningful.
  double worst_lower_ratio = kInf;
  double worst_upper_ratio = 0.0;
  double witness_lower = 0.0;
  double witness_upper = 0.0;

  json to_json() const {
    return json{{"pass", pass},
                {"lower_ok", lower_ok},
                {"upper_ok", upper_ok},
                {"worst_lower_ratio",
                 worst_lower_ratio == kInf ? json() : json(worst_lower_ratio)},
                {"worst_upper_ratio", worst_upper_ratio},
                {"witness_lower", witness_lower},
                {"witness_upper", witness_upper}};
  }
};

// Deterministic log-spaced check of a claimed ellipticity record over
// z in [1e-6, 1e6]; samples_per_decade >= 1 (default 200).
inline BoundReport verify_kernel_bounds(const Kernel& k,
                                        const EllipticityClaim& claim,
                                        int samples_per_decade = 200) {
  if (samples_per_decade < 1)
    throw std::invalid_argument("verify_kernel_bounds: need samples >= 1");
  BoundReport rep;
  const double lo = -6.0, hi = 6.0;
  const int n = static_cast<int>((hi - lo) * samples_per_decade);
  for (int i = 0; i <= n; ++i) {
    const double z = std::pow(10.0, lo + (hi - lo) * i / n);
    const double kz = k(z);
    if (std::holds_alternative<EllipticityTwoSided>(claim)) {
      const auto& c = std::get<EllipticityTwoSided>(claim);
      const double scaled = kz * std::pow(z, 1.0 + 2.0 * c.s);
      const double rl = scaled / c.lambda;
      const double ru = scaled / c.Lambda;
      if (rl < rep.worst_lower_ratio) {
        rep.worst_lower_ratio = rl;
        rep.witness_lower = z;
      }
      if (ru > rep.worst_upper_ratio) {
        rep.worst_upper_ratio = ru;
        rep.witness_upper = z;
      }
    } else {
      const auto& c = std::get<EllipticityUpper>(claim);
      const double bound = c.Lambda1 * std::pow(z, -1.0 - 2.0 * c.s_lower) +
                           c.Lambda2 * std::pow(z, -1.0 - 2.0 * c.s_upper);
      const double ru = kz / bound;
      if (ru > rep.worst_upper_ratio) {
        rep.worst_upper_ratio = ru;
        rep.witness_upper = z;
      }
    }
  }
  const double tol = 1.0 + 1e-12;
  if (std::holds_alternative<EllipticityTwoSided>(claim)) {
    rep.lower_ok = rep.worst_lower_ratio >= 1.0 / tol;
    rep.upper_ok = rep.worst_upper_ratio <= tol;
  } else {
    rep.worst_lower_ratio = kInf;
    rep.upper_ok = rep.worst_upper_ratio <= tol;
  }
  rep.pass = rep.lower_ok && rep.upper_ok;
  return rep;
}

}  // namespace nonloc1d

#endif  // NONLOC1D_KERNELS_HPP
