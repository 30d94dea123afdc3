#ifndef NONLOC1D_POTENTIAL_HPP
#define NONLOC1D_POTENTIAL_HPP

#include <cmath>
#include <optional>
#include <stdexcept>

#include "nonloc1d/grid.hpp"

namespace nonloc1d {

// c(x) <= -c0 < 0 outside [-R0, R0].
struct NegativityRecord {
  double c0 = 0.0;
  double R0 = 0.0;
};

// Zeroth-order coefficient with its recorded structural assumptions. The
// smoothness exponent beta0 is declared, never verified; the negativity
// record is checked against the grid values at construction.
struct PotentialSpec {
  GridFunction values;
  bool even = false;
  std::optional<NegativityRecord> negativity;
  double beta0 = 0.0;  // declared Hoelder record
  double r0 = 0.0;     // inner radius for half-line certificates; 0 = unset

  double operator[](int i) const { return values[i]; }
  const Grid1D& grid() const { return values.grid; }

  double sup_norm() const { return values.sup_norm(); }

  void validate() const {
    if (even) {
      const int n = values.grid.size();
      const double scale = values.sup_norm() + 1e-300;
      for (int i = 0; i < n; ++i)
        if (std::abs(values[i] - values[n - 1 - i]) > 1e-10 * scale)
          throw std::invalid_argument("PotentialSpec: even flag but asymmetric values");
    }
    if (negativity) {
      if (!(negativity->c0 > 0.0 && negativity->R0 > 0.0))
        throw std::invalid_argument("PotentialSpec: bad negativity record");
      for (int i = 0; i < values.grid.size(); ++i) {
        const double x = values.grid.node(i);
        if (std::abs(x) > negativity->R0 &&
            values[i] > -negativity->c0 + 1e-12)
          throw std::invalid_argument(
              "PotentialSpec: negativity record violated on the grid");
      }
    }
    if (r0 < 0.0) throw std::invalid_argument("PotentialSpec: r0 < 0");
  }
};

inline PotentialSpec make_potential(GridFunction c, bool even,
                                    std::optional<NegativityRecord> rec = {},
                                    double beta0 = 0.0, double r0 = 0.0) {
  PotentialSpec p;
  p.values = std::move(c);
  p.even = even;
  p.negativity = rec;
  p.beta0 = beta0;
  p.r0 = r0;
  p.validate();
  return p;
}

// Derives a negativity record from the grid values: c0 is half the edge
// negativity and R0 the smallest node radius beyond which c <= -c0 holds.
inline std::optional<NegativityRecord> auto_negativity(const GridFunction& c) {
  const int n = c.grid.size();
  const double edge = std::max(c[0], c[n - 1]);
  if (!(edge < 0.0)) return std::nullopt;
  const double c0 = -0.5 * edge;
  double R0 = 0.0;
  for (int i = 0; i < n; ++i)
    if (c[i] > -c0) R0 = std::max(R0, std::abs(c.grid.node(i)));
  R0 += c.grid.h;  // strictly outside the last violation
  if (R0 >= c.grid.X) return std::nullopt;
  return NegativityRecord{c0, R0};
}

}  // namespace nonloc1d

#endif  // NONLOC1D_POTENTIAL_HPP
