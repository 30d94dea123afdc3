#ifndef NONLOC1D_GRID_HPP
#define NONLOC1D_GRID_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace nonloc1d {

using json = nlohmann::json;

// Symmetric uniform grid x_i = (i - M) h, i = 0..2M, so 0 is always a node
// and nodes come in +/- pairs.
struct Grid1D {
  double X = 1.0;  // half-width, X = M h
  double h = 0.1;
  int M = 10;

  static Grid1D make(double X, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("Grid1D: need h > 0");
    if (!(X >= 1.0)) throw std::invalid_argument("Grid1D: need X >= 1");
    const double ratio = X / h;
    const int M = static_cast<int>(std::llround(ratio));
    if (std::abs(ratio - M) > 1e-9 * std::max(1.0, ratio))
      throw std::invalid_argument("Grid1D: X must be an integer multiple of h");
    Grid1D g;
    g.X = M * h;
    g.h = h;
    g.M = M;
    return g;
  }

  int size() const { return 2 * M + 1; }
  double node(int i) const { return (i - M) * h; }
  int center() const { return M; }
  // Cells [x_i - h/2, x_i + h/2] tile [-boundary, boundary].
  double boundary() const { return X + 0.5 * h; }
  int index_of(double x) const {
    const int i = static_cast<int>(std::llround(x / h)) + M;
    if (i < 0 || i >= size() || std::abs(node(i) - x) > 1e-9 * std::max(1.0, X))
      throw std::invalid_argument("Grid1D: x is not a node");
    return i;
  }
  bool same_as(const Grid1D& o) const {
    return M == o.M && std::abs(h - o.h) < 1e-15 + 1e-12 * h;
  }
};

enum class TailKind { zero, constant, algebraic };

// Far-field model used beyond the grid:
//   x > X:  phi(x) ~ ell_plus  + amp_plus  * x^{-p}
//   x < -X: phi(x) ~ ell_minus + amp_minus * |x|^{-p}
// Amplitudes are signed; odd data has amp_minus = -amp_plus, even data
// amp_minus = amp_plus.
struct TailModel {
  TailKind kind = TailKind::zero;
  double ell_minus = 0.0, ell_plus = 0.0;
  double amp_minus = 0.0, amp_plus = 0.0;
  double p = 1.0;

  static TailModel zero() { return TailModel{}; }
  static TailModel constant(double lm, double lp) {
    return TailModel{TailKind::constant, lm, lp, 0.0, 0.0, 1.0};
  }
  static TailModel algebraic(double lm, double lp, double am, double ap,
                             double decay) {
    if (!(decay > 0.0)) throw std::invalid_argument("TailModel: need p > 0");
    return TailModel{TailKind::algebraic, lm, lp, am, ap, decay};
  }

  double value(double x) const {
    switch (kind) {
      case TailKind::zero:
        return 0.0;
      case TailKind::constant:
        return x >= 0.0 ? ell_plus : ell_minus;
      case TailKind::algebraic: {
        const double corr = std::pow(std::abs(x), -p);
        return x >= 0.0 ? ell_plus + amp_plus * corr
                        : ell_minus + amp_minus * corr;
      }
    }
    return 0.0;
  }

  json to_json() const {
    const char* k = kind == TailKind::zero      ? "zero"
                    : kind == TailKind::constant ? "constant"
                                                 : "algebraic";
    return json{{"kind", k},          {"ell_minus", ell_minus},
                {"ell_plus", ell_plus}, {"amp_minus", amp_minus},
                {"amp_plus", amp_plus}, {"p", p}};
  }
  static TailModel from_json(const json& j) {
    const std::string k = j.at("kind").get<std::string>();
    TailModel t;
    t.kind = k == "zero"      ? TailKind::zero
             : k == "constant" ? TailKind::constant
                               : TailKind::algebraic;
    t.ell_minus = j.value("ell_minus", 0.0);
    t.ell_plus = j.value("ell_plus", 0.0);
    t.amp_minus = j.value("amp_minus", 0.0);
    t.amp_plus = j.value("amp_plus", 0.0);
    t.p = j.value("p", 1.0);
    return t;
  }
};

enum class Symmetry { none, odd, even };

inline const char* to_string(Symmetry s) {
  switch (s) {
    case Symmetry::none: return "none";
    case Symmetry::odd: return "odd";
    case Symmetry::even: return "even";
  }
  return "none";
}

struct GridFunction {
  Grid1D grid;
  std::vector<double> values;
  TailModel tail;
  Symmetry sym = Symmetry::none;

  GridFunction() = default;
  GridFunction(Grid1D g, TailModel t = TailModel::zero(),
               Symmetry s = Symmetry::none)
      : grid(g), values(static_cast<std::size_t>(g.size()), 0.0), tail(t),
        sym(s) {}

  template <class F>
  static GridFunction sample(Grid1D g, const F& f,
                             TailModel t = TailModel::zero(),
                             Symmetry s = Symmetry::none) {
    GridFunction gf(g, t, s);
    for (int i = 0; i < g.size(); ++i) gf.values[i] = f(g.node(i));
    return gf;
  }

  double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

  // Node value inside the grid, tail model outside.
  double value_beyond(double x) const { return tail.value(x); }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  // sup |values| over nodes with a <= x_i <= b.
  double sup_norm_on(double a, double b) const {
    double m = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
      const double x = grid.node(i);
      if (x >= a && x <= b) m = std::max(m, std::abs(values[i]));
    }
    return m;
  }

  // Enforces the declared symmetry invariants; throws on violation.
  void validate(double rel = 1e-12) const {
    if (static_cast<int>(values.size()) != grid.size())
      throw std::invalid_argument("GridFunction: size mismatch");
    const double scale = sup_norm() + 1e-300;
    if (sym == Symmetry::odd) {
      if (std::abs(values[grid.center()]) > rel * scale)
        throw std::invalid_argument("GridFunction: odd data with value(0) != 0");
      for (int i = 0; i < grid.size(); ++i)
        if (std::abs(values[i] + values[grid.size() - 1 - i]) > rel * scale)
          throw std::invalid_argument("GridFunction: odd data not antisymmetric");
      if (std::abs(tail.ell_minus + tail.ell_plus) > rel * (std::abs(tail.ell_plus) + 1.0) ||
          std::abs(tail.amp_minus + tail.amp_plus) > rel * (std::abs(tail.amp_plus) + 1.0))
        throw std::invalid_argument("GridFunction: odd data with non-odd tail");
    } else if (sym == Symmetry::even) {
      for (int i = 0; i < grid.size(); ++i)
        if (std::abs(values[i] - values[grid.size() - 1 - i]) > rel * scale)
          throw std::invalid_argument("GridFunction: even data not symmetric");
      if (std::abs(tail.ell_minus - tail.ell_plus) > rel * (std::abs(tail.ell_plus) + 1.0) ||
          std::abs(tail.amp_minus - tail.amp_plus) > rel * (std::abs(tail.amp_plus) + 1.0))
        throw std::invalid_argument("GridFunction: even data with non-even tail");
    }
  }
};

// Least-squares fit of the tail amplitude over the outer 10% of nodes,
// holding the limits and decay exponent fixed. For odd/layer data the two
// sides are fitted jointly with the odd sign convention; for even data with
// the even convention; otherwise each side is fitted on its own.
inline void fit_tail_amplitude(GridFunction& f, double ell_minus,
                               double ell_plus, double p) {
  const Grid1D& g = f.grid;
  const int n_outer = std::max(2, g.M / 10);
  double num_r = 0.0, den_r = 0.0, num_l = 0.0, den_l = 0.0;
  for (int k = 0; k < n_outer; ++k) {
    const int ir = g.size() - 1 - k;
    const int il = k;
    const double xr = g.node(ir);
    const double xl = std::abs(g.node(il));
    const double br = std::pow(xr, -p);
    const double bl = std::pow(xl, -p);
    num_r += br * (f[ir] - ell_plus);
    den_r += br * br;
    num_l += bl * (f[il] - ell_minus);
    den_l += bl * bl;
  }
  double ar = num_r / den_r;
  double al = num_l / den_l;
  if (f.sym == Symmetry::odd) {
    const double a = 0.5 * (ar - al);
    ar = a;
    al = -a;
  } else if (f.sym == Symmetry::even) {
    const double a = 0.5 * (ar + al);
    ar = a;
    al = a;
  }
  f.tail = TailModel::algebraic(ell_minus, ell_plus, al, ar, p);
}

// Centered first differences; one-sided ends use the tail model for the
// ghost values so slopes stay meaningful at the edge.
inline std::vector<double> centered_slopes(const GridFunction& f) {
  const Grid1D& g = f.grid;
  std::vector<double> s(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    const double up = (i + 1 < g.size()) ? f[i + 1] : f.tail.value(g.X + g.h);
    const double dn = (i - 1 >= 0) ? f[i - 1] : f.tail.value(-g.X - g.h);
    s[static_cast<std::size_t>(i)] = (up - dn) / (2.0 * g.h);
  }
  return s;
}

inline void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << "x,value\n";
  char buf[64];
  for (int i = 0; i < f.grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", f.grid.node(i), f[i]);
    out << buf;
  }
}

inline json sidecar_json(const GridFunction& f) {
  return json{{"grid", {{"X", f.grid.X}, {"h", f.grid.h}}},
              {"tail", f.tail.to_json()},
              {"symmetry", to_string(f.sym)}};
}

inline GridFunction read_csv(const std::string& path, const json& sidecar) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,value", 0) != 0)
    throw std::runtime_error("read_csv: missing 'x,value' header in " + path);
  std::vector<double> xs, vs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 3 || xs.size() % 2 == 0)
    throw std::runtime_error("read_csv: expected an odd number of nodes");
  const double h = xs[1] - xs[0];
  Grid1D g = Grid1D::make(-xs.front(), h);
  GridFunction f(g);
  if (static_cast<std::size_t>(g.size()) != vs.size())
    throw std::runtime_error("read_csv: node count mismatch");
  f.values = vs;
  f.tail = TailModel::from_json(sidecar.at("tail"));
  const std::string s = sidecar.at("symmetry").get<std::string>();
  f.sym = s == "odd" ? Symmetry::odd : s == "even" ? Symmetry::even : Symmetry::none;
  return f;
}

}  // namespace nonloc1d

#endif  // NONLOC1D_GRID_HPP
