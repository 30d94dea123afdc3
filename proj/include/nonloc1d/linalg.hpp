#ifndef NONLOC1D_LINALG_HPP
#define NONLOC1D_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace nonloc1d {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }
inline void axpy(double alpha, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}
inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------
// FFT (iterative radix-2) and FFT-based linear convolution.

inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_inplace: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * 3.141592653589793238462643383279502884 /
                       static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const auto u = a[i + j];
        const auto v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Full linear convolution (size a+b-1).
inline Vec linear_convolution(const Vec& a, const Vec& b) {
  const std::size_t n = a.size() + b.size() - 1;
  const std::size_t L = next_pow2(n);
  std::vector<std::complex<double>> fa(L), fb(L);
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fft_inplace(fa, false);
  fft_inplace(fb, false);
  for (std::size_t i = 0; i < L; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fa[i].real();
  return out;
}

// y_i = sum_j t_{|i-j|} v_j with a cached spectrum of the embedded circulant.
class SymmetricToeplitz {
 public:
  SymmetricToeplitz() = default;
  explicit SymmetricToeplitz(Vec symbol) : n_(symbol.size()) {
    const std::size_t L = next_pow2(2 * n_);
    spec_.assign(L, {0.0, 0.0});
    for (std::size_t i = 0; i < n_; ++i) spec_[i] = symbol[i];
    for (std::size_t i = 1; i < n_; ++i) spec_[L - i] = symbol[i];
    fft_inplace(spec_, false);
  }

  std::size_t size() const { return n_; }

  void apply(const Vec& v, Vec& y) const {
    const std::size_t L = spec_.size();
    std::vector<std::complex<double>> fv(L, {0.0, 0.0});
    for (std::size_t i = 0; i < n_; ++i) fv[i] = v[i];
    fft_inplace(fv, false);
    for (std::size_t i = 0; i < L; ++i) fv[i] *= spec_[i];
    fft_inplace(fv, true);
    y.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) y[i] = fv[i].real();
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::complex<double>> spec_;
};

// ---------------------------------------------------------------------------
// Tridiagonal systems (Thomas).

struct Tridiagonal {
  Vec lower, diag, upper;  // lower[0] and upper[n-1] unused

  void solve(const Vec& rhs, Vec& x) const {
    const std::size_t n = diag.size();
    Vec c(n), d(n);
    x.resize(n);
    double beta = diag[0];
    if (beta == 0.0) throw std::runtime_error("Tridiagonal: zero pivot");
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
      beta = diag[i] - lower[i] * c[i - 1];
      if (beta == 0.0) throw std::runtime_error("Tridiagonal: zero pivot");
      c[i] = (i + 1 < n) ? upper[i] / beta : 0.0;
      d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
  }
};

// ---------------------------------------------------------------------------
// GMRES with optional left preconditioning (restarted).

struct GmresOptions {
  int restart = 120;
  int max_iters = 2000;
  double rtol = 1e-10;
};

struct GmresStats {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

using LinOp = std::function<void(const Vec&, Vec&)>;

inline GmresStats gmres(const LinOp& A, const Vec& b, Vec& x,
                        const GmresOptions& opt = {},
                        const LinOp& precond = nullptr) {
  const std::size_t n = b.size();
  if (x.size() != n) x.assign(n, 0.0);
  auto apply_M = [&](const Vec& v, Vec& out) {
    if (precond)
      precond(v, out);
    else
      out = v;
  };

  GmresStats stats;
  Vec r(n), w(n), tmp(n);
  const int m = opt.restart;
  std::vector<Vec> V(static_cast<std::size_t>(m) + 1, Vec(n));
  std::vector<Vec> H(static_cast<std::size_t>(m) + 1,
                     Vec(static_cast<std::size_t>(m), 0.0));
  Vec cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m)),
      g(static_cast<std::size_t>(m) + 1);

  apply_M(b, tmp);
  const double b_norm = std::max(norm2(tmp), 1e-300);

  while (stats.iterations < opt.max_iters) {
    A(x, w);
    for (std::size_t i = 0; i < n; ++i) w[i] = b[i] - w[i];
    apply_M(w, r);
    double beta = norm2(r);
    stats.residual = beta / b_norm;
    if (stats.residual <= opt.rtol) {
      stats.converged = true;
      return stats;
    }
    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && stats.iterations < opt.max_iters; ++k) {
      ++stats.iterations;
      A(V[static_cast<std::size_t>(k)], tmp);
      apply_M(tmp, w);
      for (int i = 0; i <= k; ++i) {
        const double hik = dot(w, V[static_cast<std::size_t>(i)]);
        H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = hik;
        axpy(-hik, V[static_cast<std::size_t>(i)], w);
      }
      const double hk1 = norm2(w);
      H[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(k)] = hk1;
      if (hk1 > 0.0)
        for (std::size_t i = 0; i < n; ++i)
          V[static_cast<std::size_t>(k) + 1][i] = w[i] / hk1;
      // Apply accumulated Givens rotations, then form a new one.
      for (int i = 0; i < k; ++i) {
        const double t1 = H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        const double t2 =
            H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)];
        H[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
            cs[static_cast<std::size_t>(i)] * t1 + sn[static_cast<std::size_t>(i)] * t2;
        H[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(k)] =
            -sn[static_cast<std::size_t>(i)] * t1 + cs[static_cast<std::size_t>(i)] * t2;
      }
      const double t1 = H[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)];
      const double t2 = H[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(k)];
      const double rho = std::hypot(t1, t2);
      cs[static_cast<std::size_t>(k)] = (rho == 0.0) ? 1.0 : t1 / rho;
      sn[static_cast<std::size_t>(k)] = (rho == 0.0) ? 0.0 : t2 / rho;
      H[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = rho;
      H[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(k)] = 0.0;
      g[static_cast<std::size_t>(k) + 1] = -sn[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      g[static_cast<std::size_t>(k)] = cs[static_cast<std::size_t>(k)] * g[static_cast<std::size_t>(k)];
      stats.residual = std::abs(g[static_cast<std::size_t>(k) + 1]) / b_norm;
      if (stats.residual <= opt.rtol) {
        ++k;
        break;
      }
    }
    // Back-substitution and solution update.
    Vec y(static_cast<std::size_t>(k), 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        s -= H[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
             y[static_cast<std::size_t>(j)];
      y[static_cast<std::size_t>(i)] =
          s / H[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < k; ++i)
      axpy(y[static_cast<std::size_t>(i)], V[static_cast<std::size_t>(i)], x);
    if (stats.residual <= opt.rtol) {
      stats.converged = true;
      return stats;
    }
  }
  return stats;
}

// ---------------------------------------------------------------------------
// Symmetric tridiagonal eigensolver (implicit QL with Wilkinson shifts).
// d: diagonal, e: off-diagonal (e[0] unused). On return d holds eigenvalues
// (ascending) and z columns the eigenvectors if z is non-null.

inline void tridiag_eigen(Vec& d, Vec& e, std::vector<Vec>* z) {
  const int n = static_cast<int>(d.size());
  if (z) {
    z->assign(static_cast<std::size_t>(n), Vec(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
      (*z)[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  }
  for (int i = 1; i < n; ++i) e[static_cast<std::size_t>(i - 1)] = e[static_cast<std::size_t>(i)];
  e[static_cast<std::size_t>(n - 1)] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[static_cast<std::size_t>(m)]) +
                          std::abs(d[static_cast<std::size_t>(m + 1)]);
        if (std::abs(e[static_cast<std::size_t>(m)]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 50)
          throw std::runtime_error("tridiag_eigen: too many iterations");
        double g = (d[static_cast<std::size_t>(l + 1)] - d[static_cast<std::size_t>(l)]) /
                   (2.0 * e[static_cast<std::size_t>(l)]);
        double r = std::hypot(g, 1.0);
        g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
            e[static_cast<std::size_t>(l)] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[static_cast<std::size_t>(i)];
          const double b = c * e[static_cast<std::size_t>(i)];
          r = std::hypot(f, g);
          e[static_cast<std::size_t>(i + 1)] = r;
          if (r == 0.0) {
            d[static_cast<std::size_t>(i + 1)] -= p;
            e[static_cast<std::size_t>(m)] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[static_cast<std::size_t>(i + 1)] - p;
          r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
          p = s * r;
          d[static_cast<std::size_t>(i + 1)] = g + p;
          g = c * r - b;
          if (z)
            for (int k = 0; k < n; ++k) {
              f = (*z)[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(k)];
              (*z)[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(k)] =
                  s * (*z)[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] + c * f;
              (*z)[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                  c * (*z)[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] - s * f;
            }
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[static_cast<std::size_t>(l)] -= p;
        e[static_cast<std::size_t>(l)] = g;
        e[static_cast<std::size_t>(m)] = 0.0;
      }
    } while (m != l);
  }
  // Sort ascending, permuting eigenvectors accordingly.
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return d[static_cast<std::size_t>(a)] < d[static_cast<std::size_t>(b)];
  });
  Vec ds(static_cast<std::size_t>(n));
  std::vector<Vec> zs;
  if (z) zs.assign(static_cast<std::size_t>(n), Vec());
  for (int i = 0; i < n; ++i) {
    ds[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    if (z) zs[static_cast<std::size_t>(i)] = (*z)[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
  }
  d = ds;
  if (z) *z = zs;
}

// ---------------------------------------------------------------------------
// Lanczos with full reorthogonalization for the bottom of the spectrum of a
// symmetric operator. Returns the k smallest Ritz pairs once their residual
// bounds fall under tol * spectral scale.

struct EigenPairs {
  Vec values;
  std::vector<Vec> vectors;
  bool converged = false;
  int lanczos_steps = 0;
};

inline EigenPairs lanczos_smallest(const LinOp& A, std::size_t n, int k,
                                   double tol = 1e-8, int max_steps = 500,
                                   unsigned seed = 12345) {
  EigenPairs out;
  max_steps = std::min<int>(max_steps, static_cast<int>(n));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<Vec> V;
  V.reserve(static_cast<std::size_t>(max_steps) + 1);
  Vec alpha, beta;  // beta[j] couples v_j and v_{j+1}
  Vec v(n), w(n);
  for (auto& x : v) x = gauss(rng);
  double nv = norm2(v);
  for (auto& x : v) x /= nv;
  V.push_back(v);

  auto reorthogonalize = [&](Vec& u) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : V) axpy(-dot(u, q), q, u);
  };

  int check_every = 20;
  for (int j = 0; j < max_steps; ++j) {
    A(V.back(), w);
    const double a = dot(w, V.back());
    alpha.push_back(a);
    axpy(-a, V.back(), w);
    if (j > 0) axpy(-beta.back(), V[V.size() - 2], w);
    reorthogonalize(w);
    const double b = norm2(w);
    out.lanczos_steps = j + 1;

    const bool last = (j + 1 == max_steps) || b < 1e-13;
    if ((j + 1) % check_every == 0 || last) {
      // Ritz pairs of the current tridiagonal section.
      const int m = static_cast<int>(alpha.size());
      Vec d = alpha, e(static_cast<std::size_t>(m), 0.0);
      for (int i = 1; i < m; ++i) e[static_cast<std::size_t>(i)] = beta[static_cast<std::size_t>(i - 1)];
      std::vector<Vec> y;
      tridiag_eigen(d, e, &y);
      const double scale = std::max(std::abs(d.front()), std::abs(d.back()));
      bool ok = m >= k;
      for (int i = 0; i < k && ok; ++i) {
        const double resid = b * std::abs(y[static_cast<std::size_t>(i)][static_cast<std::size_t>(m - 1)]);
        if (resid > tol * std::max(scale, 1.0)) ok = false;
      }
      if (ok || last) {
        out.values.assign(d.begin(), d.begin() + std::min(k, m));
        out.vectors.assign(static_cast<std::size_t>(std::min(k, m)), Vec(n, 0.0));
        for (int i = 0; i < std::min(k, m); ++i)
          for (int l = 0; l < m; ++l)
            axpy(y[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)],
                 V[static_cast<std::size_t>(l)], out.vectors[static_cast<std::size_t>(i)]);
        for (auto& vec : out.vectors) {
          const double nn = norm2(vec);
          if (nn > 0.0)
            for (auto& x : vec) x /= nn;
        }
        out.converged = ok;
        return out;
      }
    }
    if (b < 1e-13) break;  // invariant subspace; handled above via `last`
    beta.push_back(b);
    for (auto& x : w) x /= b;
    V.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dense symmetric storage and a cyclic Jacobi eigensolver. Only used for
// modest sizes (cross-checks and small certificates).

struct DenseSym {
  std::size_t n = 0;
  Vec a;  // row-major n*n

  explicit DenseSym(std::size_t size = 0) : n(size), a(size * size, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  void apply(const Vec& v, Vec& y) const {
    y.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      const double* row = &a[i * n];
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      y[i] = s;
    }
  }

  double asymmetry() const {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        m = std::max(m, std::abs(at(i, j) - at(j, i)));
    return m;
  }
};

inline void jacobi_eigen(DenseSym A, Vec& values, std::vector<Vec>* vectors,
                         int max_sweeps = 60) {
  const std::size_t n = A.n;
  std::vector<Vec> V(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) V[i][i] = 1.0;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += A.at(i, j) * A.at(i, j);
    if (off < 1e-28 * (1.0 + std::abs(A.at(0, 0)))) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A.at(p, q);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (A.at(q, q) - A.at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = A.at(i, p), aiq = A.at(i, q);
          A.at(i, p) = c * aip - s * aiq;
          A.at(i, q) = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = A.at(p, i), aqi = A.at(q, i);
          A.at(p, i) = c * api - s * aqi;
          A.at(q, i) = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = V[i][p], viq = V[i][q];
          V[i][p] = c * vip - s * viq;
          V[i][q] = s * vip + c * viq;
        }
      }
  }
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return A.at(a, a) < A.at(b, b); });
  values.resize(n);
  if (vectors) vectors->assign(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = A.at(idx[i], idx[i]);
    if (vectors)
      for (std::size_t r = 0; r < n; ++r) (*vectors)[i][r] = V[r][idx[i]];
  }
}

}  // namespace nonloc1d

#endif  // NONLOC1D_LINALG_HPP
