#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "fiolab/fft.hpp"

namespace fiolab {

/// Uniform centered grid on [-R, R)^d with n points per axis.
struct GridSpec {
  int d = 1;
  int n = 128;
  double R = 10.0;

  GridSpec() = default;
  GridSpec(int d_, int n_, double R_) : d(d_), n(n_), R(R_) { validate(); }

  void validate() const {
    if (d < 1 || d > 2) throw InputError("GridSpec: d must be 1 or 2");
    if (n < 8 || (n & (n - 1)) != 0) throw InputError("GridSpec: n must be a power of two >= 8");
    if (!(R > 0)) throw InputError("GridSpec: R must be positive");
  }

  double h() const { return 2.0 * R / n; }
  double x(int k) const { return -R + k * h(); }
  /// Dual grid spacing pi / R, covering [-pi/h, pi/h).
  double dxi() const { return pi / R; }
  double xi(int m) const { return (m - n / 2) * dxi(); }
  double nyquist() const { return pi / h(); }
  std::size_t size() const { return d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n; }
  /// Quadrature weight h^d.
  double weight() const { return std::pow(h(), d); }

  GridSpec with_dim(int dd) const { return GridSpec(dd, n, R); }
  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.d == b.d && a.n == b.n && a.R == b.R;
  }
};

using PointFn = std::function<cplx(std::span<const double>)>;

/// Complex samples on a GridSpec; for d = 2 the first axis is slowest.
struct GridFunction {
  GridSpec spec;
  CVec values;

  GridFunction() = default;
  GridFunction(GridSpec s, CVec v) : spec(s), values(std::move(v)) {
    if (static_cast<std::size_t>(values.size()) != spec.size())
      throw DimensionError("GridFunction: value count does not match grid");
  }
  explicit GridFunction(GridSpec s) : spec(s), values(CVec::Zero(static_cast<Eigen::Index>(s.size()))) {}

  static GridFunction sample(const GridSpec& s, const PointFn& f) {
    GridFunction g(s);
    std::array<double, 2> p{};
    if (s.d == 1) {
      for (int k = 0; k < s.n; ++k) {
        p[0] = s.x(k);
        g.values(k) = f(std::span<const double>(p.data(), 1));
      }
    } else {
      for (int i = 0; i < s.n; ++i)
        for (int j = 0; j < s.n; ++j) {
          p[0] = s.x(i);
          p[1] = s.x(j);
          g.values(static_cast<Eigen::Index>(i) * s.n + j) = f(std::span<const double>(p.data(), 2));
        }
    }
    return g;
  }

  cplx& at(int i, int j) { return values(static_cast<Eigen::Index>(i) * spec.n + j); }
  cplx at(int i, int j) const { return values(static_cast<Eigen::Index>(i) * spec.n + j); }

  double norm() const { return std::sqrt(spec.weight()) * values.norm(); }
  /// (f, g) = int f conj(g).
  cplx inner(const GridFunction& g) const { return spec.weight() * g.values.dot(values); }

  GridFunction operator+(const GridFunction& o) const { return {spec, values + o.values}; }
  GridFunction operator-(const GridFunction& o) const { return {spec, values - o.values}; }
  GridFunction operator*(cplx c) const { return {spec, values * c}; }
};

/// Dense operator on a d = 1 grid; the quadrature weight h is folded into the entries so
/// that application is a plain matrix-vector product.
struct OperatorMatrix {
  GridSpec spec;
  CMat M;

  GridFunction apply(const GridFunction& f) const {
    if (!(f.spec == spec)) throw DimensionError("OperatorMatrix: grid mismatch");
    return {spec, M * f.values};
  }
  /// Schwartz kernel samples K(x_j, x_k) = M_jk / h.
  CMat kernel() const { return M / spec.h(); }
  OperatorMatrix operator*(const OperatorMatrix& o) const { return {spec, M * o.M}; }
  OperatorMatrix operator+(const OperatorMatrix& o) const { return {spec, M + o.M}; }
  OperatorMatrix operator-(const OperatorMatrix& o) const { return {spec, M - o.M}; }
  OperatorMatrix adjoint() const { return {spec, M.adjoint()}; }
};

/// Default memory cap for dense n^{2d} arrays (complex entries).
inline constexpr std::size_t dense_entry_cap = std::size_t{1} << 24;

inline void guard_dense(std::size_t entries, const char* who, std::size_t cap = dense_entry_cap) {
  if (entries > cap)
    throw SizeGuardError(std::string(who) + ": requires " + std::to_string(entries * 16) +
                             " bytes of complex storage, above the cap of " + std::to_string(cap * 16),
                         entries, cap);
}

// ---------------------------------------------------------------------------
// Centered transforms between the x grid and the dual grid (d = 1).

/// F[m] = sum_k f_k exp(-i x_k xi_m); the sign identity holds because n/2 is even.
inline CVec centered_dft(const CVec& f) {
  const Eigen::Index n = f.size();
  CVec t(n);
  for (Eigen::Index k = 0; k < n; ++k) t(k) = (k % 2 ? -1.0 : 1.0) * f(k);
  CVec out = dft1(t, FFTW_FORWARD);
  for (Eigen::Index m = 0; m < n; ++m)
    if (m % 2) out(m) = -out(m);
  return out;
}

/// f[k] = sum_m c_m exp(+i x_k xi_m).
inline CVec centered_idft(const CVec& c) {
  const Eigen::Index n = c.size();
  CVec t(n);
  for (Eigen::Index m = 0; m < n; ++m) t(m) = (m % 2 ? -1.0 : 1.0) * c(m);
  CVec out = dft1(t, FFTW_BACKWARD);
  for (Eigen::Index k = 0; k < n; ++k)
    if (k % 2) out(k) = -out(k);
  return out;
}

/// Unitary Fourier transform of grid samples, returned as samples on the dual grid:
/// fhat(xi_m) = (2 pi)^{-1/2} h sum_k f_k exp(-i x_k xi_m).
inline CVec fourier_to_dual(const GridSpec& s, const CVec& f) {
  return centered_dft(f) * (s.h() / std::sqrt(2 * pi));
}

inline CVec fourier_from_dual(const GridSpec& s, const CVec& fhat) {
  return centered_idft(fhat) * (s.dxi() / std::sqrt(2 * pi));
}

// ---------------------------------------------------------------------------
// Reference functions

/// L^2-normalized Hermite function of order k evaluated at x.
inline double hermite_function(int k, double x) {
  double p0 = std::pow(pi, -0.25) * std::exp(-0.5 * x * x);
  if (k == 0) return p0;
  double p1 = std::sqrt(2.0) * x * p0;
  for (int j = 2; j <= k; ++j) {
    const double p2 = std::sqrt(2.0 / j) * x * p1 - std::sqrt((j - 1.0) / j) * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

/// psi_0 = pi^{-d/4} exp(-|x|^2 / 2).
inline GridFunction psi0(const GridSpec& s) {
  return GridFunction::sample(s, [d = s.d](std::span<const double> x) {
    double r2 = 0;
    for (double v : x) r2 += v * v;
    return cplx(std::pow(pi, -0.25 * d) * std::exp(-0.5 * r2), 0.0);
  });
}

inline GridFunction hermite(const GridSpec& s, int k) {
  return GridFunction::sample(s, [k](std::span<const double> x) { return cplx(hermite_function(k, x[0]), 0.0); });
}

/// exp(-|x - x0|^2 / (2 w^2)) exp(i <p0, x>), one-dimensional.
inline GridFunction gaussian_packet(const GridSpec& s, double x0, double p0, double w = 1.0) {
  return GridFunction::sample(s, [=](std::span<const double> x) {
    const double u = x[0] - x0;
    return std::exp(-u * u / (2 * w * w)) * std::exp(I_unit * (p0 * x[0]));
  });
}

/// Discrete delta at the grid point nearest to 0, scaled so that its integral is 1.
inline GridFunction discrete_delta(const GridSpec& s) {
  GridFunction g(s);
  g.values(s.n / 2) = 1.0 / s.h();
  return g;
}

}  // namespace fiolab
