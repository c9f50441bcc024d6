#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "fiolab/grid.hpp"
#include "fiolab/symbol.hpp"

namespace fiolab {

/// Weyl symbol samples on the half-spaced x grid (2n rows, x_s = -R + s h / 2, wrapped to
/// [-R, R)) times the dual grid (n columns). The even rows are the phase-space grid.
struct SampledSymbol {
  GridSpec spec;
  CMat A;

  double x(int s) const {
    double v = -spec.R + s * spec.h() / 2;
    return v >= spec.R ? v - 2 * spec.R : v;
  }
  double xi(int m) const { return spec.xi(m); }
  /// Value at the grid point (x_i, xi_m).
  cplx at(int i, int m) const { return A(2 * i, m); }
  /// n x n samples on (x_i, xi_m).
  CMat on_grid() const {
    CMat g(spec.n, spec.n);
    for (int i = 0; i < spec.n; ++i) g.row(i) = A.row(2 * i);
    return g;
  }
  SampledSymbol operator-(const SampledSymbol& o) const { return {spec, A - o.A}; }
};

/// Samples the symbol on the half grid; the Nyquist column averages xi = -pi/h and +pi/h
/// so real symbols give Hermitian matrices.
inline SampledSymbol halfgrid_sample(const ShubinSymbol& a, const GridSpec& spec) {
  if (spec.d != 1) throw DimensionError("halfgrid_sample: operators are one-dimensional");
  if (a.dim() != 2) throw DimensionError("halfgrid_sample: symbol must live on R^2");
  const int n = spec.n;
  SampledSymbol S{spec, CMat(2 * n, n)};
  for (int s = 0; s < 2 * n; ++s) {
    const double x = S.x(s);
    S.A(s, 0) = 0.5 * (a(x, spec.xi(0)) + a(x, -spec.xi(0)));
    for (int m = 1; m < n; ++m) S.A(s, m) = a(x, spec.xi(m));
  }
  return S;
}

/// Weyl quantization: M_jk = (1/n) sum_m A[j + k][m] exp(i (j - k) h xi_m). Each pair uses
/// its true midpoint (x_j + x_k)/2; only the lag is periodic. Wrapping the midpoint as well
/// would turn symbols that grow in x into a sawtooth and leak mass to the grid edge.
inline OperatorMatrix synthesize(const SampledSymbol& S) {
  const int n = S.spec.n;
  guard_dense(static_cast<std::size_t>(n) * n, "weyl_kernel");
  // c_s(d) = (-1)^d / n * sum_m A[s][m] exp(2 pi i d m / n)
  CMat c(2 * n, n);
  for (int s = 0; s < 2 * n; ++s) {
    CVec row = S.A.row(s).transpose();
    CVec t = dft1(row, FFTW_BACKWARD);
    for (int dm = 0; dm < n; ++dm) c(s, dm) = t(dm) * ((dm % 2) ? -1.0 : 1.0) / static_cast<double>(n);
  }
  OperatorMatrix out{S.spec, CMat(n, n)};
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.M(j, k) = c(j + k, ((j - k) % n + n) % n);
  return out;
}

inline OperatorMatrix weyl_kernel(const ShubinSymbol& a, const GridSpec& spec) {
  return synthesize(halfgrid_sample(a, spec));
}

namespace detail {

/// Weights of the 16-point Lagrange rule evaluating at 0 from nodes +-1, +-3, ..., +-15.
inline const std::array<std::pair<int, double>, 16>& midpoint_rule() {
  static const auto rule = [] {
    std::array<std::pair<int, double>, 16> r{};
    std::array<int, 16> t{};
    for (int q = 0; q < 16; ++q) t[q] = 2 * (q - 8) + 1;
    for (int q = 0; q < 16; ++q) {
      double w = 1.0;
      for (int p = 0; p < 16; ++p)
        if (p != q) w *= (0.0 - t[p]) / static_cast<double>(t[q] - t[p]);
      r[q] = {t[q], w};
    }
    return r;
  }();
  return rule;
}

}  // namespace detail

/// Inverse of `synthesize`: reads the midpoint/lag table off the matrix from pairs with lag
/// |j - k| <= n/2 (the two Nyquist lags are averaged), fills the opposite parity by Lagrange interpolation
/// in s, and transforms in the lag. Exact where every lag slot is observed, i.e. for
/// |x| <= R/2; slots missing near the grid edge are taken as zero.
inline SampledSymbol symbol_from_kernel(const OperatorMatrix& K) {
  const int n = K.spec.n;
  const int n2 = 2 * n;
  CMat G = CMat::Zero(n2, n);  // column index d mod n
  Mat count = Mat::Zero(n2, n);
  auto idx = [n](int d) { return ((d % n) + n) % n; };
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      if (std::abs(j - k) > n / 2) continue;
      G(j + k, idx(j - k)) += K.M(j, k);
      count(j + k, idx(j - k)) += 1.0;
    }
  for (int s = 0; s < n2; ++s)
    for (int dm = 0; dm < n; ++dm)
      if (count(s, dm) > 0) G(s, dm) /= count(s, dm);
  const auto& rule = detail::midpoint_rule();
  CMat G2 = G;
  for (int s = 0; s < n2; ++s)
    for (int d = -n / 2; d < n / 2; ++d) {
      if (((d - s) % 2 + 2) % 2 == 0) continue;
      cplx acc = 0.0;
      for (const auto& [t, w] : rule) acc += w * G(((s + t) % n2 + n2) % n2, idx(d));
      G2(s, idx(d)) = acc;
    }
  SampledSymbol S{K.spec, CMat(n2, n)};
  for (int s = 0; s < n2; ++s) {
    CVec row(n);
    for (int dm = 0; dm < n; ++dm) row(dm) = G2(s, dm) * ((dm % 2) ? -1.0 : 1.0);
    S.A.row(s) = dft1(row, FFTW_FORWARD).transpose();
  }
  return S;
}

/// a # b through the product of the two quantizations.
inline SampledSymbol weyl_product(const ShubinSymbol& a, const ShubinSymbol& b, const GridSpec& spec) {
  return symbol_from_kernel(weyl_kernel(a, spec) * weyl_kernel(b, spec));
}

// ---------------------------------------------------------------------------
// Phase-space grid samples (x_i, xi_m) in row-major n x n layout.

struct PhaseGrid {
  GridSpec spec;
  CMat values;  // values(i, m) at (x_i, xi_m)

  double cell() const { return spec.h() * spec.dxi(); }
};

inline PhaseGrid sample_phase_grid(const ShubinSymbol& a, const GridSpec& spec) {
  PhaseGrid P{spec, CMat(spec.n, spec.n)};
  for (int i = 0; i < spec.n; ++i)
    for (int m = 0; m < spec.n; ++m) P.values(i, m) = a(spec.x(i), spec.xi(m));
  return P;
}

/// Upsamples periodic samples to 2n points by spectral (zero-padding) interpolation.
inline CVec spectral_upsample2(const CVec& f) {
  const Eigen::Index n = f.size();
  CVec F = dft1(f, FFTW_FORWARD);
  CVec G = CVec::Zero(2 * n);
  for (Eigen::Index k = 0; k < n / 2; ++k) G(k) = F(k);
  for (Eigen::Index k = n / 2 + 1; k < n; ++k) G(k + n) = F(k);
  G(n / 2) = 0.5 * F(n / 2);
  G(n / 2 + n) = 0.5 * F(n / 2);
  return dft1(G, FFTW_BACKWARD) / static_cast<double>(n);
}

/// W(g, f)(x, xi) = (2 pi)^{-1/2} int g(x + y/2) conj(f(x - y/2)) exp(-i y xi) dy on (x_i, xi_m).
inline PhaseGrid wigner(const GridFunction& g, const GridFunction& f) {
  if (!(g.spec == f.spec) || g.spec.d != 1) throw DimensionError("wigner: grid mismatch");
  const GridSpec& s = g.spec;
  const int n = s.n, n2 = 2 * n;
  const CVec g2 = spectral_upsample2(g.values), f2 = spectral_upsample2(f.values);
  PhaseGrid W{s, CMat(n, n)};
  const double pref = std::pow(2 * pi, -0.5) * s.h();  // 2 * (h/2)
  CVec row(n);
  for (int i = 0; i < n; ++i) {
    row.setZero();
    // Lags |y| < R only: longer lags pair x with its periodic image and create ghost terms.
    for (int r = -n / 2; r < n / 2; ++r) {
      const int a = ((2 * i + r) % n2 + n2) % n2, b = ((2 * i - r) % n2 + n2) % n2;
      row(((r % n) + n) % n) += g2(a) * std::conj(f2(b));
    }
    for (int r = 0; r < n; ++r)
      if (r % 2) row(r) = -row(r);
    W.values.row(i) = (dft1(row, FFTW_FORWARD) * pref).transpose();
  }
  return W;
}

/// |(a^w f, g) - (2 pi)^{-1/2} (a, W(g, f))|.
inline double weyl_pairing_residual(const ShubinSymbol& a, const GridFunction& f, const GridFunction& g) {
  const OperatorMatrix A = weyl_kernel(a, f.spec);
  const cplx lhs = A.apply(f).inner(g);
  const PhaseGrid W = wigner(g, f);
  const PhaseGrid S = sample_phase_grid(a, f.spec);
  const cplx rhs = std::pow(2 * pi, -0.5) * W.cell() * (S.values.array() * W.values.array().conjugate()).sum();
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Localization operators

/// Gauss-Hermite nodes and weights for the weight exp(-t^2) (Golub-Welsch).
inline std::pair<Vec, Vec> gauss_hermite(int count) {
  Mat T = Mat::Zero(count, count);
  for (int i = 1; i < count; ++i) T(i, i - 1) = T(i - 1, i) = std::sqrt(i / 2.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(T);
  Vec w = es.eigenvectors().row(0).transpose().array().square() * std::sqrt(pi);
  return {es.eigenvalues(), w};
}

/// b = pi^{-1} exp(-|.|^2) * a, evaluated by tensor Gauss-Hermite quadrature.
inline ShubinSymbol localization_symbol(const ShubinSymbol& a, int nodes = 40) {
  auto [t, w] = gauss_hermite(nodes);
  ShubinSymbol::Evaluator f = a.evaluator();
  return ShubinSymbol::custom(2, a.order(), [f, t, w](std::span<const double> z) {
    cplx acc = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i)
      for (Eigen::Index j = 0; j < t.size(); ++j) {
        const double p[2] = {z[0] - t(i), z[1] - t(j)};
        acc += w(i) * w(j) * f(std::span<const double>(p, 2));
      }
    return acc / pi;
  });
}

inline OperatorMatrix localization_operator(const ShubinSymbol& a, const GridSpec& spec) {
  return weyl_kernel(localization_symbol(a), spec);
}

// ---------------------------------------------------------------------------
// Quantization change

/// Left (Kohn-Nirenberg) quantization matrix: M_jk = (1/n) sum_m a(x_j, xi_m) exp(i (j-k) h xi_m).
inline OperatorMatrix kn_kernel(const ShubinSymbol& a, const GridSpec& spec) {
  const int n = spec.n;
  OperatorMatrix out{spec, CMat(n, n)};
  for (int j = 0; j < n; ++j) {
    CVec row(n);
    const double x = spec.x(j);
    row(0) = 0.5 * (a(x, spec.xi(0)) + a(x, -spec.xi(0)));
    for (int m = 1; m < n; ++m) row(m) = a(x, spec.xi(m));
    for (int k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (int m = 0; m < n; ++m) acc += row(m) * std::exp(I_unit * ((j - k) * spec.h() * spec.xi(m)));
      out.M(j, k) = acc / static_cast<double>(n);
    }
  }
  return out;
}

/// Weyl symbol of a left-quantized operator: b = F^{-1} exp(-i <y, eta> / 2) F a,
/// with (y, eta) dual to (x, xi).
inline CMat kn_to_weyl(const CMat& a_grid, const GridSpec& spec) {
  const int n = spec.n;
  CMat T = a_grid;
  for (int i = 0; i < n; ++i) T.row(i) = centered_dft(T.row(i).transpose()).transpose();  // xi -> eta (same sign rule)
  for (int m = 0; m < n; ++m) T.col(m) = centered_dft(T.col(m));                           // x -> y
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      const double y = spec.xi(p), eta = (q - n / 2) * spec.h();
      T(p, q) *= std::exp(-0.5 * I_unit * y * eta);
    }
  for (int m = 0; m < n; ++m) T.col(m) = centered_idft(T.col(m));
  for (int i = 0; i < n; ++i) T.row(i) = centered_idft(T.row(i).transpose()).transpose();
  return T / static_cast<double>(n) / static_cast<double>(n);
}

// ---------------------------------------------------------------------------
// Shubin decay diagnostics

struct DecayFit {
  std::array<int, 2> alpha{};
  double slope = 0.0;
  double bound = 0.0;
  bool negligible = false;
  bool pass = false;
  std::vector<std::pair<double, double>> shells;  // (radius, max |d^alpha a|)
};

struct ShubinDecayReport {
  Status status = Status::inconclusive;
  double m = 0.0, rho = 1.0;
  std::vector<DecayFit> fits;
};

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den != 0 ? (n * sxy - sx * sy) / den : 0.0;
}

/// Fourth-order central differences of phase-grid samples with steps (hx, hxi).
inline CMat central_difference(const CMat& a, int axis, double step) {
  const Eigen::Index n0 = a.rows(), n1 = a.cols();
  CMat out = CMat::Zero(n0, n1);
  auto at = [&](Eigen::Index i, Eigen::Index j) { return a(i, j); };
  for (Eigen::Index i = 0; i < n0; ++i)
    for (Eigen::Index j = 0; j < n1; ++j) {
      const Eigen::Index lo = axis == 0 ? i : j, hi = axis == 0 ? n0 : n1;
      if (lo < 2 || lo >= hi - 2) continue;
      auto v = [&](int o) { return axis == 0 ? at(i + o, j) : at(i, j + o); };
      out(i, j) = (-v(2) + 8.0 * v(1) - 8.0 * v(-1) + v(-2)) / (12.0 * step);
    }
  return out;
}

/// Shell maxima of |d^alpha a| for |alpha| <= 2 over radii in [2, R/2]; pass iff every
/// fitted slope against log<z> is at most m - rho |alpha| + 0.3. Shell maxima below
/// floor_rel * max |a| are clamped to that floor.
inline ShubinDecayReport shubin_decay_test(const CMat& grid_values, const GridSpec& spec, double m, double rho,
                                           double r_lo = 2.0, double r_hi = -1.0, int shell_count = 8,
                                           double margin = 0.3, double floor_rel = 1e-10) {
  if (r_hi < 0) r_hi = spec.R / 2;
  ShubinDecayReport rep;
  rep.m = m;
  rep.rho = rho;
  const int n = spec.n;
  if (r_hi <= r_lo || shell_count < 4) return rep;
  std::vector<double> edges(shell_count + 1);
  for (int k = 0; k <= shell_count; ++k) edges[k] = r_lo * std::pow(r_hi / r_lo, static_cast<double>(k) / shell_count);
  const std::array<std::array<int, 2>, 6> orders{{{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
  const CMat dx = central_difference(grid_values, 0, spec.h());
  const CMat dxi = central_difference(grid_values, 1, spec.dxi());
  const CMat dxx = central_difference(dx, 0, spec.h());
  const CMat dxxi = central_difference(dx, 1, spec.dxi());
  const CMat dxixi = central_difference(dxi, 1, spec.dxi());
  const std::array<const CMat*, 6> fields{&grid_values, &dx, &dxi, &dxx, &dxxi, &dxixi};
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double r = std::hypot(spec.x(i), spec.xi(k));
      if (r <= r_hi) scale = std::max(scale, std::abs(grid_values(i, k)));
    }
  const double floor = std::max(scale, 1e-300) * floor_rel;
  rep.status = Status::pass;
  for (std::size_t f = 0; f < orders.size(); ++f) {
    std::vector<double> mx(shell_count, -1.0), rsum(shell_count, 0.0);
    std::vector<int> cnt(shell_count, 0);
    for (int i = 2; i < n - 2; ++i)
      for (int k = 2; k < n - 2; ++k) {
        const double r = std::hypot(spec.x(i), spec.xi(k));
        if (r < r_lo || r >= r_hi) continue;
        const int b = std::min(shell_count - 1,
                               static_cast<int>(std::floor(std::log(r / r_lo) / std::log(r_hi / r_lo) * shell_count)));
        mx[b] = std::max(mx[b], std::abs((*fields[f])(i, k)));
        rsum[b] += r;
        ++cnt[b];
      }
    DecayFit fit;
    fit.alpha = orders[f];
    const int order = orders[f][0] + orders[f][1];
    fit.bound = m - rho * order + margin;
    std::vector<double> lx, ly;
    bool all_small = true;
    for (int b = 0; b < shell_count; ++b) {
      if (!cnt[b]) continue;
      const double r = rsum[b] / cnt[b];
      fit.shells.emplace_back(r, mx[b]);
      lx.push_back(std::log(std::sqrt(1 + r * r)));
      ly.push_back(std::log(std::max(mx[b], floor)));
      if (mx[b] > floor) all_small = false;
    }
    if (lx.size() < 4) {
      rep.status = Status::inconclusive;
      rep.fits.push_back(fit);
      continue;
    }
    fit.negligible = all_small;
    fit.slope = all_small ? -std::numeric_limits<double>::infinity() : fit_slope(lx, ly);
    fit.pass = fit.slope <= fit.bound;
    if (!fit.pass && rep.status == Status::pass) rep.status = Status::fail;
    rep.fits.push_back(fit);
  }
  return rep;
}

}  // namespace fiolab
