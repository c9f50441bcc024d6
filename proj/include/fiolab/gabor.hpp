#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include "fiolab/metaplectic.hpp"

namespace fiolab {

// ---------------------------------------------------------------------------
// Small parallel loop: each index writes only its own output slot.

template <typename F>
void parallel_for(int count, F&& body) {
  const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) body(i);
    });
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Windows and twists

/// One-dimensional analytic window; d-dimensional windows are tensor powers.
struct Window {
  std::function<cplx(double)> f;

  static Window psi0() {
    return {[](double t) { return cplx(std::pow(pi, -0.25) * std::exp(-0.5 * t * t), 0.0); }};
  }
  static Window hermite(int k) {
    return {[k](double t) { return cplx(hermite_function(k, t), 0.0); }};
  }
  cplx operator()(double t) const { return f(t); }

  GridFunction sample(const GridSpec& spec) const {
    return GridFunction::sample(spec, [w = f](std::span<const double> x) {
      cplx v = 1.0;
      for (double t : x) v *= w(t);
      return v;
    });
  }
};

/// Unimodular factor multiplying T_g u at (x, xi); absent means no twist.
using Twist = std::function<cplx(std::span<const double> x, std::span<const double> xi)>;

/// exp(-i <pi_{Y^perp} x, xi>).
inline Twist twist_Y(const Mat& Y) {
  const int d = static_cast<int>(Y.rows());
  const Mat Pperp = Mat::Identity(d, d) - (Y.cols() ? Mat(Y * Y.transpose()) : Mat::Zero(d, d));
  return [Pperp, d](std::span<const double> x, std::span<const double> xi) {
    Eigen::Map<const Vec> xv(x.data(), d), xiv(xi.data(), d);
    return std::exp(-I_unit * (Pperp * xv).dot(xiv));
  };
}

/// exp(-i(<pi_{Y^perp} x, xi> + <x, F x>/2)); F is projected to pi_Y F pi_Y first.
inline Twist twist_Lambda(const LagrangianParam& p) {
  const int d = static_cast<int>(p.F.rows());
  const Mat PY = p.Y.cols() ? Mat(p.Y * p.Y.transpose()) : Mat::Zero(d, d);
  const Mat Pperp = Mat::Identity(d, d) - PY;
  const Mat F = PY * p.F * PY;
  return [Pperp, F, d](std::span<const double> x, std::span<const double> xi) {
    Eigen::Map<const Vec> xv(x.data(), d), xiv(xi.data(), d);
    return std::exp(-I_unit * ((Pperp * xv).dot(xiv) + 0.5 * xv.dot(F * xv)));
  };
}

/// exp(-i/2 (<z, zeta> + sigma(chi(z2, -zeta2), (z1, zeta1)))) for kernels on R^{2d};
/// sigma((x, xi), (x', xi')) = <x', xi> - <x, xi'>.
inline Twist twist_chi(const SymplecticMatrix& chi) {
  const int d = chi.d();
  const Mat M = chi.matrix();
  return [M, d](std::span<const double> z, std::span<const double> zeta) {
    Eigen::Map<const Vec> zv(z.data(), 2 * d), zetav(zeta.data(), 2 * d);
    Vec w(2 * d);
    w << zv.tail(d), -zetav.tail(d);
    const Vec cw = M * w;
    const double sigma = zv.head(d).dot(cw.tail(d)) - cw.head(d).dot(zetav.head(d));
    return std::exp(-0.5 * I_unit * (zv.dot(zetav) + sigma));
  };
}

// ---------------------------------------------------------------------------
// Centered d-dimensional DFT: out[m] = sum_k f[k] exp(-i <x_k, xi_m>).

inline std::vector<cplx> centered_dft_nd(std::vector<cplx> f, int n, int d) {
  auto sign = [n, d](std::size_t idx) {
    int s = 0;
    for (int a = 0; a < d; ++a) {
      s += static_cast<int>(idx % n);
      idx /= n;
    }
    return (s % 2) ? -1.0 : 1.0;
  };
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= sign(i);
  std::vector<cplx> out = dft(f, std::vector<int>(static_cast<std::size_t>(d), n), FFTW_FORWARD);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sign(i);
  return out;
}

// ---------------------------------------------------------------------------
// Phase-space fields

/// T_g u on the product of (strided) x and xi grids, d = 1.
struct PhaseSpaceField {
  GridSpec spec;
  int stride = 1;
  CMat values;  // values(i, m) at (x(i), xi(m))

  double x(int i) const { return spec.x(i * stride); }
  double xi(int m) const { return spec.xi(m * stride); }
  int nx() const { return static_cast<int>(values.rows()); }
  int nxi() const { return static_cast<int>(values.cols()); }
  /// Quadrature cell h * (pi/R) times stride^2.
  double cell() const { return spec.h() * spec.dxi() * stride * stride; }
};

/// T_g u(x, xi) = (2 pi)^{-d/2} (u, T_x M_xi g) with x on the grid; the window is shifted by
/// whole grid steps (periodically), so any sampled window works.
inline PhaseSpaceField gabor_transform(const GridFunction& u, const GridFunction& g, int stride = 1) {
  if (!(u.spec == g.spec)) throw DimensionError("gabor_transform: grid mismatch");
  if (u.spec.d != 1) throw DimensionError("gabor_transform: use the sampled field engine for d = 2");
  const GridSpec& s = u.spec;
  const int n = s.n;
  if (stride < 1 || n % stride) throw InputError("gabor_transform: stride must divide n");
  const int nx = n / stride;
  PhaseSpaceField out{s, stride, CMat(nx, nx)};
  const double pref = s.h() / std::sqrt(2 * pi);
  parallel_for(nx, [&](int ii) {
    const int i = ii * stride;
    const int shift = i - n / 2;  // x_i = shift * h
    CVec p(n);
    for (int k = 0; k < n; ++k) p(k) = u.values(k) * std::conj(g.values(((k - shift) % n + n) % n));
    const CVec S = centered_dft(p);
    for (int mm = 0; mm < nx; ++mm) {
      const int m = mm * stride;
      out.values(ii, mm) = pref * std::exp(I_unit * (s.x(i) * s.xi(m))) * S(m);
    }
  });
  return out;
}

inline PhaseSpaceField gabor_transform(const GridFunction& u, const Window& g, int stride = 1) {
  return gabor_transform(u, g.sample(u.spec), stride);
}

/// T_g u at one arbitrary phase-space point (d = 1), by direct quadrature.
inline cplx gabor_at(const GridFunction& u, const Window& g, double x, double xi) {
  const GridSpec& s = u.spec;
  cplx acc = 0.0;
  for (int k = 0; k < s.n; ++k) {
    const double y = s.x(k);
    acc += u.values(k) * std::conj(g(y - x)) * std::exp(-I_unit * ((y - x) * xi));
  }
  return acc * s.h() / std::sqrt(2 * pi);
}

/// (h, g)^{-1} T_h^* U by quadrature; stride-1 fields only.
inline GridFunction gabor_inverse(const PhaseSpaceField& U, const GridFunction& g, const GridFunction& h) {
  if (U.stride != 1) throw PreconditionError("gabor_inverse: stride must be 1");
  const cplx hg = h.inner(g);
  if (std::abs(hg) < 1e-10) throw PreconditionError("gabor_inverse: windows are orthogonal, (h, g) = 0");
  const GridSpec& s = U.spec;
  const int n = s.n;
  CVec acc = CVec::Zero(n);
  const double pref = s.dxi() * s.h() / std::sqrt(2 * pi);
  for (int i = 0; i < n; ++i) {
    CVec c(n);
    for (int m = 0; m < n; ++m) c(m) = U.values(i, m) * std::exp(-I_unit * (s.x(i) * s.xi(m)));
    const CVec e = centered_idft(c);  // sum_m c_m exp(i y_k xi_m)
    const int shift = i - n / 2;
    for (int k = 0; k < n; ++k) acc(k) += e(k) * h.values(((k - shift) % n + n) % n);
  }
  return {s, acc * (pref / hg)};
}

/// ||T_g u||_{L^2(phase grid)}; Moyal gives ||g|| ||u||.
inline double field_norm(const PhaseSpaceField& F) { return std::sqrt(F.cell()) * F.values.norm(); }

/// Shubin-Sobolev norm ||<z>^s T_g u||_{L^2}.
inline double qs_norm(const GridFunction& u, double s, const Window& g = Window::psi0()) {
  const PhaseSpaceField F = gabor_transform(u, g);
  double acc = 0.0;
  for (int i = 0; i < F.nx(); ++i)
    for (int m = 0; m < F.nxi(); ++m) {
      const double r2 = 1 + F.x(i) * F.x(i) + F.xi(m) * F.xi(m);
      acc += std::pow(r2, s) * std::norm(F.values(i, m));
    }
  return std::sqrt(acc * F.cell());
}

// ---------------------------------------------------------------------------
// Sampled fields: point sets in phase space R^{2d} for d = 1 or 2.

/// Where and how a field is sampled: base x points in |x_a| <= x_box and xi points in
/// |xi_a| <= xi_box on the (strided) grid, optional twist.
struct FieldPlan {
  Window window = Window::psi0();
  std::optional<Twist> twist;
  double x_box = std::numeric_limits<double>::infinity();
  double xi_box = std::numeric_limits<double>::infinity();
  int stride = 1;
};

struct SampledField {
  int dim = 2;     // phase-space dimension 2d
  Mat points;      // (count x dim): (x_1..x_d, xi_1..xi_d)
  CVec values;
};

namespace detail {

inline std::vector<int> axis_indices(const GridSpec& s, int stride, double box, bool dual) {
  std::vector<int> out;
  for (int k = 0; k < s.n; k += stride) {
    const double v = dual ? s.xi(k) : s.x(k);
    if (std::abs(v) <= box) out.push_back(k);
  }
  return out;
}

}  // namespace detail

/// Base sample points of a plan (shared by every shifted evaluation).
inline Mat field_points(const GridSpec& s, const FieldPlan& plan) {
  const int d = s.d;
  const auto xs = detail::axis_indices(s, plan.stride, plan.x_box, false);
  const auto ms = detail::axis_indices(s, plan.stride, plan.xi_box, true);
  const Eigen::Index nx = static_cast<Eigen::Index>(std::pow(xs.size(), d));
  const Eigen::Index nm = static_cast<Eigen::Index>(std::pow(ms.size(), d));
  Mat P(nx * nm, 2 * d);
  for (Eigen::Index a = 0; a < nx; ++a)
    for (Eigen::Index b = 0; b < nm; ++b) {
      const Eigen::Index row = a * nm + b;
      Eigen::Index ia = a, ib = b;
      for (int ax = d - 1; ax >= 0; --ax) {
        P(row, ax) = s.x(xs[ia % xs.size()]);
        P(row, d + ax) = s.xi(ms[ib % ms.size()]);
        ia /= static_cast<Eigen::Index>(xs.size());
        ib /= static_cast<Eigen::Index>(ms.size());
      }
    }
  return P;
}

/// Twisted T_g u at every base point z shifted by `shift` (a vector in R^{2d}); the same
/// point order as field_points. One d-dimensional FFT per x point.
inline CVec field_values(const GridFunction& u, const FieldPlan& plan, const Vec& shift) {
  const GridSpec& s = u.spec;
  const int d = s.d, n = s.n;
  const auto xs = detail::axis_indices(s, plan.stride, plan.x_box, false);
  const auto ms = detail::axis_indices(s, plan.stride, plan.xi_box, true);
  const int nxa = static_cast<int>(xs.size()), nma = static_cast<int>(ms.size());
  const int nx = d == 1 ? nxa : nxa * nxa;
  const int nm = d == 1 ? nma : nma * nma;
  guard_dense(static_cast<std::size_t>(nx) * nm, "field_values");
  CVec out(static_cast<Eigen::Index>(nx) * nm);
  const double pref = std::pow(s.h(), d) * std::pow(2 * pi, -0.5 * d);
  parallel_for(nx, [&](int a) {
    std::array<double, 2> x{}, xi{};
    const std::array<int, 2> xa{d == 1 ? a : a / nxa, d == 1 ? 0 : a % nxa};
    for (int ax = 0; ax < d; ++ax) x[ax] = s.x(xs[xa[ax]]) + shift(ax);
    // Per-axis factors conj(g(y - x)) exp(-i y shift_xi).
    std::array<CVec, 2> fac;
    for (int ax = 0; ax < d; ++ax) {
      fac[ax].resize(n);
      for (int k = 0; k < n; ++k) {
        const double y = s.x(k);
        fac[ax](k) = std::conj(plan.window(y - x[ax])) * std::exp(-I_unit * (y * shift(d + ax)));
      }
    }
    std::vector<cplx> p(u.values.size());
    if (d == 1) {
      for (int k = 0; k < n; ++k) p[k] = u.values(k) * fac[0](k);
    } else {
      for (int k1 = 0; k1 < n; ++k1)
        for (int k2 = 0; k2 < n; ++k2) {
          const std::size_t idx = static_cast<std::size_t>(k1) * n + k2;
          p[idx] = u.values(static_cast<Eigen::Index>(idx)) * fac[0](k1) * fac[1](k2);
        }
    }
    const std::vector<cplx> S = centered_dft_nd(std::move(p), n, d);
    for (int b = 0; b < nm; ++b) {
      const std::array<int, 2> mb{d == 1 ? b : b / nma, d == 1 ? 0 : b % nma};
      std::size_t sidx = 0;
      double phase = 0.0;
      for (int ax = 0; ax < d; ++ax) {
        const int m = ms[mb[ax]];
        sidx = sidx * n + static_cast<std::size_t>(m);
        xi[ax] = s.xi(m) + shift(d + ax);
        phase += x[ax] * xi[ax];
      }
      cplx v = pref * std::exp(I_unit * phase) * S[sidx];
      if (plan.twist)
        v *= (*plan.twist)(std::span<const double>(x.data(), d), std::span<const double>(xi.data(), d));
      out(static_cast<Eigen::Index>(a) * nm + b) = v;
    }
  });
  return out;
}

/// Pointwise max over multi-indices of |L_{v_1} ... L_{v_k} F| (central differences with
/// step delta along unit directions), for k = 0..k_max. Entry k is the order-k field.
inline std::vector<Vec> directional_fields(const GridFunction& u, const FieldPlan& plan, const std::vector<Vec>& dirs,
                                           int k_max, double delta = 0.1) {
  const int D = 2 * u.spec.d;
  std::vector<Vec> out;
  const CVec base = field_values(u, plan, Vec::Zero(D));
  out.push_back(base.cwiseAbs());
  // Cache shifted evaluations keyed by the integer combination of directions.
  std::map<std::vector<int>, CVec> cache;
  auto eval = [&](const std::vector<int>& coeff) -> const CVec& {
    auto it = cache.find(coeff);
    if (it != cache.end()) return it->second;
    Vec sh = Vec::Zero(D);
    for (std::size_t j = 0; j < dirs.size(); ++j) sh += delta * coeff[j] * dirs[j];
    return cache.emplace(coeff, field_values(u, plan, sh)).first->second;
  };
  for (int k = 1; k <= k_max; ++k) {
    Vec best = Vec::Zero(base.size());
    // Nondecreasing multi-indices of length k over the directions.
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    while (true) {
      CVec acc = CVec::Zero(base.size());
      for (int signs = 0; signs < (1 << k); ++signs) {
        std::vector<int> coeff(dirs.size(), 0);
        double w = 1.0;
        for (int j = 0; j < k; ++j) {
          const int sg = (signs >> j) & 1 ? -1 : 1;
          coeff[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] += sg;
          w *= sg;
        }
        acc += w * eval(coeff);
      }
      acc /= std::pow(2 * delta, k);
      best = best.cwiseMax(acc.cwiseAbs());
      int p = k - 1;
      while (p >= 0 && idx[static_cast<std::size_t>(p)] == static_cast<int>(dirs.size()) - 1) --p;
      if (p < 0) break;
      ++idx[static_cast<std::size_t>(p)];
      for (int q = p + 1; q < k; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(p)];
    }
    out.push_back(best);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shell profiles

struct ShellProfile {
  std::vector<std::pair<double, double>> shells;  // (mean radius, max value)
  double slope = 0.0;
  double local_slope = 0.0;  // largest slope over runs of 3 consecutive shells clear of the floor
  bool negligible = false;  // every shell below the floor
  Status status = Status::inconclusive;
};

/// Shell maxima of `values` binned by `radius` into log-spaced shells on [r_lo, r_hi), and the
/// least-squares slope of log max against log r. Values below `floor` are clamped to it,
/// which can only make a decaying profile look flatter. The global fit can hide a rise that
/// only turns into decay where the sampling box runs out; `local_slope` does not.
inline ShellProfile shell_profile(const std::vector<double>& radius, const Vec& values, double r_lo, double r_hi,
                                  double floor, int shell_count = 8) {
  ShellProfile prof;
  if (!(r_hi > r_lo) || r_lo <= 0) return prof;
  std::vector<double> mx(static_cast<std::size_t>(shell_count), -1.0), rs(static_cast<std::size_t>(shell_count), 0.0);
  std::vector<int> cnt(static_cast<std::size_t>(shell_count), 0);
  const double span = std::log(r_hi / r_lo);
  for (std::size_t p = 0; p < radius.size(); ++p) {
    const double r = radius[p];
    if (r < r_lo || r >= r_hi) continue;
    const auto b = static_cast<std::size_t>(
        std::min(shell_count - 1, static_cast<int>(std::floor(std::log(r / r_lo) / span * shell_count))));
    mx[b] = std::max(mx[b], values(static_cast<Eigen::Index>(p)));
    rs[b] += r;
    ++cnt[b];
  }
  std::vector<double> lx, ly;
  bool all_small = true;
  for (std::size_t b = 0; b < mx.size(); ++b) {
    if (!cnt[b]) continue;
    const double r = rs[b] / cnt[b];
    prof.shells.emplace_back(r, mx[b]);
    lx.push_back(std::log(r));
    ly.push_back(std::log(std::max(mx[b], floor)));
    if (mx[b] > floor) all_small = false;
  }
  if (lx.size() < 4) return prof;
  prof.negligible = all_small;
  prof.slope = all_small ? -std::numeric_limits<double>::infinity() : fit_slope(lx, ly);
  prof.local_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 3 <= lx.size(); ++i) {
    if (std::max({ly[i], ly[i + 1], ly[i + 2]}) <= std::log(10 * floor)) continue;
    const std::vector<double> wx(lx.begin() + static_cast<long>(i), lx.begin() + static_cast<long>(i) + 3);
    const std::vector<double> wy(ly.begin() + static_cast<long>(i), ly.begin() + static_cast<long>(i) + 3);
    prof.local_slope = std::max(prof.local_slope, fit_slope(wx, wy));
  }
  prof.status = Status::pass;  // fitted; callers compare slopes
  return prof;
}

struct DecayProfile {
  ShellProfile off;    // by distance to the reference Lagrangian
  ShellProfile along;  // near the Lagrangian, by distance to the transversal subspace
};

/// Distances of each row of P to the span of the orthonormal columns of B.
inline std::vector<double> distances_to(const Mat& P, const Mat& B) {
  std::vector<double> out(static_cast<std::size_t>(P.rows()));
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const Vec z = P.row(i).transpose();
    out[static_cast<std::size_t>(i)] = (z - B * (B.transpose() * z)).norm();
  }
  return out;
}

struct DecayWindow {
  double off_lo = 2.0, off_hi = 8.0;
  double along_lo = 1.0, along_hi = -1.0;  // negative: 0.95 of the largest available
  double near_width = 1.0;                 // "near Lambda" for the along profile
  int shells = 8;
};

inline DecayProfile decay_profile(const Mat& points, const Vec& values, const LagrangianSubspace& lambda,
                                  const LagrangianSubspace& transversal, double floor, const DecayWindow& w = {}) {
  DecayProfile dp;
  const std::vector<double> off = distances_to(points, lambda.basis());
  const std::vector<double> tr = distances_to(points, transversal.basis());
  dp.off = shell_profile(off, values, w.off_lo, w.off_hi, floor, w.shells);
  std::vector<double> along;
  std::vector<double> vals;
  double rmax = 0.0;
  for (std::size_t p = 0; p < off.size(); ++p)
    if (off[p] <= w.near_width) {
      along.push_back(tr[p]);
      vals.push_back(values(static_cast<Eigen::Index>(p)));
      rmax = std::max(rmax, tr[p]);
    }
  const double hi = w.along_hi > 0 ? w.along_hi : 0.95 * rmax;
  dp.along = shell_profile(along, Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())),
                           w.along_lo, hi, floor, w.shells);
  return dp;
}

// ---------------------------------------------------------------------------
// Gabor wave front estimation (d = 1)

struct WavefrontReport {
  int bins = 64;                // sectors of width 2 pi / bins
  std::vector<double> slopes;   // fitted decay exponent per sector
  std::vector<char> negligible; // sector below the floor everywhere
  std::vector<int> sectors;     // not rapidly decaying
  double r_min = 0.0, r_max = 0.0;
  bool extrapolated = true;     // the cone condition at infinity is read off r <= r_max
  Status status = Status::inconclusive;
};

inline int sector_of(double angle, int bins) {
  const double w = 2 * pi / bins;
  double a = std::fmod(angle + 0.5 * w, 2 * pi);
  if (a < 0) a += 2 * pi;
  return std::min(bins - 1, static_cast<int>(a / w));
}

inline double sector_angle(int sector, int bins) { return sector * 2 * pi / bins; }

/// Sectors are centred on multiples of pi/32; a sector is in the estimate when its shell
/// maxima over [r_min, r_max] decay slower than r^{-N_max}.
inline WavefrontReport wavefront_estimate(const GridFunction& u, const Window& g = Window::psi0(), double N_max = 2.0,
                                          double r_min = -1.0, int bins = 64, int shells = 8) {
  const PhaseSpaceField F = gabor_transform(u, g);
  const GridSpec& s = u.spec;
  WavefrontReport rep;
  rep.bins = bins;
  rep.r_max = 0.8 * std::min(s.R, s.nyquist());
  rep.r_min = r_min > 0 ? r_min : rep.r_max / 4;
  const double scale = F.values.cwiseAbs().maxCoeff();
  const double floor = std::max(scale, 1e-300) * 1e-10;
  std::vector<std::vector<double>> rad(static_cast<std::size_t>(bins));
  std::vector<std::vector<double>> val(static_cast<std::size_t>(bins));
  for (int i = 0; i < F.nx(); ++i)
    for (int m = 0; m < F.nxi(); ++m) {
      const double r = std::hypot(F.x(i), F.xi(m));
      if (r < rep.r_min || r >= rep.r_max) continue;
      const auto b = static_cast<std::size_t>(sector_of(std::atan2(F.xi(m), F.x(i)), bins));
      rad[b].push_back(r);
      val[b].push_back(std::abs(F.values(i, m)));
    }
  rep.slopes.assign(static_cast<std::size_t>(bins), 0.0);
  rep.negligible.assign(static_cast<std::size_t>(bins), 0);
  rep.status = Status::pass;
  for (int b = 0; b < bins; ++b) {
    const auto& vv = val[static_cast<std::size_t>(b)];
    const ShellProfile p = shell_profile(rad[static_cast<std::size_t>(b)],
                                         Eigen::Map<const Vec>(vv.data(), static_cast<Eigen::Index>(vv.size())),
                                         rep.r_min, rep.r_max, floor, shells);
    if (p.status == Status::inconclusive) {
      rep.status = Status::inconclusive;
      continue;
    }
    rep.slopes[static_cast<std::size_t>(b)] = p.slope;
    rep.negligible[static_cast<std::size_t>(b)] = p.negligible;
    if (!p.negligible && p.slope > -N_max) rep.sectors.push_back(b);
  }
  return rep;
}

struct SchwartzReport {
  Status status = Status::inconclusive;
  ShellProfile radial;
  WavefrontReport wf;
};

/// Rapid decay of |T_g u| in every direction: radial shell maxima fall faster than r^{-N}
/// and the wave front estimate is empty.
inline SchwartzReport schwartz_decay_check(const GridFunction& u, const Window& g = Window::psi0(), double N = 6.0) {
  SchwartzReport rep;
  rep.wf = wavefront_estimate(u, g, N);
  const PhaseSpaceField F = gabor_transform(u, g);
  std::vector<double> rad;
  std::vector<double> vals;
  for (int i = 0; i < F.nx(); ++i)
    for (int m = 0; m < F.nxi(); ++m) {
      rad.push_back(std::hypot(F.x(i), F.xi(m)));
      vals.push_back(std::abs(F.values(i, m)));
    }
  const double scale = F.values.cwiseAbs().maxCoeff();
  rep.radial = shell_profile(rad, Eigen::Map<const Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())), 2.0,
                             rep.wf.r_max, std::max(scale, 1e-300) * 1e-10);
  if (rep.radial.status == Status::inconclusive || rep.wf.status == Status::inconclusive) return rep;
  const bool ok = (rep.radial.negligible || rep.radial.slope <= -N) && rep.wf.sectors.empty();
  rep.status = ok ? Status::pass : Status::fail;
  return rep;
}

// ---------------------------------------------------------------------------
// FBI covariance

/// max over interior grid points z of | |T_{mu g}(mu u)(z)| - |T_g u(chi^{-1} z)| |, with
/// interior |x| <= R/2, |xi| <= nyquist/2 and chi^{-1} z in the same box.
inline double fbi_covariance_residual(const SymplecticMatrix& chi, const GridFunction& u, const Window& g,
                                      const GridSpec& spec) {
  const OperatorMatrix mu = mu_general(chi, spec).op;
  const GridFunction gs = g.sample(spec);
  const PhaseSpaceField lhs = gabor_transform(mu.apply(u), mu.apply(gs));
  const Mat inv = symplectic_inverse(chi).matrix();
  const double bx = 0.5 * spec.R, bxi = 0.5 * spec.nyquist();
  std::vector<std::pair<int, int>> pts;
  for (int i = 0; i < lhs.nx(); ++i)
    for (int m = 0; m < lhs.nxi(); ++m) {
      if (std::abs(lhs.x(i)) > bx || std::abs(lhs.xi(m)) > bxi) continue;
      const Vec w = inv * vec2(lhs.x(i), lhs.xi(m));
      if (std::abs(w(0)) > bx || std::abs(w(1)) > bxi) continue;
      pts.emplace_back(i, m);
    }
  std::vector<double> worst(pts.size(), 0.0);
  parallel_for(static_cast<int>(pts.size()), [&](int p) {
    const auto [i, m] = pts[static_cast<std::size_t>(p)];
    const Vec w = inv * vec2(lhs.x(i), lhs.xi(m));
    worst[static_cast<std::size_t>(p)] = std::abs(std::abs(lhs.values(i, m)) - std::abs(gabor_at(u, g, w(0), w(1))));
  });
  return worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

}  // namespace fiolab
