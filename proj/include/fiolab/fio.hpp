#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "fiolab/gabor.hpp"

namespace fiolab {

// ---------------------------------------------------------------------------
// Specs

/// Kernel K(x, y) = int e^{i phi(x, y, theta)} a(x, y, theta) d theta, amplitude on R^{2d+N}.
struct Oscillatory {
  QuadraticPhase phase;
  ShubinSymbol amplitude;
};

/// Weyl symbol either analytic or already sampled on a grid.
using FactoredSymbol = std::variant<ShubinSymbol, SampledSymbol>;

/// b^w mu(chi).
struct Factored {
  FactoredSymbol b;
  SymplecticMatrix chi;
};

struct FioSpec {
  std::variant<Oscillatory, Factored> form;
  double m = 0.0;
  double rho = 1.0;

  static FioSpec oscillatory(QuadraticPhase phase, ShubinSymbol amplitude, double m = 0.0, double rho = 1.0) {
    if (amplitude.dim() != 2 * phase.d + phase.N)
      throw DimensionError("FioSpec: amplitude must live on R^{2d+N}");
    if (!check_nondegeneracy(phase)) throw RankError("FioSpec: degenerate phase");
    chi_from_phase(phase);  // throws NotAGraphError when the Lagrangian is not a twisted graph
    return FioSpec{Oscillatory{std::move(phase), std::move(amplitude)}, m, rho};
  }

  static FioSpec factored(FactoredSymbol b, SymplecticMatrix chi, double m = 0.0, double rho = 1.0) {
    return FioSpec{Factored{std::move(b), std::move(chi)}, m, rho};
  }

  bool is_oscillatory() const { return std::holds_alternative<Oscillatory>(form); }
  const Oscillatory& osc() const { return std::get<Oscillatory>(form); }
  const Factored& fac() const { return std::get<Factored>(form); }

  SymplecticMatrix chi() const { return is_oscillatory() ? chi_from_phase(osc().phase) : fac().chi; }
};

/// How an oscillatory kernel was evaluated.
struct OscQuadrature {
  double T = 0.0;          // truncation radius; theta is integrated over |theta_a| <= 2.5 T
  double eps = 0.0;        // cutoff exp(-|eps theta|^4), eps = 1 / T
  int nodes = 0;           // nodes per theta axis actually used at the final T
  double estimate = 0.0;   // relative change between the last two radii
  int doublings = 0;
  int eliminated = 0;      // directions integrated in closed form (Fresnel)
  cplx prefactor = 1.0;    // product of the closed-form factors
};

// ---------------------------------------------------------------------------
// Kernel <-> operator

inline GridFunction kernel_function(const CMat& K, const GridSpec& grid) {
  const int n = grid.n;
  GridFunction out(grid.with_dim(2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.at(i, j) = K(i, j);
  return out;
}

inline OperatorMatrix kernel_operator(const GridFunction& K) {
  if (K.spec.d != 2) throw DimensionError("kernel_operator: kernel must live on a 2-dimensional grid");
  const GridSpec g = K.spec.with_dim(1);
  OperatorMatrix op{g, CMat(g.n, g.n)};
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) op.M(i, j) = K.at(i, j) * g.h();
  return op;
}

inline OperatorMatrix quantize(const FactoredSymbol& b, const GridSpec& grid) {
  if (const auto* s = std::get_if<SampledSymbol>(&b)) {
    if (!(s->spec == grid)) throw DimensionError("quantize: sampled symbol lives on another grid");
    return synthesize(*s);
  }
  return weyl_kernel(std::get<ShubinSymbol>(b), grid);
}

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int count) {
  std::vector<double> x(static_cast<std::size_t>(count)), w(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    double t = std::cos(pi * (i + 0.75) / (count + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (t * p1 - p0) / (t * t - 1);
      const double step = p1 / dp;
      t -= step;
      if (std::abs(step) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = t;
    w[static_cast<std::size_t>(i)] = 2.0 / ((1 - t * t) * dp * dp);
  }
  return {x, w};
}

/// Composite 8-point rule on [-L, L]; panel width shrinks with the local frequency bound
/// w0 + q |theta|. Panels are returned nearest-first so the integrator can stop on tails.
struct Panel {
  double centre_abs;
  std::vector<double> nodes, weights;
};

inline std::vector<Panel> axis_panels(double L, double w0, double q) {
  static const auto gl = gauss_legendre(8);
  std::vector<Panel> out;
  for (int side : {1, -1}) {
    double t = 0.0;
    while (t < L) {
      const double width = std::min({0.5, 2.5 / (w0 + q * (t + 0.5) + 1e-12), L - t});
      Panel p;
      p.centre_abs = t + width / 2;
      for (std::size_t k = 0; k < gl.first.size(); ++k) {
        p.nodes.push_back(side * (t + width / 2 * (1 + gl.first[k])));
        p.weights.push_back(width / 2 * gl.second[k]);
      }
      out.push_back(std::move(p));
      t += width;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Panel& a, const Panel& b) { return a.centre_abs < b.centre_abs; });
  return out;
}

/// Evaluation of int e^{i(<L theta, X> + theta Q theta / 2)} a(X, theta) e^{-|theta/T|^4} d theta
/// over the grid X = (x_i, y_j), theta in R^k, k <= 2. Amplitude receives theta in the
/// integration coordinates.
struct ThetaIntegrand {
  Mat L;  // 2 x k
  Mat Q;  // k x k
  std::function<cplx(double x, double y, const double* theta)> amp;
};

inline CMat integrate_theta(const ThetaIntegrand& f, const GridSpec& grid, double T, int* node_count) {
  const int n = grid.n;
  const int k = static_cast<int>(f.L.cols());
  const double L = 2.5 * T;
  double w0 = 0.0;
  for (int i = 0; i < n; i += std::max(1, n / 64))
    for (int j = 0; j < n; j += std::max(1, n / 64)) {
      const Vec v = f.L.transpose() * vec2(grid.x(i), grid.x(j));
      w0 = std::max(w0, v.norm());
    }
  w0 += std::abs(grid.h());  // edge allowance for the subsampled bound
  const double qn = k ? f.Q.norm() : 0.0;
  const double q_other = k == 2 ? qn * L : 0.0;  // the other axis can reach its full range
  const std::vector<Panel> panels = axis_panels(L, w0 + q_other, qn);

  CMat acc = CMat::Zero(n, n);
  double running = 0.0;
  int used = 0;
  // Rings of panels ordered by distance from theta = 0; stop once a whole ring is negligible
  // against the running maximum of |a cutoff|.
  const std::size_t P = panels.size();
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> rings(P);
  if (k == 1) {
    for (std::size_t a = 0; a < P; ++a) rings[a].push_back({a, 0});
  } else {
    for (std::size_t a = 0; a < P; ++a)
      for (std::size_t b = 0; b < P; ++b) rings[std::max(a, b)].push_back({a, b});
  }
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = grid.x(i);
  for (std::size_t r = 0; r < P; ++r) {
    double ring_max = 0.0;
    for (const auto& [pa, pb] : rings[r]) {
      const Panel& A = panels[pa];
      const Panel& B = panels[pb];
      const std::size_t nb = k == 2 ? B.nodes.size() : 1;
      for (std::size_t ia = 0; ia < A.nodes.size(); ++ia)
        for (std::size_t ib = 0; ib < nb; ++ib) {
          double th[2] = {A.nodes[ia], k == 2 ? B.nodes[ib] : 0.0};
          const double wgt = A.weights[ia] * (k == 2 ? B.weights[ib] : 1.0);
          double t4 = 0.0;
          {
            double s2 = th[0] * th[0] + (k == 2 ? th[1] * th[1] : 0.0);
            t4 = s2 * s2 / (T * T * T * T);
          }
          const double cut = std::exp(-t4);
          Eigen::Map<const Vec> tv(th, k);
          const Vec Lt = f.L * tv;
          const double qq = 0.5 * tv.dot(f.Q * tv);
          CVec ex(n), ey(n);
          for (int i = 0; i < n; ++i) {
            ex(i) = std::exp(I_unit * (Lt(0) * xs[static_cast<std::size_t>(i)] + qq));
            ey(i) = std::exp(I_unit * (Lt(1) * xs[static_cast<std::size_t>(i)]));
          }
          double node_max = 0.0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              const cplx a = f.amp(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)], th) * cut;
              node_max = std::max(node_max, std::abs(a));
              acc(i, j) += wgt * a * ex(i) * ey(j);
            }
          ring_max = std::max(ring_max, node_max);
          ++used;
        }
    }
    running = std::max(running, ring_max);
    const double reached = panels[r].centre_abs;
    if (reached > 2.0 && ring_max <= 1e-17 * running) break;
  }
  if (node_count) *node_count = used;
  return acc;
}

/// Closed-form integrals of the eliminated directions are valid when the amplitude does not
/// depend on them; checked on deterministic probe points.
inline bool independent_of(const ShubinSymbol& a, const Mat& V, int eliminated, int d2, double R) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-R, R);
  std::normal_distribution<double> nt(0.0, 3.0);
  const int N = static_cast<int>(V.rows());
  for (int s = 0; s < 32; ++s) {
    std::vector<double> z(static_cast<std::size_t>(d2 + N)), z0;
    for (int i = 0; i < d2; ++i) z[static_cast<std::size_t>(i)] = ux(rng);
    Vec tp(N);
    for (int i = 0; i < N; ++i) tp(i) = nt(rng);
    z0 = z;
    Vec tp0 = tp;
    tp0.head(eliminated).setZero();
    const Vec t1 = V * tp, t0 = V * tp0;
    for (int i = 0; i < N; ++i) {
      z[static_cast<std::size_t>(d2 + i)] = t1(i);
      z0[static_cast<std::size_t>(d2 + i)] = t0(i);
    }
    const cplx v1 = a(std::span<const double>(z)), v0 = a(std::span<const double>(z0));
    if (std::abs(v1 - v0) > 1e-12 * std::max(1.0, std::abs(v0))) return false;
  }
  return true;
}

inline CMat oscillatory_kernel(const Oscillatory& o, const GridSpec& grid, OscQuadrature* info) {
  const QuadraticPhase& p = o.phase;
  const int n = grid.n;
  if (p.d != 1) throw DimensionError("fio_kernel: kernels are evaluated for d = 1");
  if (p.N > 2) throw PreconditionError("fio_kernel: at most two fiber variables are supported");
  guard_dense(static_cast<std::size_t>(n) * n, "fio_kernel");
  OscQuadrature q;
  auto quadratic = [&](const Mat& F, int i, int j) {
    const Vec X = vec2(grid.x(i), grid.x(j));
    return std::exp(0.5 * I_unit * X.dot(F * X));
  };
  CMat K(n, n);
  if (p.N == 0) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K(i, j) = quadratic(p.F, i, j) * o.amplitude(grid.x(i), grid.x(j));
    if (info) *info = q;
    return K;
  }
  const ReductionRecord rec = reduce_phase(p);
  const int ne = static_cast<int>(rec.eliminated.size());
  const bool fresnel = ne > 0 && independent_of(o.amplitude, rec.rotation, ne, 2, grid.R);
  ThetaIntegrand f;
  Mat Fq = p.F;
  const Mat V = rec.rotation;
  const int N = p.N;
  const ShubinSymbol& a = o.amplitude;
  if (fresnel) {
    for (const auto& e : rec.eliminated)
      q.prefactor *= std::sqrt(2 * pi / std::abs(e.q)) * std::exp(I_unit * (pi / 4) * (e.q > 0 ? 1.0 : -1.0));
    q.eliminated = ne;
    Fq = rec.reduced.F;
    f.L = rec.reduced.L;
    f.Q = Mat::Zero(rec.n, rec.n);
    f.amp = [&a, V, ne, N](double x, double y, const double* th) {
      Vec tp = Vec::Zero(N);
      for (int i = ne; i < N; ++i) tp(i) = th[i - ne];
      const Vec t = V * tp;
      std::array<double, 4> z{x, y, 0.0, 0.0};
      for (int i = 0; i < N; ++i) z[static_cast<std::size_t>(2 + i)] = t(i);
      return a(std::span<const double>(z.data(), static_cast<std::size_t>(2 + N)));
    };
  } else {
    f.L = p.L;
    f.Q = p.Q;
    f.amp = [&a, N](double x, double y, const double* th) {
      std::array<double, 4> z{x, y, th[0], N > 1 ? th[1] : 0.0};
      return a(std::span<const double>(z.data(), static_cast<std::size_t>(2 + N)));
    };
  }
  if (f.L.cols() == 0) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K(i, j) = q.prefactor * quadratic(Fq, i, j) * f.amp(grid.x(i), grid.x(j), nullptr);
    if (info) *info = q;
    return K;
  }
  double T = 8.0;
  int nodes = 0;
  CMat prev = integrate_theta(f, grid, T, &nodes);
  double change = std::numeric_limits<double>::infinity();
  for (int dbl = 1; dbl <= 3; ++dbl) {
    T *= 2;
    CMat next = integrate_theta(f, grid, T, &nodes);
    change = (next - prev).norm() / std::max(next.norm(), 1e-300);
    prev = std::move(next);
    q.doublings = dbl;
    if (change < 1e-6) break;
  }
  q.T = T;
  q.eps = 1.0 / T;
  q.nodes = nodes;
  q.estimate = change;
  if (info) *info = q;
  if (!(change < 1e-6))
    throw QuadratureError("fio_kernel: oscillatory integral not converged after 3 doublings (relative change " +
                          std::to_string(change) + ")");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = q.prefactor * quadratic(Fq, i, j) * prev(i, j);
  return K;
}

}  // namespace detail

/// C-infinity step: 1 for t <= 0, 0 for t >= 1.
inline double smooth_step(double t) {
  if (t <= 0) return 1.0;
  if (t >= 1) return 0.0;
  const double a = std::exp(-1.0 / (1 - t)), c = std::exp(-1.0 / t);
  return a / (a + c);
}

/// Kernel samples of b^w mu(chi) for free chi and an analytic symbol. The columns
/// mu(chi) delta_y are exact chirps; b^w acts on them on a grid of twice the extent and
/// half the spacing, after a taper that is 1 on |x| <= R + 1, so periodic wrap-around never
/// reaches the original box.
/// Largest local frequency of the chirp columns on the extended grid, over its Nyquist limit.
inline double free_kernel_load(const SymplecticMatrix& chi, const GridSpec& grid) {
  const GridSpec ext(1, 4 * grid.n, 2 * grid.R);
  const Mat F = free_phase_matrix(chi);
  return (std::abs(F(0, 0)) * (ext.R - 1.0) + std::abs(F(0, 1)) * grid.R) / ext.nyquist();
}

inline CMat free_factored_kernel(const ShubinSymbol& b, const SymplecticMatrix& chi, const GridSpec& grid) {
  const int n = grid.n;
  const GridSpec ext(1, 4 * n, 2 * grid.R);
  const double reach = ext.R - 1.0;
  const double freq = free_kernel_load(chi, grid) * ext.nyquist();
  if (freq > 0.9 * ext.nyquist())
    throw PreconditionError("free_factored_kernel: chirp columns are not resolved (local frequency " +
                            std::to_string(freq) + ")");
  const OperatorMatrix mu = mu_free(chi, ext);
  auto taper = [&](double x) {
    return smooth_step((std::abs(x) - (grid.R + 1.0)) / (reach - grid.R - 1.0));
  };
  CMat cols(ext.n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < ext.n; ++k) cols(k, j) = mu.M(k, n + 2 * j) / ext.h() * taper(ext.x(k));
  const CMat full = b.kind() == SymbolKind::constant ? CMat(b.constant_value() * cols)
                                                     : CMat(weyl_kernel(b, ext).M * cols);
  CMat K(n, n);
  for (int i = 0; i < n; ++i) K.row(i) = full.row(n + 2 * i);
  return K;
}

/// Operator matrix of a spec on a one-dimensional grid (quadrature weight folded in).
inline OperatorMatrix fio_operator(const FioSpec& s, const GridSpec& grid, OscQuadrature* info = nullptr) {
  if (grid.d != 1) throw DimensionError("fio_operator: operators act on d = 1 grids");
  if (s.is_oscillatory()) return {grid, detail::oscillatory_kernel(s.osc(), grid, info) * grid.h()};
  const Factored& f = s.fac();
  return quantize(f.b, grid) * mu_general(f.chi, grid).op;
}

/// Kernel samples K(x_i, y_j) on the 2-dimensional grid built from `grid`. Oscillatory
/// specs are evaluated pointwise; factored specs with free chi and an analytic symbol use
/// exact chirp columns when the grid resolves them; otherwise the grid operator divided by h (a discrete distribution
/// for non-free chi).
inline GridFunction fio_kernel(const FioSpec& s, const GridSpec& grid, OscQuadrature* info = nullptr) {
  if (!s.is_oscillatory()) {
    const Factored& f = s.fac();
    const auto* b = std::get_if<ShubinSymbol>(&f.b);
    if (b && is_free(f.chi) && free_kernel_load(f.chi, grid) <= 0.9) return kernel_function(free_factored_kernel(*b, f.chi, grid), grid);
  }
  return kernel_function(fio_operator(s, grid, info).kernel(), grid);
}

/// c with K ~ c mu(chi) on the packet family, and the relative misfit.
struct PhaseConstant {
  cplx c = 1.0;
  double residual = 0.0;
};

inline PhaseConstant measure_phase_constant(const OperatorMatrix& K, const SymplecticMatrix& chi) {
  const OperatorMatrix mu = mu_general(chi, K.spec).op;
  cplx num = 0.0;
  double den = 0.0;
  const auto fam = test_family(K.spec);
  for (const auto& f : fam) {
    const CVec u = mu.M * f.values, v = K.M * f.values;
    num += u.dot(v);
    den += u.squaredNorm();
  }
  PhaseConstant pc;
  pc.c = num / den;
  double r = 0.0, ref = 0.0;
  for (const auto& f : fam) {
    r = std::max(r, interior_norm(K.spec, K.M * f.values - pc.c * (mu.M * f.values)));
    ref = std::max(ref, interior_norm(K.spec, K.M * f.values));
  }
  pc.residual = r / std::max(ref, 1e-300);
  return pc;
}

/// Packet-family relative difference of two operators read on |x| <= R/2.
inline double operator_residual(const OperatorMatrix& P, const OperatorMatrix& Q) {
  double diff = 0.0, ref = 0.0;
  for (const auto& f : test_family(P.spec)) {
    diff = std::max(diff, interior_norm(P.spec, P.M * f.values - Q.M * f.values));
    ref = std::max(ref, interior_norm(P.spec, Q.M * f.values));
  }
  return diff / std::max(ref, 1e-300);
}

// ---------------------------------------------------------------------------
// Factorization K = b^w mu(chi)

struct FactorizationReport {
  SampledSymbol b;
  ShubinDecayReport decay;
  double residual = 0.0;  // packet family, read on |x| <= R/2
  bool in_class = false;
  Status status = Status::inconclusive;
};

/// C-infinity radial step: 1 on |z| <= r0, 0 on |z| >= r1.
inline ShubinSymbol radial_cutoff(double r0, double r1) {
  return ShubinSymbol::custom(2, 0.0, [r0, r1](std::span<const double> z) {
    const double t = (std::hypot(z[0], z[1]) - r0) / (r1 - r0);
    if (t <= 0) return cplx(1.0);
    if (t >= 1) return cplx(0.0);
    const double a = std::exp(-1.0 / (1 - t)), c = std::exp(-1.0 / t);
    return cplx(a / (a + c));
  });
}

/// Radius inside which a recovered symbol is reported; the compression cutoff rises to
/// 0.8 min(R, nyquist) beyond it.
inline double factorization_radius(const GridSpec& g) { return 0.65 * std::min(g.R, g.nyquist()); }

/// b from K = b^w mu(chi). The sampled kernel acts correctly only on states resolved by the
/// grid, so K mu^{-1} is compressed by a phase-space cutoff P^w (P = 1 on |z| <= R/2) before
/// its symbol is read: a polynomial b is unchanged where P = 1, and content far out in
/// phase space cannot leave interference terms in the interior.
inline FactorizationReport fio_factorize(const GridFunction& K, const SymplecticMatrix& chi, double m, double rho = 1.0) {
  const OperatorMatrix op = kernel_operator(K);
  const GridSpec& g = op.spec;
  const OperatorMatrix mu = mu_general(chi, g).op;
  const double r0 = factorization_radius(g);
  const OperatorMatrix P = weyl_kernel(radial_cutoff(r0, 0.95 * std::min(g.R, g.nyquist())), g);
  FactorizationReport rep{symbol_from_kernel(P * op * mu.adjoint() * P), {}, 0.0, false, Status::inconclusive};
  // Recovered symbols carry ~1e-4 relative noise that second difference quotients amplify
  // by up to (h dxi)^{-1}; derivative shells under 1e-2 of the symbol scale count as absent.
  rep.decay = shubin_decay_test(rep.b.on_grid(), g, m, rho, 2.0, 0.5 * g.R, 8, 0.3, 1e-2);
  const OperatorMatrix recon = synthesize(rep.b) * mu;
  rep.residual = operator_residual(recon, op);
  if (rep.residual > 0.1) {
    rep.status = Status::fail;
  } else if (rep.decay.status == Status::inconclusive) {
    rep.status = Status::inconclusive;
  } else {
    rep.in_class = rep.decay.status == Status::pass;
    rep.status = rep.in_class ? Status::pass : Status::fail;
  }
  return rep;
}

/// max over |z| <= radius of |b - c a| / max |a| with the unit c that best aligns b to a.
inline double phase_aligned_error(const CMat& b, const CMat& a, const GridSpec& g, double radius) {
  cplx num = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int k = 0; k < g.n; ++k)
      if (std::hypot(g.x(i), g.xi(k)) <= radius) num += std::conj(a(i, k)) * b(i, k);
  const cplx c = std::abs(num) > 0 ? num / std::abs(num) : cplx(1.0);
  double err = 0.0, ref = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int k = 0; k < g.n; ++k)
      if (std::hypot(g.x(i), g.xi(k)) <= radius) {
        err = std::max(err, std::abs(b(i, k) - c * a(i, k)));
        ref = std::max(ref, std::abs(a(i, k)));
      }
  return err / std::max(ref, 1e-300);
}

inline FioSpec to_factored(const FioSpec& s, const GridSpec& grid) {
  if (!s.is_oscillatory()) return s;
  const SymplecticMatrix chi = s.chi();
  FactorizationReport rep = fio_factorize(fio_kernel(s, grid), chi, s.m, s.rho);
  return FioSpec::factored(std::move(rep.b), chi, s.m, s.rho);
}

// ---------------------------------------------------------------------------
// Composition and adjoint

struct CompositionResult {
  FioSpec spec;
  double residual = 0.0;  // interior packet residual against the matrix product
  cplx phase = 1.0;       // mu(chi1) mu(chi2) = phase mu(chi1 chi2), absorbed into b
  Status status = Status::inconclusive;
};

/// (b1, chi1) o (b2, chi2) = (c b1 # (b2 o chi1^{-1}), chi1 chi2).
inline CompositionResult fio_compose(const FioSpec& s1, const FioSpec& s2, const GridSpec& grid) {
  const FioSpec f1 = to_factored(s1, grid), f2 = to_factored(s2, grid);
  const SymplecticMatrix& chi1 = f1.fac().chi;
  const SymplecticMatrix& chi2 = f2.fac().chi;
  const SymplecticMatrix chi = chi1 * chi2;
  const OperatorMatrix mu1 = mu_general(chi1, grid).op, mu2 = mu_general(chi2, grid).op;
  const OperatorMatrix mu12 = mu_general(chi, grid).op;
  const OperatorMatrix W1 = quantize(f1.fac().b, grid);
  OperatorMatrix W2;
  if (const auto* a = std::get_if<ShubinSymbol>(&f2.fac().b))
    W2 = weyl_kernel(a->composed_with(symplectic_inverse(chi1).matrix()), grid);
  else
    W2 = mu1 * quantize(f2.fac().b, grid) * mu1.adjoint();
  CompositionResult out{f1, 0.0, 1.0, Status::inconclusive};
  residual_mod_phase(mu1 * mu2, mu12, test_family(grid), &out.phase);
  SampledSymbol b = symbol_from_kernel(W1 * W2);
  b.A *= out.phase;
  out.spec = FioSpec::factored(b, chi, f1.m + f2.m, std::min(f1.rho, f2.rho));
  const OperatorMatrix direct = fio_operator(f1, grid) * fio_operator(f2, grid);
  out.residual = operator_residual(synthesize(b) * mu12, direct);
  out.status = out.residual <= 0.1 ? Status::pass : Status::fail;
  return out;
}

/// Formal adjoint of an oscillatory spec: phase -phi(y, x, theta), amplitude conj a(y, x, theta).
inline FioSpec fio_adjoint(const FioSpec& s) {
  if (!s.is_oscillatory()) throw PreconditionError("fio_adjoint: expects the oscillatory form");
  const QuadraticPhase& p = s.osc().phase;
  const int d = p.d;
  Mat S = Mat::Zero(2 * d, 2 * d);
  S.topRightCorner(d, d) = Mat::Identity(d, d);
  S.bottomLeftCorner(d, d) = Mat::Identity(d, d);
  QuadraticPhase q(-(S * p.F * S), -(S * p.L), -p.Q);
  const ShubinSymbol a = s.osc().amplitude;
  const int dim = a.dim();
  ShubinSymbol b = ShubinSymbol::custom(dim, a.order(), [a, d](std::span<const double> z) {
    std::vector<double> w(z.begin(), z.end());
    for (int i = 0; i < d; ++i) std::swap(w[static_cast<std::size_t>(i)], w[static_cast<std::size_t>(d + i)]);
    return std::conj(a(std::span<const double>(w)));
  }, a.rho());
  return FioSpec::oscillatory(std::move(q), std::move(b), s.m, s.rho);
}

// ---------------------------------------------------------------------------
// Phase-space characterization (shared with Lagrangian membership)

/// One configuration for every field-based test.
struct CharConfig {
  Window window = Window::psi0();
  double x_box = 4.0;
  double xi_box = 8.5;
  int stride = 2;
  double delta = 0.1;          // directional difference step
  double floor_rel = 1e-8;     // window mass beyond the grid edge at 6 widths is ~1.5e-8
  double along_margin = 0.5;
  DecayWindow window_shells{};
};

/// Boxes keep the window 6 widths inside the grid in x and 4 below Nyquist in xi.
inline CharConfig default_char_config(const GridSpec& s) {
  CharConfig c;
  c.x_box = std::max(s.R - 6.0, 0.4 * s.R);
  c.xi_box = s.nyquist() - 4.0;
  c.stride = s.d == 2 ? 2 : 1;
  return c;
}

struct OrderVerdict {
  int k = 0;
  DecayProfile profile;
  double along_bound = 0.0;
  bool off_ok = false, along_ok = false;
  Status status = Status::inconclusive;
};

struct CharReport {
  Status status = Status::inconclusive;
  double scale = 0.0;
  std::vector<OrderVerdict> orders;
};

inline CharReport characterize_field(const GridFunction& u, const Twist& twist, const LagrangianSubspace& lambda,
                                     const LagrangianSubspace& transversal, double m, double rho, int k_max,
                                     double N_max, const CharConfig& cfg) {
  FieldPlan plan{cfg.window, twist, cfg.x_box, cfg.xi_box, cfg.stride};
  const Mat pts = field_points(u.spec, plan);
  std::vector<Vec> dirs;
  for (int c = 0; c < lambda.n(); ++c) dirs.push_back(lambda.basis().col(c));
  const std::vector<Vec> fields = directional_fields(u, plan, dirs, k_max, cfg.delta);
  CharReport rep;
  rep.scale = fields[0].maxCoeff();
  rep.status = Status::pass;
  for (int k = 0; k <= k_max; ++k) {
    OrderVerdict v;
    v.k = k;
    // Difference quotients amplify the floor by (2 delta)^{-k}.
    const double floor = std::max(rep.scale, 1e-300) * cfg.floor_rel * std::pow(2 * cfg.delta, -k);
    v.profile = decay_profile(pts, fields[static_cast<std::size_t>(k)], lambda, transversal, floor, cfg.window_shells);
    v.along_bound = m - rho * k + cfg.along_margin;
    if (v.profile.off.status == Status::inconclusive || v.profile.along.status == Status::inconclusive) {
      v.status = Status::inconclusive;
    } else {
      // A rising run of shells is mass away from Lambda even when the box cuts it off later.
      v.off_ok = v.profile.off.negligible || (v.profile.off.slope <= -N_max && v.profile.off.local_slope <= 0.0);
      v.along_ok = v.profile.along.negligible || v.profile.along.slope <= v.along_bound;
      v.status = v.off_ok && v.along_ok ? Status::pass : Status::fail;
    }
    rep.status = combine(rep.status, v.status);
    rep.orders.push_back(std::move(v));
  }
  return rep;
}

/// Twisted field of a kernel on R^{2d} (d = 1) against Lambda'_chi, with Lambda'_{-chi} as
/// the transversal growth axis.
inline CharReport kernel_characterization_check(const GridFunction& K, const SymplecticMatrix& chi, double m,
                                                double rho, int k_max, double N_max,
                                                const std::optional<CharConfig>& cfg = std::nullopt) {
  if (K.spec.d != 2 || chi.d() != 1) throw DimensionError("kernel_characterization_check: d = 1 kernels only");
  const CharConfig c = cfg ? *cfg : default_char_config(K.spec);
  return characterize_field(K, twist_chi(chi), twisted_graph_lagrangian(chi), twisted_graph_lagrangian(-chi), m, rho,
                            k_max, N_max, c);
}

// ---------------------------------------------------------------------------
// Wave front checks

struct KernelWfReport {
  Status status = Status::inconclusive;
  int bins = 8;                 // angle from Lambda in [0, pi/2]
  std::vector<double> slopes;
  std::vector<int> sectors;     // bins that do not decay
  double tol = 0.4;             // admissible angle from Lambda
};

/// Bins |T_g K| by the angle between z and Lambda'_chi; bins whose shell maxima over r in
/// [off_lo, off_hi] decay slower than r^{-N_max} form the estimate, which must stay within
/// `tol` of Lambda'_chi.
inline KernelWfReport wf_kernel_check(const GridFunction& K, const SymplecticMatrix& chi, double N_max = 2.0,
                                      double tol = 0.4, const std::optional<CharConfig>& cfg = std::nullopt) {
  const CharConfig c = cfg ? *cfg : default_char_config(K.spec);
  FieldPlan plan{c.window, std::nullopt, c.x_box, c.xi_box, c.stride};
  const Mat pts = field_points(K.spec, plan);
  const Vec vals = field_values(K, plan, Vec::Zero(pts.cols())).cwiseAbs();
  const LagrangianSubspace lam = twisted_graph_lagrangian(chi);
  KernelWfReport rep;
  rep.tol = tol;
  const double floor = std::max(vals.maxCoeff(), 1e-300) * c.floor_rel;
  std::vector<std::vector<double>> rad(static_cast<std::size_t>(rep.bins)), val(static_cast<std::size_t>(rep.bins));
  for (Eigen::Index p = 0; p < pts.rows(); ++p) {
    const Vec z = pts.row(p).transpose();
    const Vec proj = lam.basis() * (lam.basis().transpose() * z);
    const double ang = std::atan2((z - proj).norm(), proj.norm());
    const auto b = static_cast<std::size_t>(std::min(rep.bins - 1, static_cast<int>(ang / (pi / 2) * rep.bins)));
    rad[b].push_back(z.norm());
    val[b].push_back(vals(p));
  }
  rep.status = Status::pass;
  for (int b = 0; b < rep.bins; ++b) {
    const auto& vv = val[static_cast<std::size_t>(b)];
    const ShellProfile sp =
        shell_profile(rad[static_cast<std::size_t>(b)], Eigen::Map<const Vec>(vv.data(), static_cast<Eigen::Index>(vv.size())),
                      c.window_shells.off_lo, c.window_shells.off_hi, floor, c.window_shells.shells);
    rep.slopes.push_back(sp.slope);
    if (sp.status == Status::inconclusive) {
      rep.status = combine(rep.status, Status::inconclusive);
      continue;
    }
    if (!sp.negligible && sp.slope > -N_max) {
      rep.sectors.push_back(b);
      if (b * (pi / 2) / rep.bins >= tol) rep.status = combine(rep.status, Status::fail);
    }
  }
  return rep;
}

struct PropagationReport {
  Status status = Status::inconclusive;
  WavefrontReport in, out;
  std::vector<int> mapped;  // chi applied to the sectors of the input
};

/// Circular distance between sector indices.
inline int sector_distance(int a, int b, int bins) {
  const int d = std::abs(a - b) % bins;
  return std::min(d, bins - d);
}

/// WF of the output lies within one sector of chi applied to WF of the input.
inline PropagationReport wf_propagation_check(const FioSpec& spec, const GridFunction& u, double N_max = 2.0) {
  PropagationReport rep;
  rep.in = wavefront_estimate(u, Window::psi0(), N_max);
  rep.out = wavefront_estimate(fio_operator(spec, u.spec).apply(u), Window::psi0(), N_max);
  if (rep.in.status == Status::inconclusive || rep.out.status == Status::inconclusive) return rep;
  const Mat M = spec.chi().matrix();
  for (int s : rep.in.sectors) {
    const double a = sector_angle(s, rep.in.bins);
    const Vec w = M * vec2(std::cos(a), std::sin(a));
    rep.mapped.push_back(sector_of(std::atan2(w(1), w(0)), rep.in.bins));
  }
  bool ok = true;
  for (int s : rep.out.sectors) {
    bool near = false;
    for (int t : rep.mapped) near = near || sector_distance(s, t, rep.out.bins) <= 1;
    ok = ok && near;
  }
  // Every mapped direction must also be present in the output (singularities do not vanish
  // under an invertible operator).
  for (int t : rep.mapped) {
    bool near = false;
    for (int s : rep.out.sectors) near = near || sector_distance(s, t, rep.out.bins) <= 1;
    ok = ok && near;
  }
  rep.status = ok ? Status::pass : Status::fail;
  return rep;
}

/// |T_g K|(x, 0, 0, eta) for a kernel on R^2: rows follow the dual grid eta, columns the x grid.
/// The inner transform in the second variable is one DFT per row of K.
inline Mat kernel_fbi_slice(const GridFunction& K, const Window& g = Window::psi0()) {
  if (K.spec.d != 2) throw DimensionError("kernel_fbi_slice: kernel must live on R^2");
  const GridSpec s = K.spec.with_dim(1);
  const int n = s.n;
  const GridFunction gs = g.sample(s);
  CMat A(n, n);  // A(s_k, eta_m) = sum_t K(s_k, t) conj g(t) e^{-i eta_m t}
  for (int k = 0; k < n; ++k) {
    CVec row(n);
    for (int t = 0; t < n; ++t) row(t) = K.at(k, t) * std::conj(gs.values(t));
    A.row(k) = centered_dft(row).transpose();
  }
  CMat G(n, n);  // G(x_i, s_k) = conj g(s_k - x_i)
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) G(i, k) = std::conj(g(s.x(k) - s.x(i)));
  const CMat T = (G * A) * (s.h() * s.h() / (2 * pi));
  return T.cwiseAbs().transpose();
}

/// max over the family of qs_norm(T f, s - m) / qs_norm(f, s).
inline double sobolev_ratio(const OperatorMatrix& T, double s, double m, const std::vector<GridFunction>& family) {
  double worst = 0.0;
  for (const auto& f : family) worst = std::max(worst, qs_norm(T.apply(f), s - m) / qs_norm(f, s));
  return worst;
}

}  // namespace fiolab
