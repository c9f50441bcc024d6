#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fiolab/phase.hpp"
#include "fiolab/weyl.hpp"

namespace fiolab {

/// Elementary metaplectic factor. Chirp acts on whichever grid (x or dual) is current when
/// it is applied; Fourier moves samples from the x grid to the dual grid.
struct MetaplecticFactor {
  enum class Kind { chirp, fourier, inverse_fourier, linear, free_kernel };
  Kind kind;
  Mat param;  // chirp: F; linear: A; free_kernel: chi

  Mat symplectic() const {
    const int d = kind == Kind::free_kernel ? static_cast<int>(param.rows() / 2)
                                            : (param.size() ? static_cast<int>(param.rows()) : 1);
    switch (kind) {
      case Kind::chirp: return chirp_matrix(param).matrix();
      case Kind::fourier: return standard_J_matrix(d);
      case Kind::inverse_fourier: return -standard_J_matrix(d);
      case Kind::linear: return linear_lift(param).matrix();
      case Kind::free_kernel: return param;
    }
    return Mat();
  }
};

inline const char* to_string(MetaplecticFactor::Kind k) {
  switch (k) {
    case MetaplecticFactor::Kind::chirp: return "chirp";
    case MetaplecticFactor::Kind::fourier: return "fourier";
    case MetaplecticFactor::Kind::inverse_fourier: return "inverse_fourier";
    case MetaplecticFactor::Kind::linear: return "linear";
    case MetaplecticFactor::Kind::free_kernel: return "free_kernel";
  }
  return "unknown";
}

/// chi = factors[0] * factors[1] * ...; the rightmost factor acts first.
struct MetaplecticFactorization {
  SymplecticMatrix chi = SymplecticMatrix::identity(1);
  std::vector<MetaplecticFactor> factors;
  cplx phase{1.0, 0.0};  // unit scalar applied after the factor product

  Mat product() const {
    Mat P = Mat::Identity(2 * chi.d(), 2 * chi.d());
    for (const auto& f : factors) P = P * f.symplectic();
    return P;
  }
};

enum class PhaseFix { gaussian, none };

// ---------------------------------------------------------------------------
// Elementary operators on a one-dimensional grid

inline OperatorMatrix mu_chirp(double F, const GridSpec& spec) {
  OperatorMatrix out{spec, CMat::Zero(spec.n, spec.n)};
  for (int k = 0; k < spec.n; ++k) out.M(k, k) = std::exp(0.5 * I_unit * F * spec.x(k) * spec.x(k));
  return out;
}

/// Quadrature kernel h (2 pi)^{-1/2} exp(-i x_j x_k) of the unitary Fourier transform.
inline OperatorMatrix mu_fourier(const GridSpec& spec) {
  const int n = spec.n;
  OperatorMatrix out{spec, CMat(n, n)};
  const double c = spec.h() / std::sqrt(2 * pi);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) out.M(j, k) = c * std::exp(-I_unit * (spec.x(j) * spec.x(k)));
  return out;
}

/// Periodic band-limited interpolation kernel sin(pi u) / (n tan(pi u / n)).
inline double periodic_sinc(double u, int n) {
  const double a = std::sin(pi * u);
  const double b = n * std::tan(pi * u / n);
  if (std::abs(b) < 1e-14) return 1.0;
  return a / b;
}

/// |A|^{-1/2} f(A^{-1} x) with spectral resampling.
inline OperatorMatrix mu_linear(double A, const GridSpec& spec) {
  if (std::abs(A) < 1e-12) throw SingularBlockError("mu_linear: singular A", std::numeric_limits<double>::infinity());
  const int n = spec.n;
  OperatorMatrix out{spec, CMat(n, n)};
  const double c = 1.0 / std::sqrt(std::abs(A));
  if (std::abs(std::abs(A) - 1.0) < 1e-15) {
    // Reflection or identity: exact index map k -> -k modulo n (periodic grid).
    out.M.setZero();
    for (int j = 0; j < n; ++j) out.M(j, A > 0 ? j : (n - j) % n) = 1.0;
    return out;
  }
  for (int j = 0; j < n; ++j) {
    const double y = spec.x(j) / A;
    for (int k = 0; k < n; ++k) out.M(j, k) = c * periodic_sinc((y - spec.x(k)) / spec.h(), n);
  }
  return out;
}

/// Gaussian image of psi_0 under chi: exp(i M x^2 / 2) normalized, M = (iC - D)/(iA - B).
inline GridFunction gaussian_image(const SymplecticMatrix& chi, const GridSpec& spec) {
  if (chi.d() != 1) throw DimensionError("gaussian_image: one-dimensional only");
  const cplx M = (I_unit * chi.C()(0, 0) - chi.D()(0, 0)) / (I_unit * chi.A()(0, 0) - chi.B()(0, 0));
  const double norm = std::pow(M.imag() / pi, 0.25);
  return GridFunction::sample(spec, [M, norm](std::span<const double> x) {
    return norm * std::exp(0.5 * I_unit * M * x[0] * x[0]);
  });
}

/// Rotates the operator so that <mu psi_0, psi_chi> is real and positive; returns the factor.
inline cplx apply_phase_fix(OperatorMatrix& op, const SymplecticMatrix& chi) {
  const GridFunction p0 = psi0(op.spec);
  const cplx c = op.apply(p0).inner(gaussian_image(chi, op.spec));
  if (std::abs(c) < 1e-12) return 1.0;
  const cplx u = std::conj(c) / std::abs(c);
  op.M *= u;
  return u;
}

/// Kernel quadrature h (2 pi)^{-1/2} |B|^{-1/2} exp(i phi(x_j, x_k)) for a free matrix.
inline OperatorMatrix mu_free(const SymplecticMatrix& chi, const GridSpec& spec, PhaseFix fix = PhaseFix::gaussian) {
  if (chi.d() != 1) throw DimensionError("mu_free: one-dimensional only");
  const Mat F = free_phase_matrix(chi);
  const double B = chi.B()(0, 0);
  const int n = spec.n;
  OperatorMatrix out{spec, CMat(n, n)};
  const double c = spec.h() / std::sqrt(2 * pi * std::abs(B));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      const double x = spec.x(j), y = spec.x(k);
      const double ph = 0.5 * (F(0, 0) * x * x + 2 * F(0, 1) * x * y + F(1, 1) * y * y);
      out.M(j, k) = c * std::exp(I_unit * ph);
    }
  if (fix == PhaseFix::gaussian) apply_phase_fix(out, chi);
  return out;
}

// ---------------------------------------------------------------------------
// General construction through exactly unitary grid factors

namespace detail {

inline MetaplecticFactor chirp_factor(double p) { return {MetaplecticFactor::Kind::chirp, Mat::Constant(1, 1, p)}; }
inline MetaplecticFactor fourier_factor() { return {MetaplecticFactor::Kind::fourier, Mat()}; }
inline MetaplecticFactor inverse_fourier_factor() { return {MetaplecticFactor::Kind::inverse_fourier, Mat()}; }

/// (I q; 0 I) as inverse Fourier, chirp(-q) on the dual grid, Fourier.
inline void push_upper(std::vector<MetaplecticFactor>& out, double q) {
  out.push_back(inverse_fourier_factor());
  out.push_back(chirp_factor(-q));
  out.push_back(fourier_factor());
}

/// chi = V_p U_q V_r with q = B, r = (A - 1)/B, p = (D - 1)/B.
inline std::vector<MetaplecticFactor> vuv(const Mat& chi) {
  const double A = chi(0, 0), B = chi(0, 1), D = chi(1, 1);
  std::vector<MetaplecticFactor> f;
  f.push_back(chirp_factor((D - 1) / B));
  push_upper(f, B);
  f.push_back(chirp_factor((A - 1) / B));
  return f;
}

/// chi = U_a V_b U_c with b = C, a = (A - 1)/C, c = (D - 1)/C.
inline std::vector<MetaplecticFactor> uvu(const Mat& chi) {
  const double A = chi(0, 0), C = chi(1, 0), D = chi(1, 1);
  std::vector<MetaplecticFactor> f;
  push_upper(f, (A - 1) / C);
  f.push_back(chirp_factor(C));
  push_upper(f, (D - 1) / C);
  return f;
}

/// Largest spectral norm over the partial products applied so far: this bounds how far an
/// intermediate state of a packet near the origin spreads in phase space.
inline double spread_cost(const std::vector<MetaplecticFactor>& f) {
  Mat P = Mat::Identity(2, 2);
  double worst = 1.0;
  for (auto it = f.rbegin(); it != f.rend(); ++it) {
    P = it->symplectic() * P;
    worst = std::max(worst, P.jacobiSvd().singularValues()(0));
  }
  return worst;
}

}  // namespace detail

/// Chooses a chirp/multiplier factorization of a 2x2 symplectic matrix. Candidates are
/// V U V, U V U, the same after a parity factor (-I), and both after a right shear
/// U_t or V_t with t in {+-1/2, +-1, +-2}. The candidate whose intermediate states spread
/// least wins, since spread beyond the grid aliases.
inline MetaplecticFactorization factorize_metaplectic(const SymplecticMatrix& chi, double min_block = 1e-3) {
  if (chi.d() != 1) throw DimensionError("mu_general: one-dimensional only");
  using detail::push_upper;
  std::vector<std::vector<MetaplecticFactor>> candidates;
  auto direct = [&](const Mat& M, const std::vector<MetaplecticFactor>& prefix,
                    const std::vector<MetaplecticFactor>& suffix) {
    auto add = [&](std::vector<MetaplecticFactor> core) {
      std::vector<MetaplecticFactor> f = prefix;
      f.insert(f.end(), core.begin(), core.end());
      f.insert(f.end(), suffix.begin(), suffix.end());
      candidates.push_back(std::move(f));
    };
    if (std::abs(M(0, 1)) >= min_block) add(detail::vuv(M));
    if (std::abs(M(1, 0)) >= min_block) add(detail::uvu(M));
  };
  for (double sgn : {1.0, -1.0}) {
    const Mat M = sgn * chi.matrix();
    std::vector<MetaplecticFactor> prefix;
    if (sgn < 0) prefix.push_back({MetaplecticFactor::Kind::linear, Mat::Constant(1, 1, -1.0)});
    direct(M, prefix, {});
    for (double t : {0.5, -0.5, 1.0, -1.0, 2.0, -2.0}) {
      // M = (M U_t) U_{-t} and M = (M V_t) V_{-t}
      std::vector<MetaplecticFactor> su;
      push_upper(su, -t);
      direct(M * upper_chirp_matrix(Mat::Constant(1, 1, t)).matrix(), prefix, su);
      direct(M * chirp_matrix(Mat::Constant(1, 1, t)).matrix(), prefix, {detail::chirp_factor(-t)});
    }
  }
  if (candidates.empty()) throw Error("mu_general: no admissible factorization");
  std::size_t pick = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (detail::spread_cost(candidates[i]) < detail::spread_cost(candidates[pick]) - 1e-12) pick = i;
  MetaplecticFactorization fac;
  fac.chi = chi;
  fac.factors = candidates[pick];
  return fac;
}

/// Dense operator of a factor list; Fourier factors use the exact centered DFT.
inline OperatorMatrix assemble_factors(const std::vector<MetaplecticFactor>& factors, const GridSpec& spec) {
  const int n = spec.n;
  CMat op = CMat::Identity(n, n);
  bool on_dual = false;
  // Apply right-to-left to the columns of the identity.
  for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
    switch (it->kind) {
      case MetaplecticFactor::Kind::chirp: {
        const double p = it->param(0, 0);
        for (int k = 0; k < n; ++k) {
          const double v = on_dual ? spec.xi(k) : spec.x(k);
          op.row(k) *= std::exp(0.5 * I_unit * p * v * v);
        }
        break;
      }
      case MetaplecticFactor::Kind::fourier:
        if (on_dual) throw Error("assemble_factors: Fourier applied twice");
        for (int c = 0; c < n; ++c) op.col(c) = fourier_to_dual(spec, op.col(c));
        on_dual = true;
        break;
      case MetaplecticFactor::Kind::inverse_fourier:
        if (!on_dual) throw Error("assemble_factors: inverse Fourier on the x grid");
        for (int c = 0; c < n; ++c) op.col(c) = fourier_from_dual(spec, op.col(c));
        on_dual = false;
        break;
      case MetaplecticFactor::Kind::linear:
        op = mu_linear(it->param(0, 0), spec).M * op;
        break;
      case MetaplecticFactor::Kind::free_kernel:
        op = mu_free(SymplecticMatrix(it->param), spec, PhaseFix::none).M * op;
        break;
    }
  }
  if (on_dual) throw Error("assemble_factors: factor list ends on the dual grid");
  return {spec, op};
}

struct MetaplecticOperator {
  OperatorMatrix op;
  MetaplecticFactorization factorization;
};

inline MetaplecticOperator mu_general(const SymplecticMatrix& chi, const GridSpec& spec,
                                      PhaseFix fix = PhaseFix::gaussian) {
  MetaplecticOperator out{OperatorMatrix{spec, CMat()}, factorize_metaplectic(chi)};
  out.op = assemble_factors(out.factorization.factors, spec);
  if (fix == PhaseFix::gaussian) out.factorization.phase = apply_phase_fix(out.op, chi);
  return out;
}

// ---------------------------------------------------------------------------
// Test-vector diagnostics

/// Unit-width Gaussian packets centred on the 3x3 phase-space lattice {-reach, 0, reach}^2.
inline std::vector<GridFunction> test_family(const GridSpec& spec, double reach = 1.5) {
  std::vector<GridFunction> fam;
  for (double x0 : {-reach, 0.0, reach})
    for (double p0 : {-reach, 0.0, reach}) fam.push_back(gaussian_packet(spec, x0, p0));
  return fam;
}

/// max_f | |U f| - |f| | / |f|.
inline double unitarity_defect(const OperatorMatrix& U, const std::vector<GridFunction>& fam) {
  double worst = 0;
  for (const auto& f : fam) worst = std::max(worst, std::abs(U.apply(f).norm() - f.norm()) / f.norm());
  return worst;
}

/// min over |c| = 1 of |P f - c Q f| stacked over the family, relative to the stacked |f|.
inline double residual_mod_phase(const OperatorMatrix& P, const OperatorMatrix& Q, const std::vector<GridFunction>& fam,
                                 cplx* best_c = nullptr) {
  cplx num = 0.0;
  double den = 0.0, fn = 0.0;
  std::vector<std::pair<CVec, CVec>> pairs;
  for (const auto& f : fam) {
    CVec v = P.M * f.values, u = Q.M * f.values;
    num += u.dot(v);
    den += u.squaredNorm();
    fn += f.values.squaredNorm();
    pairs.emplace_back(std::move(v), std::move(u));
  }
  const cplx c = std::abs(num) > 0 ? num / std::abs(num) : cplx(1.0);
  double r = 0.0;
  for (const auto& [v, u] : pairs) r += (v - c * u).squaredNorm();
  if (best_c) *best_c = c;
  (void)den;
  return std::sqrt(r / fn);
}

/// Norm of a grid vector restricted to |x| <= R/2. Periodic quantization of symbols that grow
/// in x leaks a small wrap-around image to the grid edge; residuals are read where it is absent.
inline double interior_norm(const GridSpec& spec, const CVec& v) {
  double acc = 0.0;
  for (int k = 0; k < spec.n; ++k)
    if (std::abs(spec.x(k)) <= 0.5 * spec.R) acc += std::norm(v(k));
  return std::sqrt(acc * spec.h());
}

/// Relative difference between mu^{-1} a^w mu and (a o chi)^w on the test family, read on
/// the interior.
inline double egorov_residual(const SymplecticMatrix& chi, const ShubinSymbol& a, const GridSpec& spec) {
  const OperatorMatrix mu = mu_general(chi, spec).op;
  const OperatorMatrix lhs = mu.adjoint() * weyl_kernel(a, spec) * mu;
  const OperatorMatrix rhs = weyl_kernel(a.composed_with(chi.matrix()), spec);
  double diff = 0, ref = 0;
  for (const auto& f : test_family(spec)) {
    diff = std::max(diff, interior_norm(spec, lhs.M * f.values - rhs.M * f.values));
    ref = std::max(ref, interior_norm(spec, rhs.M * f.values));
  }
  return diff / std::max(ref, 1e-300);
}

}  // namespace fiolab
