#pragma once

#include <vector>

#include "fiolab/fio.hpp"

namespace fiolab {

/// (Y, F) with F replaced by pi_Y F pi_Y, so that Y-perp lies in Ker F.
inline LagrangianParam normalized_param(const LagrangianSubspace& L) {
  LagrangianParam p = L.param() ? *L.param() : L.derive_param();
  const int n = static_cast<int>(p.F.rows());
  const Mat PY = p.Y.cols() ? Mat(p.Y * p.Y.transpose()) : Mat::Zero(n, n);
  p.F = PY * p.F * PY;
  p.F = 0.5 * (p.F + p.F.transpose());
  return p;
}

/// chi_F rot(U) J2^{-1}(d, k) with U = [Y, Y-perp]; maps R^d x {0} onto Lambda. With
/// `flip` the first basis vector of U changes sign, which gives a second valid choice.
inline SymplecticMatrix synthesis_matrix(const LagrangianSubspace& L, bool flip = false) {
  const LagrangianParam p = normalized_param(L);
  const int d = static_cast<int>(p.F.rows());
  const int k = static_cast<int>(p.Y.cols());
  Mat U(d, d);
  U << p.Y, LagrangianSubspace::orthogonal_complement(p.Y, d);
  if (flip) U.col(0) *= -1.0;
  const SymplecticMatrix chi = chirp_matrix(p.F) * rotation_embedding(U) * J2_inverse(d, k);
  const LagrangianSubspace image = LagrangianSubspace::from_span(chi.matrix().leftCols(d));
  if (!subspace_equal(image, L, 1e-9))
    throw PreconditionError("synthesis_matrix: chi_syn does not map R^d x {0} onto the Lagrangian");
  return chi;
}

struct LagrangianDistSpec {
  LagrangianSubspace lambda;
  ShubinSymbol a;  // on R^d
  double m = 0.0;
  double rho = 1.0;
  SymplecticMatrix chi_syn;

  static LagrangianDistSpec make(const LagrangianSubspace& lambda, ShubinSymbol a, double m, double rho = 1.0) {
    if (a.dim() != lambda.n()) throw DimensionError("LagrangianDistSpec: symbol must live on R^d");
    SymplecticMatrix chi = synthesis_matrix(lambda);
    return LagrangianDistSpec{lambda, std::move(a), m, rho, std::move(chi)};
  }
};

/// Line through the origin of T*R at angle alpha, as a Lagrangian with its (Y, F) form.
inline LagrangianSubspace line_lagrangian(double alpha) {
  return LagrangianSubspace::from_span(vec2(std::cos(alpha), std::sin(alpha))).with_param();
}

/// u = mu(chi_syn) a on a one-dimensional grid. In d = 1 the synthesis is either a chirp
/// multiplier (Y = R) or an inverse Fourier transform of a read on the dual grid (Y = {0}),
/// so both are applied exactly instead of through a chirp factorization.
inline GridFunction lagrangian_synthesize(const LagrangianDistSpec& spec, const GridSpec& grid) {
  if (grid.d != 1 || spec.lambda.n() != 1)
    throw DimensionError("lagrangian_synthesize: one-dimensional grids only (kernels on R^2 come from fio_kernel)");
  const LagrangianParam p = normalized_param(spec.lambda);
  const ShubinSymbol& a = spec.a;
  GridFunction u{grid, CVec(grid.n)};
  if (p.Y.cols() == 1) {
    const double s = p.Y(0, 0) > 0 ? 1.0 : -1.0;  // rotation by U = [Y] is the parity when Y = -1
    for (int k = 0; k < grid.n; ++k) {
      const double x = grid.x(k), xs[1] = {s * x};
      u.values(k) = a(std::span<const double>(xs, 1)) * std::exp(0.5 * I_unit * p.F(0, 0) * x * x);
    }
  } else {
    const double s = LagrangianSubspace::orthogonal_complement(p.Y, 1)(0, 0) > 0 ? 1.0 : -1.0;
    CVec dual(grid.n);
    for (int k = 0; k < grid.n; ++k) {
      const double xi[1] = {s * grid.xi(k)};
      dual(k) = a(std::span<const double>(xi, 1));
    }
    u.values = fourier_from_dual(grid, dual);
  }
  return u;
}

/// Twisted field of u against Lambda; the transversal growth axis is chi_F(Y-perp x Y).
inline CharReport lagrangian_membership_test(const GridFunction& u, const LagrangianSubspace& lambda, double m,
                                             double rho, int k_max, double N_max,
                                             const std::optional<CharConfig>& cfg = std::nullopt) {
  if (lambda.n() != u.spec.d) throw DimensionError("lagrangian_membership_test: dimension mismatch");
  const LagrangianParam p = normalized_param(lambda);
  const int d = u.spec.d;
  const Mat Yp = LagrangianSubspace::orthogonal_complement(p.Y, d);
  Mat span = Mat::Zero(2 * d, d);
  span.topLeftCorner(d, Yp.cols()) = Yp;
  span.bottomLeftCorner(d, Yp.cols()) = p.F * Yp;
  span.bottomRightCorner(d, p.Y.cols()) = p.Y;
  const LagrangianSubspace transversal = LagrangianSubspace::from_span(span);
  const CharConfig c = cfg ? *cfg : default_char_config(u.spec);
  return characterize_field(u, twist_Lambda(p), lambda, transversal, m, rho, k_max, N_max, c);
}

struct AgreementReport {
  Status first = Status::inconclusive, second = Status::inconclusive;
  bool agree = false;
  Status status = Status::inconclusive;  // shared verdict when they agree, fail otherwise
};

inline AgreementReport agreement(Status a, Status b) {
  AgreementReport r{a, b, a == b, Status::inconclusive};
  if (a == Status::inconclusive || b == Status::inconclusive) return r;
  r.status = r.agree ? a : Status::fail;
  return r;
}

/// Membership of u and of mu(chi_F) u in the classes conormal to Y must agree (Y in Ker F).
inline AgreementReport chirp_invariance_check(const GridFunction& u, const Mat& Y, const Mat& F, double m, int k_max,
                                              double N_max) {
  const int d = static_cast<int>(F.rows());
  if (Y.cols() && max_abs(F * Y) > 1e-10 * std::max(1.0, max_abs(F)))
    throw PreconditionError("chirp_invariance_check: Y must lie in Ker F");
  if (d != 1) throw DimensionError("chirp_invariance_check: one-dimensional grids only");
  const LagrangianSubspace conormal = LagrangianSubspace::from_param(Y, Mat::Zero(d, d));
  const GridFunction v = mu_chirp(F(0, 0), u.spec).apply(u);
  return agreement(lagrangian_membership_test(u, conormal, m, 1.0, k_max, N_max).status,
                   lagrangian_membership_test(v, conormal, m, 1.0, k_max, N_max).status);
}

struct KernelLagrangianReport {
  CharReport kernel, lagrangian;
  SymplecticMatrix synthesis = SymplecticMatrix::identity(2);  // tensor(chi) chi_Delta
  AgreementReport verdict;
};

/// Runs the kernel characterization and the Lagrangian membership test on Lambda'_chi.
inline KernelLagrangianReport kernel_equals_lagrangian_check(const GridFunction& K, const SymplecticMatrix& chi,
                                                             double m, double rho, int k_max, double N_max,
                                                             const std::optional<CharConfig>& cfg = std::nullopt) {
  KernelLagrangianReport r;
  const LagrangianSubspace lam = twisted_graph_lagrangian(chi);
  r.synthesis = tensor_symplectic(chi) * chi_delta(chi.d());
  if (!subspace_equal(LagrangianSubspace::from_span(r.synthesis.matrix().leftCols(2 * chi.d())), lam, 1e-9))
    throw PreconditionError("kernel_equals_lagrangian_check: tensor(chi) chi_Delta does not reach Lambda'_chi");
  r.kernel = kernel_characterization_check(K, chi, m, rho, k_max, N_max, cfg);
  r.lagrangian = lagrangian_membership_test(K, lam.with_param(), m, rho, k_max, N_max, cfg);
  r.verdict = agreement(r.kernel.status, r.lagrangian.status);
  return r;
}

struct FioOnLagrangianReport {
  LagrangianSubspace target;
  CharReport membership;
};

/// Applies the operator of `spec` to the synthesized distribution and tests membership in
/// the class of order m + m' on chi Lambda. The operator is the quadrature of the kernel
/// samples: the chirp-factored grid operator aliases full-band inputs such as a discrete delta.
inline FioOnLagrangianReport fio_on_lagrangian_check(const FioSpec& spec, const LagrangianDistSpec& dist,
                                                     const GridSpec& grid, int k_max, double N_max) {
  const GridFunction v = kernel_operator(fio_kernel(spec, grid)).apply(lagrangian_synthesize(dist, grid));
  LagrangianSubspace target = dist.lambda.mapped(spec.chi().matrix()).with_param();
  CharReport rep = lagrangian_membership_test(v, target, dist.m + spec.m, std::min(dist.rho, spec.rho), k_max, N_max);
  return {std::move(target), std::move(rep)};
}

}  // namespace fiolab
