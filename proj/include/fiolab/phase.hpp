#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "fiolab/symplectic.hpp"

namespace fiolab {

/// phi(X, theta) = 1/2 <X, F X> + <L theta, X> + 1/2 <theta, Q theta>, X = (x, y) in R^{2d}.
struct QuadraticPhase {
  int d = 1;
  int N = 0;
  Mat F;  // 2d x 2d
  Mat L;  // 2d x N
  Mat Q;  // N x N

  QuadraticPhase() = default;
  QuadraticPhase(Mat F_, Mat L_, Mat Q_) : F(std::move(F_)), L(std::move(L_)), Q(std::move(Q_)) {
    if (F.rows() != F.cols() || F.rows() % 2 != 0 || F.rows() == 0)
      throw DimensionError("QuadraticPhase: F must be 2d x 2d");
    d = static_cast<int>(F.rows() / 2);
    N = static_cast<int>(Q.rows());
    if (Q.cols() != N || L.cols() != N || L.rows() != 2 * d)
      throw DimensionError("QuadraticPhase: L must be 2d x N and Q N x N");
    const double tol = 1e-12;
    if (max_abs(F - F.transpose()) > tol * std::max(1.0, max_abs(F)) ||
        max_abs(Q - Q.transpose()) > tol * std::max(1.0, max_abs(Q)))
      throw PreconditionError("QuadraticPhase: F and Q must be symmetric");
  }

  /// Phase with no fiber variables.
  static QuadraticPhase kernel_form(const Mat& F) { return QuadraticPhase(F, Mat(F.rows(), 0), Mat(0, 0)); }

  /// <x - y, theta> in dimension d.
  static QuadraticPhase pseudodifferential(int d) {
    Mat L(2 * d, d);
    L << Mat::Identity(d, d), -Mat::Identity(d, d);
    return QuadraticPhase(Mat::Zero(2 * d, 2 * d), L, Mat::Zero(d, d));
  }

  /// Canonical phase 1/2 <X, F X> of a free matrix.
  static QuadraticPhase from_free(const SymplecticMatrix& chi) { return kernel_form(free_phase_matrix(chi)); }
};

inline double phase_eval(const QuadraticPhase& p, const Vec& X, const Vec& theta) {
  if (X.size() != 2 * p.d || theta.size() != p.N) throw DimensionError("phase_eval: dimension mismatch");
  double v = 0.5 * X.dot(p.F * X);
  if (p.N > 0) v += (p.L * theta).dot(X) + 0.5 * theta.dot(p.Q * theta);
  return v;
}

/// The stacked (L; Q) matrix, whose rank must equal N.
inline Mat stacked_LQ(const QuadraticPhase& p) {
  Mat S(2 * p.d + p.N, p.N);
  S << p.L, p.Q;
  return S;
}

inline bool check_nondegeneracy(const QuadraticPhase& p) {
  if (p.N == 0) return true;
  Eigen::JacobiSVD<Mat> svd(stacked_LQ(p));
  const auto& s = svd.singularValues();
  return s(0) > 0 && s(s.size() - 1) > 1e-10 * s(0);
}

/// |phi'_theta| < eps |(X, theta)|.
inline bool cone_test(const QuadraticPhase& p, double eps, const Vec& point) {
  if (point.size() != 2 * p.d + p.N) throw DimensionError("cone_test: dimension mismatch");
  if (p.N == 0) return 0.0 < eps * point.norm();
  const Vec X = point.head(2 * p.d);
  const Vec th = point.tail(p.N);
  return (p.L.transpose() * X + p.Q * th).norm() < eps * point.norm();
}

/// Orthonormal basis of the critical set {(X, theta) : L^t X + Q theta = 0}, dimension 2d.
inline Mat critical_set(const QuadraticPhase& p) {
  if (!check_nondegeneracy(p)) throw RankError("critical_set: phase is degenerate");
  const int D = 2 * p.d + p.N;
  if (p.N == 0) return Mat::Identity(D, D);
  Mat M(p.N, D);
  M << p.L.transpose(), p.Q;
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  return svd.matrixV().rightCols(2 * p.d);
}

/// {(X, F X + L theta) : (X, theta) critical}, coordinates ordered (x, y, xi, zeta).
inline LagrangianSubspace lagrangian_of_phase(const QuadraticPhase& p) {
  const Mat C = critical_set(p);
  const int dd = 2 * p.d;
  Mat span(2 * dd, dd);
  const Mat X = C.topRows(dd);
  span.topRows(dd) = X;
  span.bottomRows(dd) = p.F * X + (p.N ? Mat(p.L * C.bottomRows(p.N)) : Mat::Zero(dd, dd));
  return LagrangianSubspace::from_span(span);
}

struct Elimination {
  double q;
  Vec ell;
};

struct ReductionRecord {
  QuadraticPhase original;
  QuadraticPhase reduced;   // Q == 0, L injective
  Mat rotation;             // orthogonal change of theta variables (theta = V theta')
  std::vector<Elimination> eliminated;
  int n = 0;                // remaining fiber dimension
};

/// Completes the square in every non-degenerate eigen-direction of Q.
inline ReductionRecord reduce_phase(const QuadraticPhase& p) {
  if (!check_nondegeneracy(p)) throw RankError("reduce_phase: phase is degenerate");
  ReductionRecord rec;
  rec.original = p;
  if (p.N == 0) {
    rec.reduced = p;
    rec.rotation = Mat(0, 0);
    return rec;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(p.Q);
  const Vec q = es.eigenvalues();
  const Mat V = es.eigenvectors();
  std::vector<int> order(p.N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(q(a)) > std::abs(q(b)); });
  Mat Vs(p.N, p.N);
  for (int i = 0; i < p.N; ++i) Vs.col(i) = V.col(order[i]);
  const Mat Lr = p.L * Vs;
  const double qnorm = q.cwiseAbs().maxCoeff();
  Mat F = p.F;
  std::vector<int> kept;
  for (int i = 0; i < p.N; ++i) {
    const double qi = q(order[i]);
    if (qnorm > 0 && std::abs(qi) > 1e-10 * qnorm) {
      const Vec ell = Lr.col(i);
      F -= ell * ell.transpose() / qi;
      rec.eliminated.push_back({qi, ell});
    } else {
      kept.push_back(i);
    }
  }
  F = 0.5 * (F + F.transpose());
  Mat Lk(2 * p.d, static_cast<int>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) Lk.col(static_cast<int>(i)) = Lr.col(kept[i]);
  rec.n = static_cast<int>(kept.size());
  rec.reduced = QuadraticPhase(F, Lk, Mat::Zero(rec.n, rec.n));
  rec.rotation = Vs;
  if (rec.n > 0 && sigma_min(Lk) <= 1e-10 * std::max(1.0, max_abs(Lk)))
    throw RankError("reduce_phase: remaining L is not injective");
  return rec;
}

/// Reads chi off a twisted graph: (x, xi) = chi (y, eta) on the Lagrangian of phi.
inline SymplecticMatrix chi_from_lagrangian(const LagrangianSubspace& L) {
  const int d = L.n() / 2;
  const Mat& B = L.basis();
  Mat P(2 * d, 2 * d), O(2 * d, 2 * d);
  P << B.middleRows(d, d), -B.middleRows(3 * d, d);
  O << B.topRows(d), B.middleRows(2 * d, d);
  if (sigma_min(P) < 1e-10) throw NotAGraphError("Lagrangian is not a graph over (y, eta)");
  const Mat chi = P.transpose().colPivHouseholderQr().solve(O.transpose()).transpose();
  const double resid = max_abs(chi * P - O);
  if (resid > 1e-8) throw NotAGraphError("graph fit residual " + std::to_string(resid));
  SymplecticMatrix out(chi, 1e-8);
  if (!subspace_equal(twisted_graph_lagrangian(out), L, 1e-8))
    throw NotAGraphError("recovered matrix does not reproduce the Lagrangian");
  return out;
}

inline SymplecticMatrix chi_from_phase(const QuadraticPhase& p) {
  return chi_from_lagrangian(lagrangian_of_phase(p));
}

inline bool check_graph_phase(const QuadraticPhase& p, const SymplecticMatrix& chi, double tol) {
  if (!check_nondegeneracy(p) || p.d != chi.d()) return false;
  return subspace_equal(lagrangian_of_phase(p), twisted_graph_lagrangian(chi), tol);
}

struct HelfferReport {
  bool left_matrix_invertible = false;
  bool right_matrix_invertible = false;
  double left_sigma_min = 0.0;
  double right_sigma_min = 0.0;
  double left_constant = 0.0;   // empirical sup |v| / |left v|
  double right_constant = 0.0;
  bool estimates_hold = false;
};

/// The two block matrices mapping (x, y, theta) to (phi'_y, y, phi'_theta) and (x, phi'_x, phi'_theta).
inline std::pair<Mat, Mat> helffer_matrices(const QuadraticPhase& p) {
  const int d = p.d, N = p.N, D = 2 * d + N;
  const Mat E = p.F.topLeftCorner(d, d), G = p.F.topRightCorner(d, d), H = p.F.bottomRightCorner(d, d);
  const Mat P = p.L.topRows(d), R = p.L.bottomRows(d);
  Mat left = Mat::Zero(D, D), right = Mat::Zero(D, D);
  left.block(0, 0, d, d) = G.transpose();
  left.block(0, d, d, d) = H;
  left.block(d, d, d, d) = Mat::Identity(d, d);
  right.block(0, 0, d, d) = Mat::Identity(d, d);
  right.block(d, 0, d, d) = E;
  right.block(d, d, d, d) = G;
  if (N > 0) {
    left.block(0, 2 * d, d, N) = R;
    right.block(d, 2 * d, d, N) = P;
    for (Mat* m : {&left, &right}) {
      m->block(2 * d, 0, N, d) = P.transpose();
      m->block(2 * d, d, N, d) = R.transpose();
      m->block(2 * d, 2 * d, N, N) = p.Q;
    }
  }
  return {left, right};
}

inline HelfferReport helffer_conditions(const QuadraticPhase& p, std::uint64_t seed = 1, int samples = 1000) {
  if (!check_nondegeneracy(p)) throw PreconditionError("helffer_conditions: phase is degenerate");
  try {
    (void)chi_from_phase(p);
  } catch (const NotAGraphError& e) {
    throw PreconditionError(std::string("helffer_conditions: not a twisted-graph phase: ") + e.what());
  }
  const auto [left, right] = helffer_matrices(p);
  HelfferReport r;
  r.left_sigma_min = sigma_min(left);
  r.right_sigma_min = sigma_min(right);
  r.left_matrix_invertible = r.left_sigma_min > 1e-8;
  r.right_matrix_invertible = r.right_sigma_min > 1e-8;
  Rng rng(seed);
  const int D = static_cast<int>(left.rows());
  for (int s = 0; s < samples; ++s) {
    Vec v = random_gaussian(rng, D, 1);
    v.normalize();
    r.left_constant = std::max(r.left_constant, 1.0 / std::max((left * v).norm(), 1e-300));
    r.right_constant = std::max(r.right_constant, 1.0 / std::max((right * v).norm(), 1e-300));
  }
  r.estimates_hold = r.left_matrix_invertible && r.right_matrix_invertible &&
                     r.left_constant <= 1.0 / r.left_sigma_min * (1 + 1e-9) &&
                     r.right_constant <= 1.0 / r.right_sigma_min * (1 + 1e-9);
  return r;
}

/// Seeded nondegenerate phase with N fiber variables. Q gets a random number of zero
/// eigenvalues (at most min(N, 2d)), so reductions exercise both eliminated and kept directions.
inline QuadraticPhase random_phase(Rng& rng, int d, int N) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Mat F = random_symmetric(rng, 2 * d);
    const Mat L = random_gaussian(rng, 2 * d, N);
    Mat Q = Mat::Zero(N, N);
    std::uniform_int_distribution<int> zeros(0, std::min(N, 2 * d));
    const int z = N > 0 ? zeros(rng) : 0;
    if (z < N) {
      const Mat V = random_orthogonal(rng, N);
      Vec q = random_gaussian(rng, N, 1);
      for (int i = 0; i < z; ++i) q(i) = 0.0;
      Q = V * q.asDiagonal() * V.transpose();
      Q = 0.5 * (Q + Q.transpose());
    }
    QuadraticPhase p(F, L, Q);
    if (check_nondegeneracy(p)) return p;
  }
  throw Error("random_phase: no nondegenerate sample found");
}

/// Phase of the composed kernel int e^{i phi1(x, w) + i phi2(w, y)} dw with theta = w,
/// parametrizing the twisted graph of chi1 chi2 for free chi1, chi2.
inline QuadraticPhase composed_free_phase(const SymplecticMatrix& chi1, const SymplecticMatrix& chi2) {
  const int d = chi1.d();
  const Mat F1 = free_phase_matrix(chi1), F2 = free_phase_matrix(chi2);
  Mat F = Mat::Zero(2 * d, 2 * d);
  F.topLeftCorner(d, d) = F1.topLeftCorner(d, d);
  F.bottomRightCorner(d, d) = F2.bottomRightCorner(d, d);
  Mat L(2 * d, d);
  L << F1.topRightCorner(d, d), F2.bottomLeftCorner(d, d);
  const Mat Q = F1.bottomRightCorner(d, d) + F2.topLeftCorner(d, d);
  return QuadraticPhase(F, L, 0.5 * (Q + Q.transpose()));
}

}  // namespace fiolab
