#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "fiolab/types.hpp"

namespace fiolab {

/// Canonical matrix (0 I; -I 0) of size 2d.
inline Mat standard_J_matrix(int d) {
  if (d < 1) throw DimensionError("standard_J: d must be >= 1");
  Mat J = Mat::Zero(2 * d, 2 * d);
  J.topRightCorner(d, d) = Mat::Identity(d, d);
  J.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
  return J;
}

inline bool is_symplectic(const Mat& M, double tol) {
  if (M.rows() != M.cols() || M.rows() % 2 != 0 || M.rows() == 0)
    throw DimensionError("is_symplectic: matrix must be square of even size");
  const Mat J = standard_J_matrix(static_cast<int>(M.rows() / 2));
  return max_abs(M.transpose() * J * M - J) <= tol;
}

inline double sigma_min(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues().minCoeff();
}

inline double condition_number(const Mat& M) {
  Eigen::JacobiSVD<Mat> svd(M);
  const auto& s = svd.singularValues();
  const double lo = s.minCoeff();
  return lo > 0 ? s.maxCoeff() / lo : std::numeric_limits<double>::infinity();
}

/// Real 2d x 2d matrix known to satisfy S^t J S = J.
class SymplecticMatrix {
 public:
  /// Validates at tolerance `tol` scaled by max(1, |S|^2).
  explicit SymplecticMatrix(Mat m, double tol = 1e-10) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() % 2 != 0 || m_.rows() == 0)
      throw DimensionError("SymplecticMatrix: matrix must be square of even size");
    const double scale = std::max(1.0, max_abs(m_) * max_abs(m_));
    if (!is_symplectic(m_, tol * scale)) throw PreconditionError("SymplecticMatrix: S^t J S != J");
  }

  static SymplecticMatrix identity(int d) { return SymplecticMatrix(Mat::Identity(2 * d, 2 * d)); }

  int d() const { return static_cast<int>(m_.rows() / 2); }
  const Mat& matrix() const { return m_; }
  Mat A() const { return m_.topLeftCorner(d(), d()); }
  Mat B() const { return m_.topRightCorner(d(), d()); }
  Mat C() const { return m_.bottomLeftCorner(d(), d()); }
  Mat D() const { return m_.bottomRightCorner(d(), d()); }

  Vec apply(const Vec& z) const { return m_ * z; }

  friend SymplecticMatrix operator*(const SymplecticMatrix& a, const SymplecticMatrix& b) {
    if (a.d() != b.d()) throw DimensionError("SymplecticMatrix product: dimension mismatch");
    return SymplecticMatrix(a.m_ * b.m_, 1e-8);
  }
  SymplecticMatrix operator-() const { return SymplecticMatrix(-m_); }

 private:
  Mat m_;
};

inline SymplecticMatrix standard_J(int d) { return SymplecticMatrix(standard_J_matrix(d)); }

inline Mat block2(const Mat& A, const Mat& B, const Mat& C, const Mat& D) {
  Mat m(A.rows() + C.rows(), A.cols() + B.cols());
  m << A, B, C, D;
  return m;
}

inline SymplecticMatrix symplectic_inverse(const SymplecticMatrix& chi) {
  return SymplecticMatrix(
      block2(chi.D().transpose(), -chi.B().transpose(), -chi.C().transpose(), chi.A().transpose()));
}

inline bool is_free(const SymplecticMatrix& chi, double tol = 1e-10) {
  return sigma_min(chi.B()) > tol * std::max(1.0, max_abs(chi.matrix()));
}

/// Phase matrix (DB^-1, -B^-t; -B^-1, B^-1 A) of the canonical kernel of a free matrix.
inline Mat free_phase_matrix(const SymplecticMatrix& chi) {
  if (!is_free(chi)) {
    throw SingularBlockError("free_phase_matrix: B block is singular", condition_number(chi.B()));
  }
  const Mat Binv = chi.B().inverse();
  Mat F = block2(chi.D() * Binv, -Binv.transpose(), -Binv, Binv * chi.A());
  return 0.5 * (F + F.transpose());
}

// ---------------------------------------------------------------------------
// Subspaces

/// Orthonormal basis of the column span; throws RankError on deficiency.
inline Mat orthonormal_span(const Mat& spanning, int expected_rank, double rel_tol = 1e-10) {
  Eigen::JacobiSVD<Mat> svd(spanning, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * std::max(top, 1e-300)) ++rank;
  if (rank != expected_rank)
    throw RankError("subspace has rank " + std::to_string(rank) + ", expected " +
                    std::to_string(expected_rank));
  return svd.matrixU().leftCols(expected_rank);
}

/// (Y, F) description: the subspace {(X, FX + Z) : X in Y, Z in Y-perp}.
struct LagrangianParam {
  Mat Y;  // n x k, orthonormal columns (k may be 0)
  Mat F;  // n x n symmetric, F(Y) in Y
};

/// Linear Lagrangian subspace of a 2n-dimensional space equipped with an antisymmetric form.
/// The form defaults to the standard J; graph Lagrangians carry J (+) -J.
class LagrangianSubspace {
 public:
  static LagrangianSubspace from_span(const Mat& spanning, std::optional<Mat> form = std::nullopt,
                                      double iso_tol = 1e-9) {
    if (spanning.rows() % 2 != 0) throw DimensionError("Lagrangian: ambient dimension must be even");
    const int n = static_cast<int>(spanning.rows() / 2);
    LagrangianSubspace L;
    L.basis_ = orthonormal_span(spanning, n);
    L.form_ = form ? *form : standard_J_matrix(n);
    if (max_abs(L.basis_.transpose() * L.form_ * L.basis_) > iso_tol)
      throw PreconditionError("Lagrangian: span is not isotropic");
    return L;
  }

  /// Builds from (Y, F); rejects F that does not leave span(Y) invariant.
  static LagrangianSubspace from_param(const Mat& Y, const Mat& F, double tol = 1e-10) {
    const int n = static_cast<int>(F.rows());
    if (F.cols() != n || Y.rows() != n) throw DimensionError("Lagrangian param: shape mismatch");
    if (max_abs(F - F.transpose()) > tol) throw PreconditionError("Lagrangian param: F not symmetric");
    const int k = static_cast<int>(Y.cols());
    Mat Yo = k > 0 ? orthonormal_span(Y, k) : Mat(n, 0);
    const Mat PY = Yo * Yo.transpose();
    const Mat Pperp = Mat::Identity(n, n) - PY;
    if (k > 0 && max_abs(Pperp * F * Yo) > tol * std::max(1.0, max_abs(F)))
      throw PreconditionError("Lagrangian param: F does not leave Y invariant");
    Mat Yperp = orthogonal_complement(Yo, n);
    Mat span(2 * n, n);
    span.topLeftCorner(n, k) = Yo;
    span.bottomLeftCorner(n, k) = F * Yo;
    span.topRightCorner(n, n - k) = Mat::Zero(n, n - k);
    span.bottomRightCorner(n, n - k) = Yperp;
    LagrangianSubspace L = from_span(span);
    L.param_ = LagrangianParam{Yo, F};
    return L;
  }

  static Mat orthogonal_complement(const Mat& Yo, int n) {
    const int k = static_cast<int>(Yo.cols());
    if (k == n) return Mat(n, 0);
    if (k == 0) return Mat::Identity(n, n);
    Eigen::JacobiSVD<Mat> svd(Mat::Identity(n, n) - Yo * Yo.transpose(), Eigen::ComputeFullU);
    return svd.matrixU().leftCols(n - k);
  }

  int n() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  const Mat& form() const { return form_; }
  const std::optional<LagrangianParam>& param() const { return param_; }
  Mat projector() const { return basis_ * basis_.transpose(); }

  /// Recovers a (Y, F) description with Y-perp in Ker F:
  /// Y is the x-projection of the subspace and F = P_Y xi(X) P_Y.
  LagrangianParam derive_param(double tol = 1e-9) const {
    const int n = this->n();
    const Mat top = basis_.topRows(n);
    Eigen::JacobiSVD<Mat> svd(top, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int k = 0;
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > tol) ++k;
    Mat Y = svd.matrixU().leftCols(k);
    // Vectors in the subspace with x = Y e_i: combine columns through the pseudo-inverse.
    Mat F = Mat::Zero(n, n);
    if (k > 0) {
      Mat coeff = svd.matrixV().leftCols(k) * s.head(k).cwiseInverse().asDiagonal();  // top*coeff = Y
      Mat xi = basis_.bottomRows(n) * coeff;  // frequency parts, modulo Y-perp contributions
      Mat FY = Y * (Y.transpose() * xi);      // P_Y F Y
      F = FY * Y.transpose();
      F = 0.5 * (F + F.transpose());
    }
    return {Y, F};
  }

  LagrangianSubspace with_param() const {
    if (param_) return *this;
    const auto p = derive_param();
    LagrangianSubspace out = from_param(p.Y, p.F, 1e-8);
    return out;
  }

  /// Image under a linear map (symplectic for the default form).
  LagrangianSubspace mapped(const Mat& M) const { return from_span(M * basis_, form_); }

 private:
  Mat basis_;
  Mat form_;
  std::optional<LagrangianParam> param_;
};

struct SubspaceDistanceReport {
  Vec point;
  double distance = 0.0;
  Vec projection;
};

inline SubspaceDistanceReport subspace_distance(const Vec& p, const LagrangianSubspace& L) {
  if (p.size() != L.basis().rows()) throw DimensionError("subspace_distance: dimension mismatch");
  Vec proj = L.basis() * (L.basis().transpose() * p);
  return {p, (p - proj).norm(), proj};
}

/// Sine of the largest principal angle between two equal-dimensional subspaces.
inline double max_principal_angle_sin(const Mat& B1, const Mat& B2) {
  if (B1.rows() != B2.rows() || B1.cols() != B2.cols())
    throw DimensionError("principal angle: dimension mismatch");
  const Mat resid = B2 - B1 * (B1.transpose() * B2);
  Eigen::JacobiSVD<Mat> svd(resid);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline double max_principal_angle(const LagrangianSubspace& a, const LagrangianSubspace& b) {
  return std::asin(std::min(1.0, max_principal_angle_sin(a.basis(), b.basis())));
}

inline bool subspace_equal(const LagrangianSubspace& a, const LagrangianSubspace& b, double tol) {
  return max_principal_angle(a, b) <= tol;
}

/// Graph {(x, xi; y, eta) : (x, xi) = chi(y, eta)}, Lagrangian for sigma(x,xi) - sigma(y,eta).
inline LagrangianSubspace graph_lagrangian(const SymplecticMatrix& chi) {
  const int d = chi.d();
  Mat span(4 * d, 2 * d);
  span.topRows(2 * d) = chi.matrix();
  span.bottomRows(2 * d) = Mat::Identity(2 * d, 2 * d);
  Mat form = Mat::Zero(4 * d, 4 * d);
  form.topLeftCorner(2 * d, 2 * d) = standard_J_matrix(d);
  form.bottomRightCorner(2 * d, 2 * d) = -standard_J_matrix(d);
  return LagrangianSubspace::from_span(span, form);
}

/// Spanning matrix (rows ordered x, y, xi, zeta) of {(x, y, xi, -eta) : (x, xi) = chi(y, eta)}.
inline Mat twisted_graph_span(const SymplecticMatrix& chi) {
  const int d = chi.d();
  Mat span = Mat::Zero(4 * d, 2 * d);
  span.block(0, 0, d, d) = chi.A();
  span.block(0, d, d, d) = chi.B();
  span.block(d, 0, d, d) = Mat::Identity(d, d);
  span.block(2 * d, 0, d, d) = chi.C();
  span.block(2 * d, d, d, d) = chi.D();
  span.block(3 * d, d, d, d) = -Mat::Identity(d, d);
  return span;
}

inline LagrangianSubspace twisted_graph_lagrangian(const SymplecticMatrix& chi) {
  return LagrangianSubspace::from_span(twisted_graph_span(chi));
}

// ---------------------------------------------------------------------------
// Special matrices

inline void require_symmetric(const Mat& F, const char* who) {
  if (F.rows() != F.cols() || max_abs(F - F.transpose()) > 1e-12 * std::max(1.0, max_abs(F)))
    throw PreconditionError(std::string(who) + ": matrix must be symmetric");
}

/// (I 0; F I): the lower chirp whose operator multiplies by exp(i<Fx,x>/2).
inline SymplecticMatrix chirp_matrix(const Mat& F) {
  require_symmetric(F, "chirp_matrix");
  const int d = static_cast<int>(F.rows());
  return SymplecticMatrix(block2(Mat::Identity(d, d), Mat::Zero(d, d), F, Mat::Identity(d, d)));
}

/// (I G; 0 I): the upper chirp, i.e. free evolution by exp(-i<GD,D>/2).
inline SymplecticMatrix upper_chirp_matrix(const Mat& G) {
  require_symmetric(G, "upper_chirp_matrix");
  const int d = static_cast<int>(G.rows());
  return SymplecticMatrix(block2(Mat::Identity(d, d), G, Mat::Zero(d, d), Mat::Identity(d, d)));
}

inline SymplecticMatrix rotation_embedding(const Mat& U) {
  const int d = static_cast<int>(U.rows());
  if (U.cols() != d || max_abs(U.transpose() * U - Mat::Identity(d, d)) > 1e-12)
    throw PreconditionError("rotation_embedding: U must be orthogonal");
  return SymplecticMatrix(block2(U, Mat::Zero(d, d), Mat::Zero(d, d), U));
}

/// diag(A, A^-t): the symplectic lift of an invertible linear change of variables.
inline SymplecticMatrix linear_lift(const Mat& A) {
  const int d = static_cast<int>(A.rows());
  if (A.cols() != d || sigma_min(A) < 1e-12) throw SingularBlockError("linear_lift: singular A", condition_number(A));
  return SymplecticMatrix(block2(A, Mat::Zero(d, d), Mat::Zero(d, d), A.inverse().transpose()));
}

/// Maps (x', x'', xi', xi'') to (x', -xi'', xi', x'') with x' in R^n, x'' in R^{d-n}.
inline SymplecticMatrix J2_inverse(int d, int n) {
  if (n < 0 || n > d) throw DimensionError("J2_inverse: need 0 <= n <= d");
  const int r = d - n;
  Mat M = Mat::Zero(2 * d, 2 * d);
  M.block(0, 0, n, n) = Mat::Identity(n, n);
  M.block(n, d + n, r, r) = -Mat::Identity(r, r);
  M.block(d, d, n, n) = Mat::Identity(n, n);
  M.block(d + n, n, r, r) = Mat::Identity(r, r);
  return SymplecticMatrix(M);
}

/// Element of Sp(2d) sending R^{2d} x {0} onto the conormal bundle of the diagonal.
/// Variables ordered (x1, x2, xi1, xi2) with each block in R^d.
inline SymplecticMatrix chi_delta(int d) {
  const Mat Id = Mat::Identity(d, d);
  const Mat Z = Mat::Zero(d, d);
  Mat M(4 * d, 4 * d);
  M << Id, Z, Z, Z,
       Id, Z, Z, Id,
       Z, Id, Id, Z,
       Z, -Id, Z, Z;
  return SymplecticMatrix(M);
}

/// chi acting on the first variable pair of T*R^{2d}, identity on the second.
inline SymplecticMatrix tensor_symplectic(const SymplecticMatrix& chi) {
  const int d = chi.d();
  Mat M = Mat::Zero(4 * d, 4 * d);
  M.block(0, 0, d, d) = chi.A();
  M.block(0, 2 * d, d, d) = chi.B();
  M.block(2 * d, 0, d, d) = chi.C();
  M.block(2 * d, 2 * d, d, d) = chi.D();
  M.block(d, d, d, d) = Mat::Identity(d, d);
  M.block(3 * d, 3 * d, d, d) = Mat::Identity(d, d);
  return SymplecticMatrix(M);
}

// ---------------------------------------------------------------------------
// Seeded random generation

using Rng = std::mt19937_64;

inline Mat random_gaussian(Rng& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Mat random_symmetric(Rng& rng, int d, double scale = 1.0) {
  Mat m = random_gaussian(rng, d, d, scale);
  return 0.5 * (m + m.transpose());
}

inline Mat random_orthogonal(Rng& rng, int d) {
  Eigen::HouseholderQR<Mat> qr(random_gaussian(rng, d, d));
  Mat Q = qr.householderQ();
  Vec sgn = qr.matrixQR().diagonal().cwiseSign();
  for (int i = 0; i < d; ++i)
    if (sgn(i) == 0) sgn(i) = 1;
  return Q * sgn.asDiagonal();
}

/// Product of `factors` generators drawn from {chirp, rotation, J, scaling}.
inline SymplecticMatrix random_symplectic(Rng& rng, int d, int factors = 5, double scale = 0.7) {
  Mat M = Mat::Identity(2 * d, 2 * d);
  std::uniform_int_distribution<int> pick(0, 3);
  std::uniform_real_distribution<double> logs(-0.5, 0.5);
  for (int f = 0; f < factors; ++f) {
    Mat G;
    switch (pick(rng)) {
      case 0: G = chirp_matrix(random_symmetric(rng, d, scale)).matrix(); break;
      case 1: G = rotation_embedding(random_orthogonal(rng, d)).matrix(); break;
      case 2: G = standard_J_matrix(d); break;
      default: {
        Vec s(d);
        for (int i = 0; i < d; ++i) s(i) = std::exp(logs(rng));
        G = linear_lift(s.asDiagonal().toDenseMatrix()).matrix();
      }
    }
    M = G * M;
  }
  return SymplecticMatrix(M);
}

/// Random free matrix with cond(B) below `max_cond`.
inline SymplecticMatrix random_free_symplectic(Rng& rng, int d, double max_cond = 1e3) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    SymplecticMatrix chi = random_symplectic(rng, d);
    if (is_free(chi, 1e-6) && condition_number(chi.B()) < max_cond) return chi;
  }
  throw Error("random_free_symplectic: no free sample found");
}

/// Random pair (chi1, chi2) with chi1, chi2 and chi1 chi2 all of condition number at most
/// `max_cond`; used where grid operators must keep test packets away from the boundary.
inline std::pair<SymplecticMatrix, SymplecticMatrix> random_well_conditioned_pair(Rng& rng, int d,
                                                                                  double max_cond = 3.0) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    SymplecticMatrix a = random_symplectic(rng, d), b = random_symplectic(rng, d);
    if (condition_number(a.matrix()) <= max_cond && condition_number(b.matrix()) <= max_cond &&
        condition_number((a * b).matrix()) <= max_cond)
      return {a, b};
  }
  throw Error("random_well_conditioned_pair: no sample found");
}

}  // namespace fiolab
