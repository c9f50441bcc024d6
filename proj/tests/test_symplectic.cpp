#include <gtest/gtest.h>

#include "fiolab/symplectic.hpp"

using namespace fiolab;

namespace {

Mat J_of(int d) { return standard_J_matrix(d); }

}  // namespace

TEST(StandardJ, SquaresToMinusIdentityAndIsSkew) {
  for (int d = 1; d <= 3; ++d) {
    const Mat J = J_of(d);
    EXPECT_EQ(max_abs(J * J + Mat::Identity(2 * d, 2 * d)), 0.0);
    EXPECT_EQ(max_abs(J + J.transpose()), 0.0);
  }
}

TEST(SymplecticMatrix, RejectsNonSymplectic) {
  Mat M = Mat::Identity(2, 2);
  M(0, 0) = 2.0;
  EXPECT_THROW(SymplecticMatrix{M}, PreconditionError);
  EXPECT_THROW(SymplecticMatrix{Mat::Identity(3, 3)}, DimensionError);
}

TEST(SymplecticMatrix, ElementaryGeneratorsAreSymplectic) {
  Mat F(2, 2);
  F << 1.0, 0.3, 0.3, -2.0;
  Mat A(2, 2);
  A << 2.0, 1.0, 0.5, 3.0;
  Mat U(2, 2);
  U << std::cos(0.4), -std::sin(0.4), std::sin(0.4), std::cos(0.4);
  for (const SymplecticMatrix& s : {chirp_matrix(F), upper_chirp_matrix(F), linear_lift(A), rotation_embedding(U)})
    EXPECT_TRUE(is_symplectic(s.matrix(), 1e-12));
}

TEST(SymplecticMatrix, LiftActsAsAOnPositionAndInverseTransposeOnMomentum) {
  Mat A(1, 1);
  A << 2.5;
  const Mat M = linear_lift(A).matrix();
  EXPECT_NEAR(M(0, 0) * M(1, 1), 1.0, 1e-15);
  EXPECT_EQ(M(0, 1), 0.0);
  EXPECT_EQ(M(1, 0), 0.0);
}

// Property: the closed-form inverse -J S^t J agrees with LU on random products.
TEST(SymplecticProperty, InverseMatchesLu) {
  Rng rng(7);
  for (int d = 1; d <= 3; ++d)
    for (int t = 0; t < 200; ++t) {
      const SymplecticMatrix s = random_symplectic(rng, d);
      const Mat lu = s.matrix().partialPivLu().inverse();
      EXPECT_LE(max_abs(symplectic_inverse(s).matrix() - lu), 1e-11 * std::max(1.0, max_abs(lu)));
    }
}

TEST(SymplecticProperty, ProductsStaySymplecticAndDeterminantIsOne) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const SymplecticMatrix a = random_symplectic(rng, 2), b = random_symplectic(rng, 2);
    const Mat p = (a * b).matrix();
    EXPECT_TRUE(is_symplectic(p, 1e-10 * std::max(1.0, max_abs(p) * max_abs(p))));
    EXPECT_NEAR(p.determinant(), 1.0, 1e-9 * std::max(1.0, max_abs(p)));
  }
}

TEST(SymplecticProperty, FreeSamplesHaveInvertibleB) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const SymplecticMatrix s = random_free_symplectic(rng, 2);
    EXPECT_TRUE(is_free(s));
    EXPECT_GT(sigma_min(s.B()), 0.0);
  }
}

TEST(LagrangianSubspace, LineAngleIsTheGeometricAngle) {
  for (double a : {0.1, 0.5, 1.2}) {
    Mat u(2, 1), v(2, 1);
    u << 1.0, 0.0;
    v << std::cos(a), std::sin(a);
    EXPECT_NEAR(max_principal_angle(LagrangianSubspace::from_span(u), LagrangianSubspace::from_span(v)), a, 1e-12);
  }
}

TEST(LagrangianSubspace, ParamRoundTrip) {
  Mat Y(2, 1), F(2, 2);
  Y << 1.0, 1.0;
  Y /= std::sqrt(2.0);
  F << 0.7, -0.7, -0.7, 0.7;  // acts on the orthogonal complement of Y
  const LagrangianSubspace L = LagrangianSubspace::from_param(Y, F);
  EXPECT_LE(max_abs(L.basis().transpose() * J_of(2) * L.basis()), 1e-12);
  const LagrangianSubspace again = LagrangianSubspace::from_param(L.derive_param().Y, L.derive_param().F);
  EXPECT_LE(max_principal_angle(L, again), 1e-10);
}

TEST(LagrangianSubspace, RejectsIsotropicDeficitAndNonLagrangianSpans) {
  Mat s(2, 2);
  s << 1.0, 0.0, 0.0, 1.0;  // all of R^2 is not Lagrangian
  EXPECT_THROW(LagrangianSubspace::from_span(s), Error);
}

TEST(LagrangianSubspace, GraphOfChiIsLagrangianForTheTwistedForm) {
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const SymplecticMatrix chi = random_symplectic(rng, 2);
    const Mat B = twisted_graph_span(chi);
    const LagrangianSubspace L = twisted_graph_lagrangian(chi);
    EXPECT_EQ(L.n(), 4);
    EXPECT_LE(max_principal_angle_sin(L.basis(), B) / max_abs(B), 1e-9);
    EXPECT_LE(max_abs(L.basis().transpose() * L.form() * L.basis()), 1e-9);
  }
}

TEST(SubspaceDistance, PointOnAndOffLine) {
  Mat u(2, 1);
  u << 1.0, 0.0;
  const LagrangianSubspace L = LagrangianSubspace::from_span(u);
  EXPECT_NEAR(subspace_distance(vec2(3.0, 0.0), L).distance, 0.0, 1e-15);
  EXPECT_NEAR(subspace_distance(vec2(3.0, 2.0), L).distance, 2.0, 1e-14);
}
