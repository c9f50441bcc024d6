#include <gtest/gtest.h>

#include "fiolab/phase.hpp"

using namespace fiolab;

namespace {

// (x - y) theta + theta^2 / 2 in d = 1.
QuadraticPhase square_completion_example() {
  Mat L(2, 1), Q(1, 1);
  L << 1.0, -1.0;
  Q << 1.0;
  return QuadraticPhase(Mat::Zero(2, 2), L, Q);
}

}  // namespace

TEST(ReducePhase, CompletingTheSquareByHand) {
  const ReductionRecord rec = reduce_phase(square_completion_example());
  Mat F0(2, 2);
  F0 << -1.0, 1.0, 1.0, -1.0;
  EXPECT_EQ(rec.n, 0);
  ASSERT_EQ(rec.eliminated.size(), 1u);
  EXPECT_LE(max_abs(rec.reduced.F - F0), 1e-15);
}

TEST(ReducePhase, ReducedPhaseIsTheCriticalValue) {
  const QuadraticPhase p = square_completion_example();
  const ReductionRecord rec = reduce_phase(p);
  for (double x : {-1.0, 0.3, 2.0})
    for (double y : {-0.5, 1.5}) {
      const Vec X = vec2(x, y);
      Vec th(1);
      th << -(x - y);  // d/dtheta = 0
      EXPECT_NEAR(phase_eval(p, X, th), phase_eval(rec.reduced, X, Vec(0)), 1e-14);
    }
}

TEST(ReducePhase, DegeneratePhaseIsRejected) {
  const QuadraticPhase p(Mat::Zero(2, 2), Mat::Zero(2, 1), Mat::Zero(1, 1));
  EXPECT_FALSE(check_nondegeneracy(p));
  EXPECT_THROW(reduce_phase(p), RankError);
}

TEST(ReducePhase, NonSymmetricInputIsRejected) {
  Mat F(2, 2);
  F << 0.0, 1.0, 0.0, 0.0;
  EXPECT_THROW(QuadraticPhase::kernel_form(F), PreconditionError);
}

// Property: reduction keeps the Lagrangian, zeroes Q and leaves L injective.
TEST(ReducePhaseProperty, LagrangianIsInvariant) {
  Rng rng(21);
  std::uniform_int_distribution<int> dd(1, 2), nn(0, 3);
  for (int t = 0; t < 200; ++t) {
    const QuadraticPhase p = random_phase(rng, dd(rng), nn(rng));
    const ReductionRecord rec = reduce_phase(p);
    EXPECT_EQ(max_abs(rec.reduced.Q), 0.0);
    if (rec.n > 0) EXPECT_GT(sigma_min(rec.reduced.L), 0.0);
    EXPECT_LT(max_principal_angle(lagrangian_of_phase(p), lagrangian_of_phase(rec.reduced)), 1e-9);
    EXPECT_EQ(static_cast<int>(rec.eliminated.size()) + rec.n, p.N);
  }
}

TEST(PhaseLagrangian, PseudodifferentialPhaseGivesIdentity) {
  const SymplecticMatrix chi = chi_from_phase(QuadraticPhase::pseudodifferential(1));
  EXPECT_LE(max_abs(chi.matrix() - Mat::Identity(2, 2)), 1e-12);
}

TEST(PhaseLagrangian, FreePhaseRecoversChi) {
  Rng rng(22);
  for (int t = 0; t < 50; ++t) {
    const SymplecticMatrix chi = random_free_symplectic(rng, 1 + t % 2);
    const QuadraticPhase p = QuadraticPhase::from_free(chi);
    EXPECT_TRUE(check_graph_phase(p, chi, 1e-9));
    EXPECT_LE(max_abs(chi_from_phase(p).matrix() - chi.matrix()), 1e-8 * std::max(1.0, max_abs(chi.matrix())));
  }
}

TEST(PhaseLagrangian, ComposedPhaseParametrizesTheProduct) {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    const SymplecticMatrix a = random_free_symplectic(rng, 1), b = random_free_symplectic(rng, 1);
    const Mat ab = a.matrix() * b.matrix();
    EXPECT_TRUE(check_graph_phase(composed_free_phase(a, b), SymplecticMatrix(ab, 1e-8), 1e-7));
  }
}

TEST(Helffer, MatricesInvertibleForGraphPhases) {
  Rng rng(24);
  for (int t = 0; t < 50; ++t) {
    const SymplecticMatrix a = random_free_symplectic(rng, 2), b = random_free_symplectic(rng, 2);
    const HelfferReport r = helffer_conditions(composed_free_phase(a, b), 5, 200);
    EXPECT_TRUE(r.left_matrix_invertible);
    EXPECT_TRUE(r.right_matrix_invertible);
    EXPECT_TRUE(r.estimates_hold);
  }
}

TEST(Helffer, ConstantsMatchInverseSigma) {
  const HelfferReport r = helffer_conditions(QuadraticPhase::pseudodifferential(1), 3, 2000);
  EXPECT_LE(r.left_constant, 1.0 / r.left_sigma_min * (1 + 1e-9));
  EXPECT_GT(r.left_constant, 0.5 / r.left_sigma_min);
}

TEST(ConeTest, CriticalPointsAreInsideEveryCone) {
  const QuadraticPhase p = square_completion_example();
  Vec pt(3);
  pt << 1.0, 0.5, -0.5;  // theta = -(x - y)
  EXPECT_TRUE(cone_test(p, 1e-6, pt));
  pt(2) = 3.0;
  EXPECT_FALSE(cone_test(p, 0.1, pt));
}
