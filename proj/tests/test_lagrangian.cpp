#include <gtest/gtest.h>

#include "fiolab/lagrangian.hpp"

using namespace fiolab;

namespace {

const GridSpec g256(1, 256, 12.0);

Status membership(const GridFunction& u, const LagrangianSubspace& L, double m) {
  return lagrangian_membership_test(u, L, m, 1.0, 2, 2.0).status;
}

ShubinSymbol one_plus_square() { return ShubinSymbol::polynomial(1, {Monomial{{0}, 1.0}, Monomial{{2}, 1.0}}); }

}  // namespace

TEST(Synthesis, MatrixMapsTheBaseOntoTheLagrangian) {
  for (double a : {0.0, 0.3, 1.2, -0.7, pi / 2}) {
    const LagrangianSubspace L = line_lagrangian(a);
    for (bool flip : {false, true}) {
      const Mat col = synthesis_matrix(L, flip).matrix().col(0);
      EXPECT_NEAR(std::abs(col(0) * std::sin(a) - col(1) * std::cos(a)), 0.0, 1e-12);
    }
  }
}

TEST(Synthesis, DeltaOnTheFrequencyAxis) {
  const GridFunction u =
      lagrangian_synthesize(LagrangianDistSpec::make(line_lagrangian(pi / 2), ShubinSymbol::constant(1, 1.0), 0), g256);
  // inverse transform of the constant: sqrt(2 pi) times the discrete delta
  for (int k = 0; k < g256.n; ++k)
    EXPECT_NEAR(std::abs(u.values(k) - (k == g256.n / 2 ? std::sqrt(2 * pi) / g256.h() : 0.0)), 0.0, 1e-10);
}

TEST(Synthesis, ChirpOnAGraphLine) {
  const GridFunction u =
      lagrangian_synthesize(LagrangianDistSpec::make(line_lagrangian(std::atan(0.5)), ShubinSymbol::constant(1, 1.0), 0), g256);
  for (int k = 0; k < g256.n; k += 17)
    EXPECT_NEAR(std::abs(u.values(k) - std::exp(0.25 * I_unit * g256.x(k) * g256.x(k))), 0.0, 1e-12);
}

TEST(Synthesis, AgreesWithTheGridMetaplecticOperatorOnSmoothSymbols) {
  for (double a : {0.3, -0.7, 1.2}) {
    const auto spec = LagrangianDistSpec::make(line_lagrangian(a), ShubinSymbol::gaussian_modulated(Vec::Zero(1), 1.0, {}), 0);
    const GridFunction a0 = GridFunction::sample(g256, [&](std::span<const double> x) { return spec.a(x); });
    const GridFunction ref = mu_general(spec.chi_syn, g256).op.apply(a0);
    EXPECT_LE((lagrangian_synthesize(spec, g256) - ref).norm() / ref.norm(), 1e-8);
  }
}

TEST(Membership, DeltaAndChirp) {
  const LagrangianSubspace xi_axis = line_lagrangian(pi / 2), x_axis = line_lagrangian(0.0);
  const LagrangianSubspace chirp_line = line_lagrangian(std::atan(1.0));
  const GridFunction delta = lagrangian_synthesize(LagrangianDistSpec::make(xi_axis, ShubinSymbol::constant(1, 1.0), 0), g256);
  EXPECT_EQ(membership(delta, xi_axis, 0.0), Status::pass);
  EXPECT_EQ(membership(delta, x_axis, 0.0), Status::fail);
  const GridFunction chirp = lagrangian_synthesize(LagrangianDistSpec::make(chirp_line, ShubinSymbol::constant(1, 1.0), 0), g256);
  EXPECT_EQ(membership(chirp, chirp_line, 0.0), Status::pass);
  EXPECT_EQ(membership(chirp, x_axis, 0.0), Status::fail);
}

// Property: a synthesized distribution belongs to its own line and not to a line 0.5 rad away.
TEST(MembershipProperty, RandomLines) {
  Rng rng(61);
  std::uniform_real_distribution<double> angle(-std::atan(2.0), std::atan(2.0));
  for (int t = 0; t < 10; ++t) {
    const double a = angle(rng);
    const LagrangianSubspace L = line_lagrangian(a);
    const GridFunction u = lagrangian_synthesize(LagrangianDistSpec::make(L, one_plus_square(), 2), g256);
    EXPECT_EQ(membership(u, L, 2.0), Status::pass) << "alpha = " << a;
    EXPECT_EQ(membership(u, line_lagrangian(a + 0.5), 2.0), Status::fail) << "alpha = " << a;
  }
}

TEST(Membership, FourierImageOfDeltaIsConstant) {
  const auto d0 = LagrangianDistSpec::make(line_lagrangian(pi / 2), ShubinSymbol::constant(1, 1.0), 0);
  const FioOnLagrangianReport r = fio_on_lagrangian_check(FioSpec::factored(ShubinSymbol::constant(2, 1.0), standard_J(1)), d0, g256, 2, 2.0);
  EXPECT_EQ(r.membership.status, Status::pass);
  EXPECT_LE(max_principal_angle(r.target, line_lagrangian(0.0)), 1e-12);
}

TEST(Membership, ChirpInvarianceOfConormalClass) {
  const GridFunction delta =
      lagrangian_synthesize(LagrangianDistSpec::make(line_lagrangian(pi / 2), ShubinSymbol::constant(1, 1.0), 0), g256);
  const AgreementReport r = chirp_invariance_check(delta, Mat(1, 0), Mat::Constant(1, 1, 1.0), 0.0, 2, 2.0);
  EXPECT_TRUE(r.agree);
  EXPECT_EQ(r.status, Status::pass);
  EXPECT_THROW(chirp_invariance_check(delta, Mat::Constant(1, 1, 1.0), Mat::Constant(1, 1, 1.0), 0.0, 2, 2.0),
               PreconditionError);
}

TEST(Agreement, DisagreementIsAFailure) {
  EXPECT_EQ(agreement(Status::pass, Status::pass).status, Status::pass);
  EXPECT_EQ(agreement(Status::fail, Status::fail).status, Status::fail);
  EXPECT_EQ(agreement(Status::pass, Status::fail).status, Status::fail);
  EXPECT_EQ(agreement(Status::pass, Status::inconclusive).status, Status::inconclusive);
}

TEST(KernelLagrangian, FourierKernelAgreesWithItsTwistedGraph) {
  const GridSpec g(1, 128, 10.0);
  const GridFunction K = fio_kernel(FioSpec::factored(ShubinSymbol::constant(2, 1.0), standard_J(1)), g);
  const KernelLagrangianReport r = kernel_equals_lagrangian_check(K, standard_J(1), 0.0, 1.0, 1, 4.0);
  EXPECT_TRUE(r.verdict.agree);
  EXPECT_EQ(r.kernel.status, Status::pass);
}
