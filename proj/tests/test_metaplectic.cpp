#include <gtest/gtest.h>

#include "fiolab/metaplectic.hpp"

using namespace fiolab;

namespace {

const GridSpec g128(1, 128, 10.0);

double distance(const GridFunction& a, const GridFunction& b) { return (a - b).norm(); }

}  // namespace

TEST(Metaplectic, FourierSquaredIsReflection) {
  const OperatorMatrix F = mu_general(standard_J(1), g128).op;
  for (int k = 0; k < 6; ++k) {
    const GridFunction hk = hermite(g128, k);
    EXPECT_LE(distance((F * F).apply(hk), hk * (k % 2 ? -1.0 : 1.0)), 1e-9) << "k = " << k;
  }
}

TEST(Metaplectic, FourierOnHermiteFunctions) {
  const OperatorMatrix F = mu_general(standard_J(1), g128).op;
  for (int k = 0; k < 6; ++k) {
    const GridFunction hk = hermite(g128, k);
    EXPECT_LE(distance(F.apply(hk), hk * std::pow(cplx(0, -1), k)), 1e-9) << "k = " << k;
  }
}

TEST(Metaplectic, ChirpIsMultiplication) {
  const auto fam = test_family(g128, 1.0);
  for (double F : {-1.0, 0.5, 2.0})
    EXPECT_LE(residual_mod_phase(mu_general(chirp_matrix(Mat::Constant(1, 1, F)), g128).op, mu_chirp(F, g128), fam), 1e-10);
}

TEST(Metaplectic, DilationByHand) {
  const double A = 1.5;
  const GridFunction out = mu_linear(A, g128).apply(psi0(g128));
  const GridFunction ref = GridFunction::sample(g128, [A](std::span<const double> x) {
    const double y = x[0] / A;
    return cplx(std::pow(pi, -0.25) * std::exp(-0.5 * y * y) / std::sqrt(A), 0.0);
  });
  EXPECT_LE(distance(out, ref), 1e-10);
}

TEST(Metaplectic, GaussianImageOfRandomMatrices) {
  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const auto [a, b] = random_well_conditioned_pair(rng, 1);
    (void)b;
    EXPECT_LE(distance(mu_general(a, g128).op.apply(psi0(g128)), gaussian_image(a, g128)), 1e-6);
  }
}

TEST(Metaplectic, FactorizationReproducesTheMatrix) {
  Rng rng(42);
  for (int t = 0; t < 100; ++t) {
    const SymplecticMatrix chi = random_symplectic(rng, 1);
    const MetaplecticFactorization f = factorize_metaplectic(chi);
    EXPECT_LE(max_abs(f.product() - chi.matrix()), 1e-9 * std::max(1.0, max_abs(chi.matrix())));
  }
}

TEST(Metaplectic, FreeKernelAgreesWithFactoredOperator) {
  Rng rng(43);
  const auto fam = test_family(g128, 1.0);
  for (int t = 0; t < 10; ++t) {
    const auto [a, b] = random_well_conditioned_pair(rng, 1);
    (void)b;
    if (!is_free(a) || std::abs(a.B()(0, 0)) < 0.5) continue;
    EXPECT_LE(residual_mod_phase(mu_free(a, g128), mu_general(a, g128).op, fam), 1e-4);
  }
}

// Property: mu(a) mu(b) = c mu(ab) with |c| = 1, and each factor is unitary.
TEST(MetaplecticProperty, HomomorphismModuloPhase) {
  Rng rng(44);
  const auto fam = test_family(g128, 1.0);
  for (int t = 0; t < 20; ++t) {
    const auto [a, b] = random_well_conditioned_pair(rng, 1);
    const OperatorMatrix ma = mu_general(a, g128).op, mb = mu_general(b, g128).op;
    EXPECT_LT(residual_mod_phase(ma * mb, mu_general(a * b, g128).op, fam), 1e-4);
    EXPECT_LT(unitarity_defect(ma, fam), 1e-6);
  }
}

TEST(MetaplecticProperty, EgorovOnPolynomialSymbols) {
  Rng rng(45);
  for (int t = 0; t < 5; ++t) {
    const auto [a, b] = random_well_conditioned_pair(rng, 1);
    (void)b;
    EXPECT_LT(egorov_residual(a, ShubinSymbol::harmonic_oscillator(2), g128), 1e-3);
    EXPECT_LT(egorov_residual(a, ShubinSymbol::polynomial(2, monomial({1, 1})), g128), 1e-3);
  }
}

TEST(Metaplectic, PhaseFixMakesVacuumOverlapPositive) {
  const SymplecticMatrix chi = chirp_matrix(Mat::Constant(1, 1, 0.3)) * standard_J(1);
  const cplx c = mu_general(chi, g128).op.apply(psi0(g128)).inner(gaussian_image(chi, g128));
  EXPECT_NEAR(c.imag(), 0.0, 1e-12);
  EXPECT_GT(c.real(), 0.0);
}
