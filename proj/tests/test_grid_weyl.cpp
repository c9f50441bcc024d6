#include <gtest/gtest.h>

#include <random>

#include "fiolab/weyl.hpp"

using namespace fiolab;

namespace {

const GridSpec g128(1, 128, 10.0);

ShubinSymbol x_xi_plus(cplx c) {
  Polynomial p = monomial({1, 1});
  p.push_back({{0, 0}, c});
  return ShubinSymbol::polynomial(2, p);
}

double max_on_packets(const OperatorMatrix& P, const OperatorMatrix& Q) {
  double worst = 0.0;
  for (double x0 : {-2.0, 0.0, 1.5})
    for (double p0 : {-1.0, 0.0, 2.0}) {
      const GridFunction f = gaussian_packet(P.spec, x0, p0);
      worst = std::max(worst, (P.apply(f) - Q.apply(f)).norm() / f.norm());
    }
  return worst;
}

}  // namespace

TEST(Grid, RejectsBadSizes) {
  EXPECT_THROW(GridSpec(1, 100, 1.0), InputError);
  EXPECT_THROW(GridSpec(3, 64, 1.0), InputError);
  EXPECT_THROW(GridSpec(1, 64, -1.0), InputError);
}

TEST(Grid, DualGridCoversNyquist) {
  EXPECT_DOUBLE_EQ(g128.xi(0), -g128.nyquist());
  EXPECT_DOUBLE_EQ(g128.x(g128.n / 2), 0.0);
}

TEST(Fourier, GaussianIsAFixedPoint) {
  const GridFunction p0 = psi0(g128);
  const CVec hat = fourier_to_dual(g128, p0.values);
  for (int m = 0; m < g128.n; ++m)
    EXPECT_NEAR(std::abs(hat(m) - std::pow(pi, -0.25) * std::exp(-0.5 * g128.xi(m) * g128.xi(m))), 0.0, 1e-13);
}

TEST(Fourier, HermiteFunctionsAreEigenvectors) {
  for (int k = 0; k < 6; ++k) {
    const GridFunction hk = hermite(g128, k);
    const CVec hat = fourier_to_dual(g128, hk.values);
    const cplx eig = std::pow(cplx(0, -1), k);
    for (int m = 0; m < g128.n; ++m)
      EXPECT_NEAR(std::abs(hat(m) - eig * hermite_function(k, g128.xi(m))), 0.0, 1e-12);
  }
}

TEST(Fourier, RoundTripIsIdentity) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> nd;
  CVec f(64);
  for (auto& v : f) v = {nd(rng), nd(rng)};
  const GridSpec s(1, 64, 6.0);
  EXPECT_LE((fourier_from_dual(s, fourier_to_dual(s, f)) - f).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Hermite, OrthonormalOnTheGrid) {
  for (int j = 0; j < 8; ++j)
    for (int k = 0; k < 8; ++k)
      EXPECT_NEAR(std::abs(hermite(g128, j).inner(hermite(g128, k))), j == k ? 1.0 : 0.0, 1e-12);
}

TEST(Hermite, FirstOrderByHand) {
  for (double x : {-1.3, 0.0, 0.4, 2.2})
    EXPECT_NEAR(hermite_function(1, x), std::sqrt(2.0) * x * std::pow(pi, -0.25) * std::exp(-0.5 * x * x), 1e-15);
}

TEST(DiscreteDelta, HasUnitMass) {
  const GridFunction d = discrete_delta(g128);
  EXPECT_NEAR(std::abs(g128.h() * d.values.sum()), 1.0, 1e-14);
}

TEST(SizeGuard, DenseCapThrows) {
  EXPECT_THROW(guard_dense(dense_entry_cap + 1, "test"), SizeGuardError);
  EXPECT_NO_THROW(guard_dense(dense_entry_cap, "test"));
}

TEST(Weyl, IdentityAndPositionAreExact) {
  const int n = g128.n;
  EXPECT_LE(max_abs(weyl_kernel(ShubinSymbol::constant(2, 1.0), g128).M - CMat::Identity(n, n)), 1e-12);
  CMat X = CMat::Zero(n, n);
  for (int k = 0; k < n; ++k) X(k, k) = g128.x(k);
  EXPECT_LE(max_abs(weyl_kernel(ShubinSymbol::polynomial(2, monomial({1, 0})), g128).M - X), 1e-12);
}

TEST(Weyl, MomentumDifferentiatesPackets) {
  const OperatorMatrix P = weyl_kernel(ShubinSymbol::polynomial(2, monomial({0, 1})), g128);
  const GridFunction f = gaussian_packet(g128, 0.5, 1.0);
  // -i f' = (p0 + i (x - x0)) f
  GridFunction df = f;
  for (int k = 0; k < g128.n; ++k) df.values(k) *= cplx(1.0, g128.x(k) - 0.5);
  EXPECT_LE((P.apply(f) - df).norm() / f.norm(), 1e-10);
}

TEST(Weyl, HarmonicOscillatorSpectrum) {
  Eigen::SelfAdjointEigenSolver<CMat> es(weyl_kernel(ShubinSymbol::harmonic_oscillator(2), g128).M);
  for (int k = 0; k < 10; ++k) EXPECT_NEAR(es.eigenvalues()(k), 2.0 * k + 1.0, 1e-6);
}

TEST(Weyl, RealSymbolsGiveHermitianMatrices) {
  Vec c(2);
  c << 0.3, -0.2;
  const CMat M = weyl_kernel(ShubinSymbol::gaussian_modulated(c, 1.0, monomial({1, 1})), g128).M;
  EXPECT_LE(max_abs(M - M.adjoint()), 1e-13);
}

TEST(Weyl, ProductXSharpXi) {
  const OperatorMatrix X = weyl_kernel(ShubinSymbol::polynomial(2, monomial({1, 0})), g128);
  const OperatorMatrix P = weyl_kernel(ShubinSymbol::polynomial(2, monomial({0, 1})), g128);
  EXPECT_LE(max_on_packets(X * P, weyl_kernel(x_xi_plus(cplx(0, 0.5)), g128)), 1e-6);
  EXPECT_LE(max_on_packets(P * X, weyl_kernel(x_xi_plus(cplx(0, -0.5)), g128)), 1e-6);
}

TEST(Weyl, SymbolRoundTrip) {
  Vec c(2);
  c << 0.5, -0.3;
  const ShubinSymbol a = ShubinSymbol::gaussian_modulated(c, 1.0, {});
  const CMat back = symbol_from_kernel(weyl_kernel(a, g128)).on_grid();
  EXPECT_LE(max_abs(back - sample_phase_grid(a, g128).values), 1e-10);
}

TEST(Weyl, PairingWithWigner) {
  const GridFunction f = gaussian_packet(g128, 1.0, -0.5), g = hermite(g128, 2);
  EXPECT_LE(weyl_pairing_residual(ShubinSymbol::harmonic_oscillator(2), f, g), 1e-9);
  // growing symbols see the Wigner quadrature error at the box edge
  EXPECT_LE(weyl_pairing_residual(x_xi_plus(1.0), f, g), 1e-7);
}

TEST(KohnNirenberg, LeftQuantizationOfXXi) {
  // x D in left quantization equals the Weyl quantization of x xi + i/2.
  EXPECT_LE(max_on_packets(kn_kernel(x_xi_plus(0.0), g128), weyl_kernel(x_xi_plus(cplx(0, 0.5)), g128)), 1e-6);
}

TEST(Localization, ConstantSymbolGivesIdentity) {
  const int n = g128.n;
  EXPECT_LE(max_abs(localization_operator(ShubinSymbol::constant(2, 1.0), g128).M - CMat::Identity(n, n)), 1e-10);
}

TEST(Localization, HermiteEigenvaluesOfGaussianWeight) {
  // anti-Wick of |z|^2 is the oscillator shifted by one
  Eigen::SelfAdjointEigenSolver<CMat> es(localization_operator(ShubinSymbol::harmonic_oscillator(2), g128).M);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(es.eigenvalues()(k), 2.0 * k + 2.0, 1e-6);
}

TEST(ShubinDecay, OscillatorIsOrderTwoAndGaussianAnyOrder) {
  EXPECT_EQ(shubin_decay_test(sample_phase_grid(ShubinSymbol::harmonic_oscillator(2), g128).values, g128, 2.0, 1.0).status,
            Status::pass);
  EXPECT_EQ(shubin_decay_test(sample_phase_grid(ShubinSymbol::harmonic_oscillator(2), g128).values, g128, 1.0, 1.0).status,
            Status::fail);
  Vec c = Vec::Zero(2);
  EXPECT_EQ(shubin_decay_test(sample_phase_grid(ShubinSymbol::gaussian_modulated(c, 1.0, {}), g128).values, g128, -4.0, 1.0)
                .status,
            Status::pass);
}
