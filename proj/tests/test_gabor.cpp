#include <gtest/gtest.h>

#include "fiolab/gabor.hpp"

using namespace fiolab;

namespace {

const GridSpec g128(1, 128, 10.0);

}  // namespace

TEST(Gabor, VacuumTransformByHand) {
  // |T_psi0 psi0|(x, xi) = (2 pi)^{-1/2} exp(-(x^2 + xi^2) / 4)
  const PhaseSpaceField F = gabor_transform(psi0(g128), Window::psi0());
  double worst = 0.0;
  for (int i = 0; i < F.nx(); ++i)
    for (int m = 0; m < F.nxi(); ++m) {
      const double ref = std::exp(-0.25 * (F.x(i) * F.x(i) + F.xi(m) * F.xi(m))) / std::sqrt(2 * pi);
      worst = std::max(worst, std::abs(std::abs(F.values(i, m)) - ref));
    }
  EXPECT_LE(worst, 1e-10);  // periodic window wrap at the box edge is ~exp(-R^2 / 4)
}

TEST(Gabor, GridTransformMatchesPointQuadrature) {
  const GridFunction u = gaussian_packet(g128, 1.0, -2.0) + hermite(g128, 3);
  const PhaseSpaceField F = gabor_transform(u, Window::psi0());
  for (int i : {20, 64, 90})
    for (int m : {30, 64, 100}) EXPECT_LE(std::abs(F.values(i, m) - gabor_at(u, Window::psi0(), F.x(i), F.xi(m))), 1e-12);
}

TEST(Gabor, MoyalIdentity) {
  for (const GridFunction& u : {psi0(g128), hermite(g128, 4), gaussian_packet(g128, -1.0, 1.5, 0.7)})
    EXPECT_NEAR(field_norm(gabor_transform(u, Window::psi0())), u.norm(), 1e-10 * u.norm());
}

TEST(Gabor, InversionWithAnotherWindow) {
  const GridFunction u = gaussian_packet(g128, 0.5, 1.0) + hermite(g128, 2) * 0.5;
  const GridFunction g = Window::psi0().sample(g128);
  const GridFunction h = gaussian_packet(g128, 0.0, 0.0, 1.3);
  EXPECT_LE((gabor_inverse(gabor_transform(u, g), g, h) - u).norm(), 1e-9 * u.norm());
  EXPECT_THROW(gabor_inverse(gabor_transform(u, g), g, hermite(g128, 1)), PreconditionError);
}

TEST(Gabor, SchwartzDecay) {
  EXPECT_EQ(schwartz_decay_check(psi0(g128)).status, Status::pass);
  // the bulk has to sit inside r_min = r_max / 4 for the finite-window fit to see decay
  EXPECT_EQ(schwartz_decay_check(gaussian_packet(g128, 0.5, -0.5)).status, Status::pass);
  const GridFunction slow = GridFunction::sample(g128, [](std::span<const double> x) { return cplx(1.0 / (1 + x[0] * x[0]), 0); });
  EXPECT_EQ(schwartz_decay_check(slow).status, Status::fail);
}

TEST(WaveFront, DeltaPointsAlongTheFrequencyAxis) {
  const GridSpec s(1, 512, 32.0);
  const WavefrontReport r = wavefront_estimate(discrete_delta(s));
  ASSERT_EQ(r.status, Status::pass);
  ASSERT_FALSE(r.sectors.empty());
  for (int b : r.sectors) {
    const int to_up = std::min(std::abs(b - 16), 64 - std::abs(b - 16));
    const int to_down = std::min(std::abs(b - 48), 64 - std::abs(b - 48));
    EXPECT_LE(std::min(to_up, to_down), 1) << "sector " << b;
  }
}

TEST(WaveFront, GaussianHasNone) {
  const GridSpec s(1, 512, 32.0);
  EXPECT_TRUE(wavefront_estimate(psi0(s)).sectors.empty());
}

TEST(WaveFront, JumpPointsAlongTheFrequencyAxis) {
  const GridSpec s(1, 512, 32.0);
  // Heaviside times a wide bump: singular at 0 only
  const GridFunction u = GridFunction::sample(s, [](std::span<const double> x) {
    return cplx(x[0] >= 0 ? std::exp(-x[0] * x[0] / 50) : 0.0, 0.0);
  });
  const WavefrontReport r = wavefront_estimate(u);
  ASSERT_FALSE(r.sectors.empty());
  for (int b : r.sectors) EXPECT_TRUE(std::abs(sector_angle(b, 64) - pi / 2) < 0.2 || std::abs(sector_angle(b, 64) - 3 * pi / 2) < 0.2);
}

TEST(FbiCovariance, MetaplecticImagesMatchPulledBackTransforms) {
  const SymplecticMatrix rot(Mat{{std::cos(0.7), std::sin(0.7)}, {-std::sin(0.7), std::cos(0.7)}});
  for (const SymplecticMatrix& chi : {standard_J(1), chirp_matrix(Mat::Constant(1, 1, 0.8)), rot})
    EXPECT_LE(fbi_covariance_residual(chi, gaussian_packet(g128, 1.0, 0.5), Window::psi0(), g128), 1e-8);
}

TEST(Twist, IsUnimodular) {
  Rng rng(51);
  const Twist t = twist_chi(random_symplectic(rng, 1));
  for (double x : {-2.0, 0.5})
    for (double xi : {-1.0, 3.0}) {
      const double xs[2] = {x, 0.3}, xis[2] = {xi, -0.7};
      EXPECT_NEAR(std::abs(t(std::span<const double>(xs, 2), std::span<const double>(xis, 2))), 1.0, 1e-14);
    }
}

TEST(ShellProfile, SlopeOfAPowerLaw) {
  std::vector<double> r;
  std::vector<double> v;
  for (int k = 0; k < 400; ++k) {
    r.push_back(2.0 + k * 0.05);
    v.push_back(std::pow(r.back(), -3.0));
  }
  const ShellProfile p = shell_profile(r, Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())), 2.0, 22.0, 1e-12);
  EXPECT_NEAR(p.slope, -3.0, 0.05);
  EXPECT_NEAR(p.local_slope, -3.0, 0.05);
  EXPECT_FALSE(p.negligible);
}
