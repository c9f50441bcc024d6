#include <gtest/gtest.h>

#include "fiolab/fio.hpp"

using namespace fiolab;

namespace {

const GridSpec g128(1, 128, 10.0);
const ShubinSymbol one = ShubinSymbol::constant(2, 1.0);

SymplecticMatrix rotation(double degrees) {
  const double t = degrees * pi / 180;
  return SymplecticMatrix(Mat{{std::cos(t), std::sin(t)}, {-std::sin(t), std::cos(t)}});
}

ShubinSymbol gaussian_in_theta() {
  return ShubinSymbol::custom(3, 0.0, [](std::span<const double> z) { return cplx(std::exp(-z[2] * z[2]), 0.0); });
}

}  // namespace

TEST(FioSpec, RejectsPhasesThatAreNotGraphs) {
  EXPECT_THROW(FioSpec::oscillatory(QuadraticPhase::kernel_form(Mat::Zero(2, 2)), one), NotAGraphError);
  EXPECT_THROW(FioSpec::oscillatory(QuadraticPhase(Mat::Zero(2, 2), Mat::Zero(2, 1), Mat::Zero(1, 1)),
                                    ShubinSymbol::constant(3, 1.0)),
               RankError);
  EXPECT_THROW(FioSpec::oscillatory(QuadraticPhase::pseudodifferential(1), one), DimensionError);
}

TEST(FioKernel, OscillatoryIntegralByHand) {
  // int e^{i (x - y) theta} e^{-theta^2} d theta = sqrt(pi) e^{-(x - y)^2 / 4}
  const GridSpec g(1, 64, 6.0);
  const GridFunction K = fio_kernel(FioSpec::oscillatory(QuadraticPhase::pseudodifferential(1), gaussian_in_theta()), g);
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double u = g.x(i) - g.x(j);
      worst = std::max(worst, std::abs(K.at(i, j) - std::sqrt(pi) * std::exp(-0.25 * u * u)));
    }
  EXPECT_LE(worst, 1e-6 * std::sqrt(pi));  // quadrature stops at a relative change of 1e-6
}

TEST(FioKernel, FourierKernelIsAPureChirp) {
  const GridFunction K = fio_kernel(FioSpec::factored(one, standard_J(1)), g128);
  const cplx c = K.at(64, 64) * std::sqrt(2 * pi);
  EXPECT_NEAR(std::abs(c), 1.0, 1e-10);
  double worst = 0.0;
  for (int i = 32; i < 96; ++i)
    for (int j = 32; j < 96; ++j)
      worst = std::max(worst, std::abs(K.at(i, j) * std::sqrt(2 * pi) * std::exp(I_unit * g128.x(i) * g128.x(j)) - c));
  EXPECT_LE(worst, 1e-10);
}

TEST(FioKernel, KernelSamplesAgreeWithGridOperator) {
  const FioSpec s = FioSpec::factored(ShubinSymbol::harmonic_oscillator(2), standard_J(1), 2.0);
  EXPECT_LE(operator_residual(kernel_operator(fio_kernel(s, g128)), fio_operator(s, g128)), 1e-3);
}

TEST(Factorize, RecoversTheSymbolAndRejectsTheWrongMatrix) {
  const ShubinSymbol ho = ShubinSymbol::harmonic_oscillator(2);
  const GridFunction K = fio_kernel(FioSpec::factored(ho, standard_J(1), 2.0), g128);
  const FactorizationReport good = fio_factorize(K, standard_J(1), 2.0);
  EXPECT_EQ(good.status, Status::pass);
  EXPECT_LE(phase_aligned_error(good.b.on_grid(), sample_phase_grid(ho, g128).values, g128, 0.5 * g128.R), 1e-3);
  EXPECT_EQ(fio_factorize(K, SymplecticMatrix::identity(1), 2.0).status, Status::fail);
}

TEST(Compose, FourierTwiceIsReflection) {
  const CompositionResult r = fio_compose(FioSpec::factored(one, standard_J(1)), FioSpec::factored(one, standard_J(1)), g128);
  EXPECT_LE(max_abs(r.spec.chi().matrix() + Mat::Identity(2, 2)), 1e-14);
  EXPECT_LE(r.residual, 1e-6);
  EXPECT_EQ(r.status, Status::pass);
}

TEST(Compose, OrdersAddUp) {
  const ShubinSymbol ho = ShubinSymbol::harmonic_oscillator(2);
  const CompositionResult r = fio_compose(FioSpec::factored(ho, chirp_matrix(Mat::Constant(1, 1, 0.5)), 2.0),
                                          FioSpec::factored(ho, standard_J(1), 2.0), g128);
  EXPECT_EQ(r.spec.m, 4.0);
  EXPECT_LE(r.residual, 1e-3);
}

TEST(Adjoint, KernelIsTheConjugateTranspose) {
  const ShubinSymbol a = ShubinSymbol::custom(3, 0.0, [](std::span<const double> z) {
    return cplx(std::exp(-z[2] * z[2] - 0.25 * z[0] * z[0]), 0.3 * z[1] * std::exp(-z[1] * z[1] - z[2] * z[2]));
  });
  const GridSpec g(1, 64, 6.0);
  const FioSpec s = FioSpec::oscillatory(QuadraticPhase::pseudodifferential(1), a);
  const GridFunction K = fio_kernel(s, g), KA = fio_kernel(fio_adjoint(s), g);
  double worst = 0.0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) worst = std::max(worst, std::abs(KA.at(i, j) - std::conj(K.at(j, i))));
  EXPECT_LE(worst, 1e-8 * max_abs(K.values));
  EXPECT_THROW(fio_adjoint(FioSpec::factored(one, standard_J(1))), PreconditionError);
}

TEST(SmoothStep, EndpointsAndMonotonicity) {
  EXPECT_EQ(smooth_step(-0.5), 1.0);
  EXPECT_EQ(smooth_step(1.5), 0.0);
  EXPECT_NEAR(smooth_step(0.5), 0.5, 1e-15);
  for (double t = 0.0; t < 1.0; t += 0.01) EXPECT_GE(smooth_step(t), smooth_step(t + 0.01));
}

TEST(FbiSlice, FourierKernelRidgeIsTheAntidiagonal) {
  const GridFunction K = fio_kernel(FioSpec::factored(one, standard_J(1)), g128);
  const Mat S = kernel_fbi_slice(K);
  ASSERT_EQ(S.rows(), g128.n);
  for (int r = 0; r < S.rows(); ++r) {
    const double eta = g128.xi(r);
    if (std::abs(eta) > 0.6 * g128.R) continue;
    Eigen::Index c = 0;
    S.row(r).maxCoeff(&c);
    EXPECT_LE(std::abs(g128.x(static_cast<int>(c)) + eta), 2 * g128.h()) << "eta = " << eta;
  }
}

TEST(KernelWaveFront, MatchesTheGraphOnly) {
  const GridFunction K = fio_kernel(FioSpec::factored(one, standard_J(1)), g128);
  EXPECT_EQ(wf_kernel_check(K, standard_J(1)).status, Status::pass);
  EXPECT_EQ(wf_kernel_check(K, rotation(45)).status, Status::fail);
}

TEST(KernelCharacterization, FourierKernelAgainstRightAndWrongGraphs) {
  const GridFunction K = fio_kernel(FioSpec::factored(one, standard_J(1)), g128);
  EXPECT_EQ(kernel_characterization_check(K, standard_J(1), 0.0, 1.0, 1, 4.0).status, Status::pass);
  EXPECT_EQ(kernel_characterization_check(K, rotation(72), 0.0, 1.0, 1, 4.0).status, Status::fail);
}

TEST(WaveFrontPropagation, DeltaUnderFourierSpreadsAlongTheXAxis) {
  const GridSpec s(1, 512, 32.0);
  const PropagationReport r = wf_propagation_check(FioSpec::factored(one, standard_J(1)), discrete_delta(s));
  EXPECT_EQ(r.status, Status::pass);
  for (int b : r.out.sectors) EXPECT_LE(std::min(sector_distance(b, 0, 64), sector_distance(b, 32, 64)), 1);
}
