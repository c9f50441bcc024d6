#pragma once

// Acceptance suite: one function per criterion, each returning a status and the measured
// numbers. Thresholds live in `limits` and nowhere else.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "fiolab/io.hpp"

namespace fiolab {

namespace limits {
inline constexpr double symplectic_identity = 1e-12;
inline constexpr double inverse_formula = 1e-12;
inline constexpr double reduction_angle = 1e-9;
inline constexpr double helffer_sigma_min = 1e-8;
inline constexpr double mu_psi0 = 1e-8;
inline constexpr double homomorphism = 1e-4;
inline constexpr double unitarity = 1e-6;
inline constexpr double egorov = 1e-3;
inline constexpr double weyl_exact = 1e-10;
inline constexpr double ho_eigenvalue = 1e-6;
inline constexpr double x_sharp_xi = 1e-6;
inline constexpr double fbi_covariance = 1e-4;
inline constexpr double symbol_round_trip = 1e-3;
inline constexpr double composition = 1e-3;
inline constexpr double adjoint = 1e-8;
inline constexpr double char_off_slope = -4.0;  // N_max of the kernel characterization
inline constexpr double char_along_margin = 0.5;
inline constexpr int wf_bin_slack = 1;
inline constexpr double wf_kernel_angle = 0.4;
}  // namespace limits

struct SuiteOptions {
  bool quick = false;
  std::uint64_t seed = 20240611;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  Status status = Status::inconclusive;
  json metrics = json::object();
  double seconds = 0.0;  // wall time; never written to artifacts
  double budget = 0.0;   // seconds allowed
};

namespace detail {

inline Status verdict(bool ok) { return ok ? Status::pass : Status::fail; }

inline SymplecticMatrix rotation_chi(double degrees) {
  const double t = degrees * pi / 180;
  Mat m(2, 2);
  m << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
  return SymplecticMatrix(m);
}

inline SymplecticMatrix scaling_chi(double s) { return linear_lift(Mat::Constant(1, 1, s)); }

/// A non-free product: V_{1/2} U_{0.7} diag(-1.2, -1/1.2).
inline SymplecticMatrix composite_chi() {
  return SymplecticMatrix(chirp_matrix(Mat::Constant(1, 1, 0.5)).matrix() *
                          upper_chirp_matrix(Mat::Constant(1, 1, 0.7)).matrix() *
                          linear_lift(Mat::Constant(1, 1, -1.2)).matrix());
}

struct NamedSymbol {
  std::string name;
  ShubinSymbol a;
  double m;
};

inline std::vector<NamedSymbol> builtin_symbols() {
  Vec c(2);
  c << 0.5, -0.3;
  Polynomial p = monomial({1, 1});
  p.push_back({{0, 0}, 1.0});
  return {{"harmonic_oscillator", ShubinSymbol::harmonic_oscillator(2), 2.0},
          {"gaussian", ShubinSymbol::gaussian_modulated(c, 1.0, {}), 0.0},
          {"one_plus_x_xi", ShubinSymbol::polynomial(2, p), 2.0}};
}

struct NamedChi {
  std::string name;
  SymplecticMatrix chi;
};

inline std::vector<NamedChi> covariance_matrices() {
  return {{"J", standard_J(1)},
          {"chirp", chirp_matrix(Mat::Constant(1, 1, 1.0))},
          {"scaling", scaling_chi(1.5)},
          {"composite", composite_chi()}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Criteria

inline CriterionResult criterion_symplectic(const SuiteOptions& o) {
  CriterionResult r{1, "symplectic algebra", Status::pass, json::object(), 0.0, 5.0};
  const int count = o.quick ? 20 : 100;
  for (int d = 1; d <= 3; ++d) {
    Rng rng(o.seed + static_cast<std::uint64_t>(d));
    double worst_id = 0.0, worst_inv = 0.0;
    for (int t = 0; t < count; ++t) {
      const SymplecticMatrix chi = random_symplectic(rng, d);
      const Mat& M = chi.matrix();
      const Mat J = standard_J_matrix(d);
      worst_id = std::max(worst_id, max_abs(M.transpose() * J * M - J));
      const Mat lu = M.partialPivLu().inverse();
      worst_inv = std::max(worst_inv, max_abs(symplectic_inverse(chi).matrix() - lu) / std::max(1.0, max_abs(lu)));
    }
    r.metrics["d" + std::to_string(d)] = {{"identity_residual", worst_id}, {"inverse_residual", worst_inv}};
    r.status = combine(r.status, detail::verdict(worst_id <= limits::symplectic_identity &&
                                                 worst_inv <= limits::inverse_formula));
  }
  r.metrics["samples_per_d"] = count;
  return r;
}

inline CriterionResult criterion_phase_reduction(const SuiteOptions& o) {
  CriterionResult r{2, "phase reduction", Status::pass, json::object(), 0.0, 10.0};
  const int count = o.quick ? 20 : 100;
  Rng rng(o.seed + 10);
  std::uniform_int_distribution<int> dd(1, 2), nn(0, 3);
  double worst_angle = 0.0, worst_q = 0.0, min_sigma = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int t = 0; t < count; ++t) {
    const int d = dd(rng), N = nn(rng);
    const QuadraticPhase p = random_phase(rng, d, N);
    try {
      const ReductionRecord rec = reduce_phase(p);
      worst_q = std::max(worst_q, max_abs(rec.reduced.Q));
      if (rec.n > 0) min_sigma = std::min(min_sigma, sigma_min(rec.reduced.L));
      worst_angle = std::max(worst_angle, max_principal_angle(lagrangian_of_phase(p), lagrangian_of_phase(rec.reduced)));
    } catch (const Error&) {
      ++failures;
    }
  }
  r.metrics = {{"samples", count}, {"max_principal_angle", worst_angle}, {"max_abs_reduced_Q", worst_q},
               {"min_sigma_L", std::isfinite(min_sigma) ? json(min_sigma) : json(nullptr)}, {"failures", failures}};
  r.status = detail::verdict(failures == 0 && worst_q == 0.0 && worst_angle < limits::reduction_angle);
  return r;
}

inline CriterionResult criterion_helffer(const SuiteOptions& o) {
  CriterionResult r{3, "Helffer invertibility", Status::pass, json::object(), 0.0, 5.0};
  const int count = o.quick ? 20 : 100;
  Rng rng(o.seed + 20);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < count; ++t) {
    const int d = 1 + t % 2;
    const SymplecticMatrix c1 = random_free_symplectic(rng, d), c2 = random_free_symplectic(rng, d);
    // alternate between kernels with and without fiber variables
    const QuadraticPhase p = t % 3 == 0 ? QuadraticPhase::from_free(c1) : composed_free_phase(c1, c2);
    const auto [left, right] = helffer_matrices(p);
    worst = std::min({worst, sigma_min(left), sigma_min(right)});
  }
  r.metrics = {{"samples", count}, {"min_sigma", worst}};
  r.status = detail::verdict(worst > limits::helffer_sigma_min);
  return r;
}

inline CriterionResult criterion_metaplectic(const SuiteOptions& o) {
  CriterionResult r{4, "metaplectic identities", Status::pass, json::object(), 0.0, 60.0};
  const GridSpec s(1, 256, 12.0);
  const GridFunction p0 = psi0(s);
  const double jpsi = (mu_general(standard_J(1), s).op.apply(p0) - p0).norm();
  const auto fam = test_family(s, 1.0);
  Rng rng(o.seed + 30);
  const int pairs = o.quick ? 5 : 20;
  double homo = 0.0, unit = 0.0;
  for (int t = 0; t < pairs; ++t) {
    const auto [a, b] = random_well_conditioned_pair(rng, 1);
    const OperatorMatrix ma = mu_general(a, s).op, mb = mu_general(b, s).op, mab = mu_general(a * b, s).op;
    homo = std::max(homo, residual_mod_phase(ma * mb, mab, fam));
    unit = std::max({unit, unitarity_defect(ma, fam), unitarity_defect(mb, fam), unitarity_defect(mab, fam)});
  }
  r.metrics = {{"mu_J_psi0", jpsi}, {"homomorphism", homo}, {"unitarity", unit}, {"pairs", pairs}};
  r.status = detail::verdict(jpsi < limits::mu_psi0 && homo < limits::homomorphism && unit < limits::unitarity);
  return r;
}

inline CriterionResult criterion_egorov(const SuiteOptions& o) {
  CriterionResult r{5, "Egorov covariance", Status::pass, json::object(), 0.0, 120.0};
  const GridSpec s(1, 128, 10.0);
  double worst = 0.0;
  auto symbols = detail::builtin_symbols();
  if (o.quick) symbols.erase(symbols.begin() + 1, symbols.end());
  for (const auto& c : detail::covariance_matrices())
    for (const auto& a : symbols) {
      const double e = egorov_residual(c.chi, a.a, s);
      r.metrics[c.name + "/" + a.name] = e;
      worst = std::max(worst, e);
    }
  r.metrics["max"] = worst;
  r.status = detail::verdict(worst < limits::egorov);
  return r;
}

inline CriterionResult criterion_weyl(const SuiteOptions&) {
  CriterionResult r{6, "Weyl calculus", Status::pass, json::object(), 0.0, 60.0};
  const GridSpec g(1, 128, 10.0);
  const int n = g.n;
  const double id = max_abs(weyl_kernel(ShubinSymbol::constant(2, 1.0), g).M - CMat::Identity(n, n));
  CMat X = CMat::Zero(n, n), X2 = CMat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    X(k, k) = g.x(k);
    X2(k, k) = g.x(k) * g.x(k);
  }
  const double mult = std::max(max_abs(weyl_kernel(ShubinSymbol::polynomial(2, monomial({1, 0})), g).M - X),
                               max_abs(weyl_kernel(ShubinSymbol::polynomial(2, monomial({2, 0})), g).M - X2) /
                                   max_abs(X2));
  const GridSpec s(1, 256, 12.0);
  Eigen::SelfAdjointEigenSolver<CMat> es(weyl_kernel(ShubinSymbol::harmonic_oscillator(2), s).M);
  double eig = 0.0;
  json eigs = json::array();
  for (int k = 0; k < 10; ++k) {
    eigs.push_back(es.eigenvalues()(k));
    eig = std::max(eig, std::abs(es.eigenvalues()(k) - (2 * k + 1)));
  }
  // x # xi against x xi + i/2 at operator level, on unit packets.
  const OperatorMatrix Xo = weyl_kernel(ShubinSymbol::polynomial(2, monomial({1, 0})), g);
  const OperatorMatrix Po = weyl_kernel(ShubinSymbol::polynomial(2, monomial({0, 1})), g);
  Polynomial q = monomial({1, 1});
  q.push_back({{0, 0}, cplx(0, 0.5)});
  const OperatorMatrix W = weyl_kernel(ShubinSymbol::polynomial(2, q), g);
  double sharp = 0.0;
  for (double x0 : {-2.0, 0.0, 1.5})
    for (double p0 : {-1.0, 0.0, 2.0}) {
      const GridFunction f = gaussian_packet(g, x0, p0);
      sharp = std::max(sharp, ((Xo * Po).apply(f) - W.apply(f)).norm() / f.norm());
    }
  r.metrics = {{"identity", id}, {"multiplication", mult}, {"ho_eigen_error", eig}, {"ho_eigenvalues", eigs},
               {"x_sharp_xi", sharp}};
  r.status = detail::verdict(id <= limits::weyl_exact && mult <= limits::weyl_exact && eig < limits::ho_eigenvalue &&
                             sharp < limits::x_sharp_xi);
  return r;
}

inline CriterionResult criterion_fbi(const SuiteOptions& o) {
  CriterionResult r{7, "FBI covariance", Status::pass, json::object(), 0.0, 60.0};
  const GridSpec s(1, 128, 10.0);
  std::vector<std::pair<std::string, GridFunction>> signals{
      {"psi0", psi0(s)}, {"hermite1", hermite(s, 1)}, {"packet", gaussian_packet(s, 1.0, -0.5)}};
  if (o.quick) signals.erase(signals.begin() + 1, signals.end());
  double worst = 0.0;
  for (const auto& c : detail::covariance_matrices())
    for (const auto& [name, u] : signals) {
      const double e = fbi_covariance_residual(c.chi, u, Window::psi0(), s);
      r.metrics[c.name + "/" + name] = e;
      worst = std::max(worst, e);
    }
  r.metrics["max"] = worst;
  r.status = detail::verdict(worst < limits::fbi_covariance);
  return r;
}

inline CriterionResult criterion_factorization(const SuiteOptions& o) {
  CriterionResult r{8, "factorization", Status::pass, json::object(), 0.0, 180.0};
  const GridSpec g(1, 128, 10.0);
  const auto sym = detail::builtin_symbols();
  struct Pair {
    std::size_t symbol;
    std::string chi_name;
    SymplecticMatrix chi;
  };
  std::vector<Pair> pairs{{0, "J", standard_J(1)},
                          {1, "J", standard_J(1)},
                          {2, "rotation72", detail::rotation_chi(72)},
                          {0, "scaling", detail::scaling_chi(1.5)},
                          {1, "chirp", chirp_matrix(Mat::Constant(1, 1, 0.5))},
                          {2, "composite", detail::composite_chi()}};
  if (o.quick) pairs.erase(pairs.begin() + 3, pairs.end());
  double worst = 0.0;
  bool all_pass = true;
  for (const auto& p : pairs) {
    const auto& a = sym[p.symbol];
    const FactorizationReport fr = fio_factorize(fio_kernel(FioSpec::factored(a.a, p.chi, a.m), g), p.chi, a.m);
    const double e = phase_aligned_error(fr.b.on_grid(), sample_phase_grid(a.a, g).values, g, 0.5 * g.R);
    r.metrics[a.name + "/" + p.chi_name] = {{"round_trip", e}, {"residual", fr.residual}, {"status", to_string(fr.status)}};
    worst = std::max(worst, e);
    all_pass = all_pass && fr.status == Status::pass;
  }
  const FactorizationReport neg =
      fio_factorize(fio_kernel(FioSpec::factored(sym[0].a, standard_J(1), 2.0), g), SymplecticMatrix::identity(1), 2.0);
  r.metrics["negative_control"] = {{"status", to_string(neg.status)}, {"residual", neg.residual}};
  r.metrics["max_round_trip"] = worst;
  r.status = detail::verdict(all_pass && worst < limits::symbol_round_trip && neg.status == Status::fail);
  return r;
}

inline CriterionResult criterion_composition(const SuiteOptions& o) {
  CriterionResult r{9, "composition and adjoint", Status::pass, json::object(), 0.0, 120.0};
  const GridSpec g(1, 128, 10.0);
  const auto one = ShubinSymbol::constant(2, 1.0);
  const auto ho = ShubinSymbol::harmonic_oscillator(2);
  struct Case {
    std::string name;
    FioSpec a, b;
  };
  std::vector<Case> cases{
      {"J_J", FioSpec::factored(one, standard_J(1)), FioSpec::factored(one, standard_J(1))},
      {"ho_J_ho_chirp", FioSpec::factored(ho, standard_J(1), 2), FioSpec::factored(ho, chirp_matrix(Mat::Constant(1, 1, 0.5)), 2)},
      {"ho_chirp_ho_J", FioSpec::factored(ho, chirp_matrix(Mat::Constant(1, 1, 0.5)), 2), FioSpec::factored(ho, standard_J(1), 2)}};
  if (o.quick) cases.erase(cases.begin() + 2, cases.end());
  double worst = 0.0;
  for (const auto& c : cases) {
    const CompositionResult cr = fio_compose(c.a, c.b, g);
    r.metrics["compose/" + c.name] = cr.residual;
    worst = std::max(worst, cr.residual);
  }
  // adjoint: kernel of the adjoint spec against the conjugate transpose
  Mat F(2, 2);
  F << 0, -1, -1, 0;
  const auto gauss = ShubinSymbol::custom(3, 0, [](std::span<const double> z) {
    const double m = 0.5 * (z[0] + z[1]);
    return cplx(std::exp(-z[2] * z[2] - m * m), 0.3 * z[0] * std::exp(-z[0] * z[0] - z[2] * z[2]));
  });
  std::vector<std::pair<std::string, FioSpec>> adj{
      {"fourier", FioSpec::oscillatory(QuadraticPhase::kernel_form(F), ShubinSymbol::constant(2, 1.0))},
      {"pseudodifferential", FioSpec::oscillatory(QuadraticPhase::pseudodifferential(1), gauss)}};
  double worst_adj = 0.0;
  for (const auto& [name, s] : adj) {
    const GridFunction K = fio_kernel(s, g), KA = fio_kernel(fio_adjoint(s), g);
    double e = 0.0;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) e = std::max(e, std::abs(KA.at(i, j) - std::conj(K.at(j, i))));
    e /= std::max(max_abs(K.values), 1e-300);
    r.metrics["adjoint/" + name] = e;
    worst_adj = std::max(worst_adj, e);
  }
  r.metrics["max_composition"] = worst;
  r.metrics["max_adjoint"] = worst_adj;
  r.status = detail::verdict(worst < limits::composition && worst_adj < limits::adjoint);
  return r;
}

inline json char_metrics(const CharReport& rep) { return to_json(rep); }

inline CriterionResult criterion_kernel_char(const SuiteOptions& o) {
  CriterionResult r{10, "kernel characterization", Status::pass, json::object(), 0.0, 600.0};
  const GridSpec g = GridSpec(1, 128, 10.0);
  const double N = -limits::char_off_slope;
  struct Case {
    std::string name;
    ShubinSymbol b;
    double m;
  };
  const std::vector<Case> cases{{"mu_J", ShubinSymbol::constant(2, 1.0), 0.0},
                                {"ho_mu_J", ShubinSymbol::harmonic_oscillator(2), 2.0}};
  for (const auto& c : cases) {
    const GridFunction K = fio_kernel(FioSpec::factored(c.b, standard_J(1), c.m), g);
    CharConfig cfg = default_char_config(K.spec);
    cfg.along_margin = limits::char_along_margin;
    const CharReport rep = kernel_characterization_check(K, standard_J(1), c.m, 1.0, 1, N, cfg);
    r.metrics[c.name] = char_metrics(rep);
    r.status = combine(r.status, rep.status);
  }
  r.metrics["grid"] = {{"n", g.n}, {"R", g.R}, {"stride", default_char_config(GridSpec(2, g.n, g.R)).stride}};
  return r;
}

inline CriterionResult criterion_wave_front(const SuiteOptions& o) {
  CriterionResult r{11, "wave front sets", Status::pass, json::object(), 0.0, 60.0};
  const GridSpec s(1, 512, 32.0);
  const WavefrontReport wd = wavefront_estimate(discrete_delta(s));
  const int up = sector_of(pi / 2, wd.bins), down = sector_of(-pi / 2, wd.bins);
  bool near_axis = !wd.sectors.empty(), hit_up = false, hit_down = false;
  for (int b : wd.sectors) {
    const bool u = sector_distance(b, up, wd.bins) <= limits::wf_bin_slack;
    const bool d = sector_distance(b, down, wd.bins) <= limits::wf_bin_slack;
    near_axis = near_axis && (u || d);
    hit_up = hit_up || u;
    hit_down = hit_down || d;
  }
  const bool delta_ok = wd.status == Status::pass && near_axis && hit_up && hit_down;
  r.metrics["delta_sectors"] = wd.sectors;

  const GridSpec gk = GridSpec(1, 128, 10.0);
  const GridFunction K = fio_kernel(FioSpec::factored(ShubinSymbol::constant(2, 1.0), standard_J(1)), gk);
  const KernelWfReport kw = wf_kernel_check(K, standard_J(1), 2.0, limits::wf_kernel_angle);
  r.metrics["kernel_sectors"] = kw.sectors;
  r.metrics["kernel_status"] = to_string(kw.status);

  const PropagationReport pr =
      wf_propagation_check(FioSpec::factored(ShubinSymbol::constant(2, 1.0), standard_J(1)), discrete_delta(s));
  r.metrics["propagation"] = {{"in", pr.in.sectors}, {"out", pr.out.sectors}, {"mapped", pr.mapped},
                              {"status", to_string(pr.status)}};
  r.status = combine(combine(detail::verdict(delta_ok), kw.status), pr.status);
  return r;
}

inline CriterionResult criterion_lagrangian(const SuiteOptions& o) {
  CriterionResult r{12, "kernel / Lagrangian equivalence", Status::pass, json::object(), 0.0, 600.0};
  const GridSpec g = GridSpec(1, 128, 10.0);
  const double N = -limits::char_off_slope;
  const auto one = ShubinSymbol::constant(2, 1.0);
  Polynomial p = monomial({1, 1});
  p.push_back({{0, 0}, 1.0});
  const SymplecticMatrix chirpJ = chirp_matrix(Mat::Constant(1, 1, 0.5)) * standard_J(1);
  struct Case {
    std::string name;
    FioSpec spec;
    SymplecticMatrix tested;
    bool positive;
  };
  std::vector<Case> cases{
      {"mu_J", FioSpec::factored(one, standard_J(1)), standard_J(1), true},
      {"ho_mu_J", FioSpec::factored(ShubinSymbol::harmonic_oscillator(2), standard_J(1), 2), standard_J(1), true},
      {"rotation72", FioSpec::factored(one, detail::rotation_chi(72)), detail::rotation_chi(72), true},
      {"x_xi_chirp_J", FioSpec::factored(ShubinSymbol::polynomial(2, p), chirpJ, 2), chirpJ, true},
      {"mu_J_vs_identity", FioSpec::factored(one, standard_J(1)), SymplecticMatrix::identity(1), false},
      {"rotation72_vs_J", FioSpec::factored(one, detail::rotation_chi(72)), standard_J(1), false}};
  if (o.quick) cases = {cases[0], cases[1], cases[4], cases[5]};
  for (const auto& c : cases) {
    const GridFunction K = fio_kernel(c.spec, g);
    const KernelLagrangianReport rep = kernel_equals_lagrangian_check(K, c.tested, c.spec.m, 1.0, 1, N);
    const Status want = c.positive ? Status::pass : Status::fail;
    const bool ok = rep.verdict.agree && rep.kernel.status == want;
    r.metrics[c.name] = {{"kernel", to_string(rep.kernel.status)}, {"lagrangian", to_string(rep.lagrangian.status)},
                         {"expected", to_string(want)}, {"ok", ok}};
    r.status = combine(r.status, detail::verdict(ok));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Orchestration

using CriterionFn = std::function<CriterionResult(const SuiteOptions&)>;

inline const std::vector<CriterionFn>& criteria() {
  static const std::vector<CriterionFn> all{criterion_symplectic,   criterion_phase_reduction, criterion_helffer,
                                            criterion_metaplectic,  criterion_egorov,          criterion_weyl,
                                            criterion_fbi,          criterion_factorization,   criterion_composition,
                                            criterion_kernel_char,  criterion_wave_front,      criterion_lagrangian};
  return all;
}

/// Runs one criterion, timing it; an exception becomes an inconclusive result with the message.
inline CriterionResult run_criterion(int id, const SuiteOptions& o) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = criteria().at(static_cast<std::size_t>(id - 1))(o);
  } catch (const std::exception& e) {
    r.id = id;
    r.status = Status::inconclusive;
    r.metrics = {{"error", e.what()}};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget > 0 && r.seconds > r.budget) {
    r.metrics["over_budget"] = true;
    r.status = combine(r.status, Status::fail);
  }
  return r;
}

inline json to_json(const CriterionResult& r) {
  return {{"id", r.id}, {"title", r.title}, {"status", to_string(r.status)}, {"metrics", r.metrics},
          {"budget_seconds", r.budget}};
}

/// Writes one JSON per criterion plus a kernel FBI slice (PGM) and the delta wave front (CSV).
/// `report` sees each result as soon as it is available.
inline std::vector<CriterionResult> write_suite_artifacts(ArtifactWriter& out, const SuiteOptions& o,
                                                          const std::vector<int>& ids,
                                                          const std::function<void(const CriterionResult&)>& report = {}) {
  std::vector<CriterionResult> results;
  for (int id : ids) {
    results.push_back(run_criterion(id, o));
    out.write_json("criterion_" + std::to_string(id) + ".json", to_json(results.back()));
    if (report) report(results.back());
  }
  const GridSpec g = GridSpec(1, 128, 10.0);
  const GridFunction K = fio_kernel(FioSpec::factored(ShubinSymbol::constant(2, 1.0), standard_J(1)), g);
  out.write_bytes("fbi_slice_mu_J.pgm", pgm_image(kernel_fbi_slice(K)));
  std::ostringstream csv;
  csv << std::setprecision(17) << "sector,slope,negligible\n";
  const WavefrontReport wd = wavefront_estimate(discrete_delta(GridSpec(1, 512, 32.0)));
  for (int b = 0; b < wd.bins; ++b)
    csv << b << ',' << wd.slopes[static_cast<std::size_t>(b)] << ',' << int(wd.negligible[static_cast<std::size_t>(b)]) << '\n';
  out.write_text("delta_wavefront.csv", csv.str());
  json summary = json::array();
  for (const auto& r : results) summary.push_back({{"id", r.id}, {"status", to_string(r.status)}});
  out.write_json("summary.json", {{"criteria", summary}});
  out.finish();
  return results;
}

/// Byte comparison of two artifact directories through their manifests.
inline bool same_artifacts(const std::filesystem::path& a, const std::filesystem::path& b, json* detail = nullptr) {
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  const std::string ma = slurp(a / "manifest.json"), mb = slurp(b / "manifest.json");
  if (detail) (*detail)["manifest_sha256"] = {sha256_hex(ma), sha256_hex(mb)};
  if (ma.empty() || ma != mb) return false;
  for (const auto& f : json::parse(ma).at("files"))
    if (sha256_hex(slurp(b / f.at("file").get<std::string>())) != f.at("sha256").get<std::string>()) return false;
  return true;
}

inline json suite_config(const SuiteOptions& o) { return {{"command", "suite"}, {"quick", o.quick}, {"seed", o.seed}}; }

/// Criterion 13: the quick suite twice with the same seed, compared byte for byte.
inline CriterionResult criterion_determinism(const SuiteOptions& o, const std::filesystem::path& scratch) {
  CriterionResult r{13, "determinism", Status::inconclusive, json::object(), 0.0, 0.0};
  const auto t0 = std::chrono::steady_clock::now();
  SuiteOptions q = o;
  q.quick = true;
  std::vector<int> ids;
  for (int i = 1; i <= 12; ++i) ids.push_back(i);
  const std::filesystem::path a = scratch / "run_a", b = scratch / "run_b";
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  {
    ArtifactWriter wa(a, suite_config(q));
    write_suite_artifacts(wa, q, ids);
    ArtifactWriter wb(b, suite_config(q));
    write_suite_artifacts(wb, q, ids);
  }
  json d;
  r.status = detail::verdict(same_artifacts(a, b, &d));
  r.metrics = d;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace fiolab
