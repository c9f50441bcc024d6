#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fiolab/types.hpp"

namespace fiolab {

/// coefficient * prod_i z_i^{powers[i]}.
struct Monomial {
  std::vector<int> powers;
  cplx coefficient{1.0, 0.0};
};

using Polynomial = std::vector<Monomial>;

inline cplx eval_polynomial(const Polynomial& p, std::span<const double> z) {
  cplx acc = 0.0;
  for (const auto& mono : p) {
    cplx term = mono.coefficient;
    for (std::size_t i = 0; i < mono.powers.size() && i < z.size(); ++i)
      for (int e = 0; e < mono.powers[i]; ++e) term *= z[i];
    acc += term;
  }
  return acc;
}

inline int polynomial_degree(const Polynomial& p) {
  int deg = 0;
  for (const auto& mono : p) {
    int s = 0;
    for (int e : mono.powers) s += e;
    deg = std::max(deg, s);
  }
  return deg;
}

enum class SymbolKind { polynomial, gaussian_modulated, harmonic_oscillator, constant, custom };

inline const char* to_string(SymbolKind k) {
  switch (k) {
    case SymbolKind::polynomial: return "polynomial";
    case SymbolKind::gaussian_modulated: return "gaussian_modulated";
    case SymbolKind::harmonic_oscillator: return "harmonic_oscillator";
    case SymbolKind::constant: return "constant";
    case SymbolKind::custom: return "custom";
  }
  return "custom";
}

/// Function on R^{dim} (phase space R^{2d}, or R^{2d+N} for amplitudes) with a claimed
/// Shubin order (m, rho). Built-in kinds keep their parameters for serialization.
class ShubinSymbol {
 public:
  using Evaluator = std::function<cplx(std::span<const double>)>;

  static ShubinSymbol constant(int dim, cplx c) {
    ShubinSymbol s(SymbolKind::constant, dim, 0.0);
    s.constant_ = c;
    s.eval_ = [c](std::span<const double>) { return c; };
    return s;
  }

  static ShubinSymbol polynomial(int dim, Polynomial p) {
    ShubinSymbol s(SymbolKind::polynomial, dim, static_cast<double>(polynomial_degree(p)));
    s.poly_ = p;
    s.eval_ = [p = std::move(p)](std::span<const double> z) { return eval_polynomial(p, z); };
    return s;
  }

  /// |z|^2 on R^{dim}; for dim = 2 this is x^2 + xi^2.
  static ShubinSymbol harmonic_oscillator(int dim) {
    ShubinSymbol s(SymbolKind::harmonic_oscillator, dim, 2.0);
    s.eval_ = [](std::span<const double> z) {
      double r = 0;
      for (double v : z) r += v * v;
      return cplx(r, 0.0);
    };
    return s;
  }

  /// p(z) exp(-|z - center|^2 / (2 width^2)): order -infinity; claimed m defaults to 0.
  static ShubinSymbol gaussian_modulated(Vec center, double width, Polynomial p) {
    const int dim = static_cast<int>(center.size());
    ShubinSymbol s(SymbolKind::gaussian_modulated, dim, 0.0);
    s.center_ = center;
    s.width_ = width;
    s.poly_ = p;
    s.eval_ = [center = std::move(center), width, p = std::move(p)](std::span<const double> z) {
      double r2 = 0;
      for (Eigen::Index i = 0; i < center.size(); ++i) r2 += (z[i] - center(i)) * (z[i] - center(i));
      const cplx pv = p.empty() ? cplx(1.0) : eval_polynomial(p, z);
      return pv * std::exp(-r2 / (2 * width * width));
    };
    return s;
  }

  static ShubinSymbol custom(int dim, double m, Evaluator f, double rho = 1.0) {
    ShubinSymbol s(SymbolKind::custom, dim, m);
    s.rho_ = rho;
    s.eval_ = std::move(f);
    return s;
  }

  /// z -> a(M z) for a linear map M (e.g. a symplectic matrix).
  ShubinSymbol composed_with(const Mat& M) const {
    if (M.cols() != dim_ || M.rows() != dim_) throw DimensionError("composed_with: size mismatch");
    Evaluator inner = eval_;
    ShubinSymbol s = custom(dim_, m_, [inner, M](std::span<const double> z) {
      Eigen::Map<const Vec> zv(z.data(), static_cast<Eigen::Index>(z.size()));
      const Vec w = M * zv;
      return inner(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())));
    }, rho_);
    return s;
  }

  ShubinSymbol scaled(cplx c) const {
    Evaluator inner = eval_;
    return custom(dim_, m_, [inner, c](std::span<const double> z) { return c * inner(z); }, rho_);
  }

  ShubinSymbol with_order(double m, double rho = 1.0) const {
    ShubinSymbol s = *this;
    s.m_ = m;
    s.rho_ = rho;
    return s;
  }

  cplx operator()(std::span<const double> z) const { return eval_(z); }
  cplx operator()(double x, double xi) const {
    const double z[2] = {x, xi};
    return eval_(std::span<const double>(z, 2));
  }

  SymbolKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double order() const { return m_; }
  double rho() const { return rho_; }
  const Polynomial& poly() const { return poly_; }
  const Vec& center() const { return center_; }
  double width() const { return width_; }
  cplx constant_value() const { return constant_; }
  const Evaluator& evaluator() const { return eval_; }

 private:
  ShubinSymbol(SymbolKind k, int dim, double m) : kind_(k), dim_(dim), m_(m) {}

  SymbolKind kind_;
  int dim_;
  double m_;
  double rho_ = 1.0;
  Evaluator eval_;
  Polynomial poly_;
  Vec center_;
  double width_ = 1.0;
  cplx constant_{0.0, 0.0};
};

inline Polynomial monomial(std::vector<int> powers, cplx c = 1.0) { return {Monomial{std::move(powers), c}}; }

}  // namespace fiolab
