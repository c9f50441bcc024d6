#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fiolab {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr cplx I_unit{0.0, 1.0};

inline Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};

/// Raised when a block that must be invertible is (numerically) singular.
struct SingularBlockError : Error {
  double condition;
  SingularBlockError(const std::string& what, double cond) : Error(what), condition(cond) {}
};

struct RankError : Error {
  using Error::Error;
};

struct NotAGraphError : Error {
  using Error::Error;
};

struct PreconditionError : Error {
  using Error::Error;
};

/// Refusal to allocate something larger than the configured cap.
struct SizeGuardError : Error {
  std::size_t requested;
  std::size_t cap;
  SizeGuardError(const std::string& what, std::size_t req, std::size_t limit)
      : Error(what), requested(req), cap(limit) {}
};

struct QuadratureError : Error {
  using Error::Error;
};

struct InputError : Error {
  using Error::Error;
};

/// Three-valued outcome shared by all diagnostic reports.
enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "unknown";
}

/// Combine statuses: any inconclusive wins, then any fail.
inline Status combine(Status a, Status b) {
  if (a == Status::inconclusive || b == Status::inconclusive) return Status::inconclusive;
  if (a == Status::fail || b == Status::fail) return Status::fail;
  return Status::pass;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() ? static_cast<double>(m.cwiseAbs().maxCoeff()) : 0.0;
}

}  // namespace fiolab
