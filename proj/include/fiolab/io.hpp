#pragma once

// Artifact plumbing: JSON schemas for specs and reports, CSV/PGM writers, and a manifest
// that lists every written file with its SHA-256. Needs nlohmann/json and libcrypto.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "fiolab/lagrangian.hpp"

namespace fiolab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Encoding

inline json to_json(const Mat& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) r.push_back(M(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline json to_json(cplx c) { return json::array({c.real(), c.imag()}); }

inline json to_json(const QuadraticPhase& p) {
  return {{"d", p.d}, {"N", p.N}, {"F", to_json(p.F)}, {"L", to_json(p.L)}, {"Q", to_json(p.Q)}};
}

inline json to_json(const LagrangianSubspace& L) {
  json j{{"basis", to_json(L.basis())}, {"dim", L.n()}};
  const LagrangianParam p = L.param() ? *L.param() : L.derive_param();
  j["Y"] = to_json(p.Y);
  j["F"] = to_json(p.F);
  return j;
}

inline json to_json(const ReductionRecord& r) {
  json elim = json::array();
  for (const auto& e : r.eliminated) elim.push_back({{"q", e.q}, {"ell", to_json(Mat(e.ell))}});
  return {{"original", to_json(r.original)}, {"reduced", to_json(r.reduced)}, {"rotation", to_json(r.rotation)},
          {"eliminated", elim}, {"n", r.n}};
}

inline json to_json(const ShellProfile& p) {
  json shells = json::array();
  for (const auto& [r, v] : p.shells) shells.push_back({r, v});
  auto finite = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"shells", shells}, {"slope", finite(p.slope)}, {"local_slope", finite(p.local_slope)},
          {"negligible", p.negligible}, {"status", to_string(p.status)}};
}

inline json to_json(const CharReport& r) {
  json orders = json::array();
  for (const auto& o : r.orders)
    orders.push_back({{"k", o.k}, {"off", to_json(o.profile.off)}, {"along", to_json(o.profile.along)},
                      {"along_bound", o.along_bound}, {"off_ok", o.off_ok}, {"along_ok", o.along_ok},
                      {"status", to_string(o.status)}});
  return {{"status", to_string(r.status)}, {"scale", r.scale}, {"orders", orders}};
}

// ---------------------------------------------------------------------------
// Decoding. Errors carry the JSON pointer of the offending node.

struct JsonError : InputError {
  using InputError::InputError;
};

inline const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw JsonError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

inline Mat mat_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw JsonError(where + ": expected an array of rows");
  if (j.empty()) return Mat(0, 0);
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.at(0).is_array() ? j.at(0).size() : 0);
  Mat M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& r = j.at(static_cast<std::size_t>(i));
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols)
      throw JsonError(where + "/" + std::to_string(i) + ": ragged matrix row");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = r.at(static_cast<std::size_t>(c));
      if (!v.is_number()) throw JsonError(where + "/" + std::to_string(i) + "/" + std::to_string(c) + ": not a number");
      M(i, c) = v.get<double>();
    }
  }
  return M;
}

inline cplx cplx_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw JsonError(where + ": expected a number or [re, im]");
}

inline Polynomial polynomial_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw JsonError(where + ": expected an array of terms");
  Polynomial p;
  for (std::size_t t = 0; t < j.size(); ++t) {
    const std::string w = where + "/" + std::to_string(t);
    const json& powers = field(j[t], "powers", w);
    if (!powers.is_array()) throw JsonError(w + "/powers: expected an array");
    p.push_back({powers.get<std::vector<int>>(), cplx_from_json(field(j[t], "coef", w), w + "/coef")});
  }
  return p;
}

/// {"kind": "constant" | "harmonic_oscillator" | "polynomial" | "gaussian_modulated", "dim": n, ...}
inline ShubinSymbol symbol_from_json(const json& j, const std::string& where = "") {
  const std::string kind = field(j, "kind", where).get<std::string>();
  const int dim = field(j, "dim", where).get<int>();
  if (kind == "constant") return ShubinSymbol::constant(dim, cplx_from_json(field(j, "value", where), where + "/value"));
  if (kind == "harmonic_oscillator") return ShubinSymbol::harmonic_oscillator(dim);
  if (kind == "polynomial") return ShubinSymbol::polynomial(dim, polynomial_from_json(field(j, "terms", where), where + "/terms"));
  if (kind == "gaussian_modulated") {
    const auto c = field(j, "center", where).get<std::vector<double>>();
    if (static_cast<int>(c.size()) != dim) throw JsonError(where + "/center: length must equal dim");
    Polynomial p = j.contains("terms") ? polynomial_from_json(j["terms"], where + "/terms") : Polynomial{};
    return ShubinSymbol::gaussian_modulated(Eigen::Map<const Vec>(c.data(), dim), j.value("width", 1.0), p);
  }
  throw JsonError(where + "/kind: unknown symbol kind \"" + kind + "\"");
}

inline QuadraticPhase phase_from_json(const json& j, const std::string& where = "") {
  const Mat F = mat_from_json(field(j, "F", where), where + "/F");
  const int D = static_cast<int>(F.rows());
  Mat L = j.contains("L") ? mat_from_json(j["L"], where + "/L") : Mat(D, 0);
  Mat Q = j.contains("Q") ? mat_from_json(j["Q"], where + "/Q") : Mat(0, 0);
  if (L.size() == 0) L = Mat(D, Q.rows());
  return QuadraticPhase(F, L, Q);
}

/// {"form": "factored", "symbol": {...}, "chi": [[...]], "m": 0, "rho": 1} or
/// {"form": "oscillatory", "phase": {"F", "L", "Q"}, "amplitude": {...}, "m": 0, "rho": 1}
inline FioSpec fio_spec_from_json(const json& j, const std::string& where = "") {
  const std::string form = field(j, "form", where).get<std::string>();
  const double m = j.value("m", 0.0), rho = j.value("rho", 1.0);
  if (form == "factored")
    return FioSpec::factored(symbol_from_json(field(j, "symbol", where), where + "/symbol"),
                             SymplecticMatrix(mat_from_json(field(j, "chi", where), where + "/chi")), m, rho);
  if (form == "oscillatory")
    return FioSpec::oscillatory(phase_from_json(field(j, "phase", where), where + "/phase"),
                                symbol_from_json(field(j, "amplitude", where), where + "/amplitude"), m, rho);
  throw JsonError(where + "/form: expected \"factored\" or \"oscillatory\"");
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw JsonError(path.string() + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Text and raster formats

/// d = 1: "x,re,im"; d = 2: "x1,x2,re,im" with the first axis slowest.
inline std::string grid_csv(const GridFunction& u) {
  std::ostringstream os;
  os << std::setprecision(17);
  const GridSpec& s = u.spec;
  if (s.d == 1) {
    os << "x,re,im\n";
    for (int k = 0; k < s.n; ++k) os << s.x(k) << ',' << u.values(k).real() << ',' << u.values(k).imag() << '\n';
  } else {
    os << "x1,x2,re,im\n";
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j < s.n; ++j) {
        const cplx v = u.at(i, j);
        os << s.x(i) << ',' << s.x(j) << ',' << v.real() << ',' << v.imag() << '\n';
      }
  }
  return os.str();
}

/// Binary PGM (P5), row 0 at the top. Values are scaled linearly from [0, max] to [0, 255].
inline std::string pgm_image(const Mat& img) {
  const double mx = std::max(img.maxCoeff(), 1e-300);
  std::string out = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  for (Eigen::Index r = 0; r < img.rows(); ++r)
    for (Eigen::Index c = 0; c < img.cols(); ++c)
      out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * std::clamp(img(r, c) / mx, 0.0, 1.0)))));
  return out;
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return os.str();
}

/// Writes artifacts under one directory and finishes with manifest.json. Every JSON artifact
/// gets the config echo under "config"; nothing time-dependent is written.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, json config) : dir_(std::move(dir)), config_(std::move(config)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }
  const json& config() const { return config_; }

  void write_json(const std::string& name, json body) {
    body["config"] = config_;
    write_bytes(name, body.dump(2) + "\n");
  }

  void write_text(const std::string& name, const std::string& text) { write_bytes(name, text); }

  void write_bytes(const std::string& name, const std::string& bytes) {
    const std::filesystem::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InputError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    files_.push_back({name, sha256_hex(bytes), bytes.size()});
  }

  /// Writes manifest.json listing the files in write order.
  void finish() {
    json list = json::array();
    for (const auto& f : files_) list.push_back({{"file", f.name}, {"sha256", f.sha}, {"bytes", f.size}});
    json m{{"config", config_}, {"files", list}};
    const std::string text = m.dump(2) + "\n";
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << text;
  }

 private:
  struct Entry {
    std::string name, sha;
    std::size_t size;
  };
  std::filesystem::path dir_;
  json config_;
  std::vector<Entry> files_;
};

}  // namespace fiolab
