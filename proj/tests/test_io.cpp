#include <gtest/gtest.h>

#include "fiolab/io.hpp"

using namespace fiolab;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("fiolab_test_io_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(JsonDecode, FactoredSpec) {
  const json j = json::parse(R"({"form": "factored", "m": 2,
      "symbol": {"kind": "harmonic_oscillator", "dim": 2},
      "chi": [[0, 1], [-1, 0]]})");
  const FioSpec s = fio_spec_from_json(j);
  EXPECT_FALSE(s.is_oscillatory());
  EXPECT_EQ(s.m, 2.0);
  EXPECT_EQ(max_abs(s.chi().matrix() - standard_J_matrix(1)), 0.0);
}

TEST(JsonDecode, OscillatorySpecWithPolynomialAmplitude) {
  const json j = json::parse(R"({"form": "oscillatory",
      "phase": {"F": [[0, 0], [0, 0]], "L": [[1], [-1]], "Q": [[0]]},
      "amplitude": {"kind": "polynomial", "dim": 3, "terms": [{"powers": [0, 0, 0], "coef": [1, 0.5]}]}})");
  const FioSpec s = fio_spec_from_json(j);
  ASSERT_TRUE(s.is_oscillatory());
  EXPECT_EQ(s.osc().phase.N, 1);
  EXPECT_LE(max_abs(s.chi().matrix() - Mat::Identity(2, 2)), 1e-12);
}

TEST(JsonDecode, ErrorsCarryTheLocation) {
  const json bad_row = json::parse(R"({"form": "factored", "symbol": {"kind": "constant", "dim": 2, "value": 1},
      "chi": [[0, 1], [-1]]})");
  try {
    fio_spec_from_json(bad_row);
    FAIL() << "expected a JsonError";
  } catch (const JsonError& e) {
    EXPECT_NE(std::string(e.what()).find("/chi/1"), std::string::npos) << e.what();
  }
  const json bad_kind = json::parse(R"({"form": "factored", "symbol": {"kind": "spline", "dim": 2}, "chi": [[1, 0], [0, 1]]})");
  try {
    fio_spec_from_json(bad_kind);
    FAIL() << "expected a JsonError";
  } catch (const JsonError& e) {
    EXPECT_NE(std::string(e.what()).find("/symbol/kind"), std::string::npos) << e.what();
  }
}

TEST(JsonDecode, MalformedFileReportsTheByteOffset) {
  const auto dir = scratch_dir("malformed");
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"F\": [[1, 2], [2, 1]],, }";
  try {
    read_json_file(dir / "bad.json");
    FAIL() << "expected a JsonError";
  } catch (const JsonError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos);
  }
}

TEST(JsonEncode, ReductionRecordRoundTripsThroughThePhase) {
  Mat L(2, 1), Q(1, 1);
  L << 1, -1;
  Q << 1;
  const ReductionRecord rec = reduce_phase(QuadraticPhase(Mat::Zero(2, 2), L, Q));
  const json j = to_json(rec);
  EXPECT_EQ(j.at("n"), 0);
  const QuadraticPhase back = phase_from_json(j.at("reduced"));
  EXPECT_LE(max_abs(back.F - rec.reduced.F), 0.0);
}

TEST(Formats, CsvAndPgm) {
  const GridSpec s(1, 8, 2.0);
  const std::string csv = grid_csv(psi0(s));
  EXPECT_EQ(csv.rfind("x,re,im\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 9);
  Mat img(2, 3);
  img << 0, 1, 2, 3, 4, 8;
  const std::string pgm = pgm_image(img);
  EXPECT_EQ(pgm.rfind("P5\n3 2\n255\n", 0), 0u);
  EXPECT_EQ(static_cast<unsigned char>(pgm.back()), 255);
  EXPECT_EQ(pgm.size(), std::string("P5\n3 2\n255\n").size() + 6);
}

TEST(ArtifactWriter, ManifestListsHashesAndIsReproducible) {
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const auto dir = scratch_dir("manifest");
    ArtifactWriter w(dir, {{"command", "test"}, {"seed", 3}});
    w.write_json("a.json", {{"value", 1.5}});
    w.write_text("b.csv", "x\n1\n");
    w.finish();
    const json m = json::parse(slurp(dir / "manifest.json"));
    ASSERT_EQ(m.at("files").size(), 2u);
    EXPECT_EQ(m["files"][1]["sha256"], sha256_hex("x\n1\n"));
    EXPECT_EQ(json::parse(slurp(dir / "a.json")).at("config").at("seed"), 3);
    if (run == 0)
      first = slurp(dir / "manifest.json");
    else
      EXPECT_EQ(first, slurp(dir / "manifest.json"));
  }
}
