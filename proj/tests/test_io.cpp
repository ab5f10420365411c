#include "doctest.h"
#include "kktspectra/errors.hpp"
#include "kktspectra/io.hpp"
#include "support.hpp"

using namespace kkt;
using namespace kkt::testing;
using kkt::io::Json;

TEST_CASE("problem json round trip") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pd = random_problem(3, 2, rng);
    const auto back = io::problem_from_json(Json::parse(io::problem_to_json(pd).dump()));
    CHECK((back.f_lin - pd.f_lin).norm() == 0.0);
    CHECK((back.f_quad - pd.f_quad).norm() == 0.0);
    CHECK((back.g_const - pd.g_const).norm() == 0.0);
    for (Index i = 0; i < 3; ++i) {
      CHECK((back.g_lin[i] - pd.g_lin[i]).norm() == 0.0);
      for (Index k = 0; k < 3; ++k) CHECK((back.g_quad[i][k] - pd.g_quad[i][k]).norm() == 0.0);
    }
  }
}

TEST_CASE("upper triangle of B is mirrored") {
  const auto j = Json::parse(R"({
    "n": 2, "p": 1,
    "f": {"lin": [0, 0], "quad": [[1, 0], [0, 1]]},
    "G": {"A0": [0], "A": [[1], [0]], "B": [[[2], [3]], [null, [4]]]}
  })");
  const auto pd = io::problem_from_json(j);
  CHECK(pd.g_quad[1][0](0, 0) == 3.0);
  CHECK(pd.g_quad[1][1](0, 0) == 4.0);
}

TEST_CASE("near-symmetric input is averaged, asymmetric input rejected") {
  auto j = Json::parse(R"({"n": 0, "p": 2, "f": {}, "G": {"A0": [1, 2, 2, 3]}})");
  CHECK(io::problem_from_json(j).g_const(0, 1) == 2.0);
  j["G"]["A0"] = Json::array({1, 2, 2.0000000000001, 3});
  CHECK(io::problem_from_json(j).g_const(0, 1) == doctest::Approx(2.0));
  j["G"]["A0"] = Json::array({1, 2, 2.1, 3});
  CHECK_THROWS_AS(io::problem_from_json(j), InputError);
}

TEST_CASE("malformed inputs raise input errors") {
  CHECK_THROWS_AS(io::problem_from_json(Json::parse(R"({"p": 2})")), InputError);
  CHECK_THROWS_AS(io::problem_from_json(Json::parse(R"({"n": 1, "p": 1, "f": {"lin": [1, 2]}, "G": {"A0": [0]}})")),
                  InputError);
  CHECK_THROWS_AS(io::problem_from_json(Json::parse(R"({"n": 1, "p": 1, "f": {}, "G": {"A0": ["x"]}})")),
                  InputError);
  const auto pd = example2_problem(0.0, example2_default_a());
  CHECK_THROWS_AS(io::point_from_json(Json::parse(R"({"x": [0], "Y": [0, 0, 0, 0]})"), pd), InputError);
  CHECK_THROWS_AS(io::point_from_json(Json::parse(R"({"x": [0, 0]})"), pd), InputError);
  CHECK_THROWS_AS(io::read_json_file("/nonexistent/file.json"), InputError);
  CHECK_THROWS_AS(io::builtin_family("example9"), InputError);
}

TEST_CASE("point round trip and builtin families") {
  const auto fam = io::builtin_family("example2");
  const auto pt = io::point_from_json(io::point_to_json(fam.xbar, fam.ybar), fam.base);
  CHECK((pt.Y - fam.ybar).norm() == 0.0);
  CHECK(kkt_residual(fam.base, pt.x, pt.Y).max() == 0.0);
  CHECK(io::builtin_family("example3").name == "example3");
}
