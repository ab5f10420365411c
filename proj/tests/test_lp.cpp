#include <cmath>

#include "doctest.h"
#include "kktspectra/conic.hpp"
#include "kktspectra/lp.hpp"
#include "support.hpp"

using namespace kkt;
using namespace kkt::testing;

namespace {

Mat row(std::initializer_list<double> v) {
  Mat m(1, static_cast<Index>(v.size()));
  Index k = 0;
  for (double x : v) m(0, k++) = x;
  return m;
}

}  // namespace

TEST_CASE("simplex: bounded optimum") {
  lp::Problem pr;
  pr.num_vars = 2;
  pr.a_ge = Mat(3, 2);
  pr.a_ge << 1, 1, 1, 0, 0, 1;
  pr.b_ge = Vec(3);
  pr.b_ge << 1, 0, 0;
  pr.cost = Vec(2);
  pr.cost << 1, 2;
  const auto r = lp::solve(pr);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));
  CHECK(r.x(0) == doctest::Approx(1.0));
}

TEST_CASE("simplex: infeasible and unbounded") {
  lp::Problem inf;
  inf.num_vars = 1;
  inf.a_ge = Mat(2, 1);
  inf.a_ge << 1, -1;
  inf.b_ge = Vec(2);
  inf.b_ge << 1, 0;
  const auto r = lp::solve(inf);
  CHECK(r.status == lp::Status::Infeasible);
  CHECK(r.infeasibility > 0.5);

  lp::Problem unb;
  unb.num_vars = 1;
  unb.a_ge = row({1});
  unb.b_ge = Vec::Zero(1);
  unb.cost = -Vec::Ones(1);
  CHECK(lp::solve(unb).status == lp::Status::Unbounded);
}

TEST_CASE("simplex: free variables and equalities") {
  lp::Problem pr;
  pr.num_vars = 2;
  pr.a_eq = Mat(2, 2);
  pr.a_eq << 1, 1, 1, -1;
  pr.b_eq = Vec(2);
  pr.b_eq << -3, 1;
  const auto r = lp::solve(pr);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.x(0) == doctest::Approx(-1.0));
  CHECK(r.x(1) == doctest::Approx(-2.0));
}

TEST_CASE("simplex: degenerate problem terminates under Bland's rule") {
  // Beale's classic cycling example.
  lp::Problem pr;
  pr.num_vars = 4;
  pr.a_ge = Mat(7, 4);
  pr.a_ge << -0.25, 8, 1, -9,  //
      -0.5, 12, 0.5, -3,       //
      0, 0, -1, 0,             //
      1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  pr.b_ge = Vec::Zero(7);
  pr.b_ge(2) = -1;
  pr.cost = Vec(4);
  pr.cost << -0.75, 20, -0.5, 6;
  const auto r = lp::solve(pr);
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.objective == doctest::Approx(-1.25));
}

TEST_CASE("homogeneous direction search") {
  const Mat eq = row({1, -1});
  const Mat ge = row({-1, 0});
  const auto found = find_nonzero_direction(eq, ge, Mat::Identity(2, 2));
  REQUIRE(found.found);
  CHECK(found.v(0) < 0.0);
  CHECK(found.v(0) == doctest::Approx(found.v(1)));

  CHECK_FALSE(find_nonzero_direction(Mat::Identity(2, 2), Mat(0, 2), Mat::Identity(2, 2)).found);

  // x >= 0 and -x >= 0 pins the only coordinate to zero.
  Mat both(2, 1);
  both << 1, -1;
  CHECK_FALSE(find_nonzero_direction(Mat(0, 1), both, Mat::Identity(1, 1)).found);

  // Selector sees only the first coordinate, which is forced to zero.
  Mat sel = Mat::Zero(1, 2);
  sel(0, 0) = 1;
  CHECK_FALSE(find_nonzero_direction(row({1, 0}), Mat(0, 2), sel).found);
}

TEST_CASE("PSD/PD elements of matrix subspaces") {
  SymMat offd(2);
  offd.set(0, 1, 1.0);
  CHECK(subspace_contains_pd({SymMat::identity(2)}, 2));
  CHECK_FALSE(subspace_contains_pd({SymMat::diagonal({1.0, -1.0})}, 2));
  CHECK_FALSE(subspace_contains_pd({SymMat::diagonal({1.0, 0.0})}, 2));
  CHECK_FALSE(subspace_contains_pd({}, 2));
  CHECK(subspace_contains_pd({SymMat::diagonal({1.0, 0.0}), SymMat::diagonal({0.0, 1.0})}, 2));
  CHECK_FALSE(subspace_contains_pd({offd, SymMat::diagonal({1.0, -1.0})}, 2));

  CHECK(subspace_nonzero_psd({SymMat::diagonal({1.0, 0.0})}, 2).has_value());
  CHECK_FALSE(subspace_nonzero_psd({SymMat::diagonal({1.0, -1.0})}, 2).has_value());
  CHECK_FALSE(subspace_nonzero_psd({offd}, 2).has_value());
  const auto w = subspace_nonzero_psd({SymMat::diagonal({-2.0, 0.0}), offd}, 2);
  REQUIRE(w.has_value());
  CHECK(min_eigenvalue(*w) >= -1e-9);
  CHECK(w->trace() == doctest::Approx(1.0));
}

TEST_CASE("property: PD detection agrees with a dense circle scan") {
  Rng rng(41);
  int decided = 0;
  for (int k = 0; k < 200; ++k) {
    const SymMat s1 = random_sym(3, rng), s2 = random_sym(3, rng);
    double best = -1e300;
    for (int j = 0; j < 7200; ++j) {
      const double th = M_PI * 2.0 * j / 7200.0;
      const SymMat m = std::cos(th) * s1 + std::sin(th) * s2;
      best = std::max(best, min_eigenvalue(m) / m.norm());
    }
    if (std::abs(best) < 1e-3) continue;
    ++decided;
    CHECK(subspace_contains_pd({s1, s2}, 3) == (best > 0));
  }
  CHECK(decided > 150);
}
