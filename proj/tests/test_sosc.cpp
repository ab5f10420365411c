#include <cmath>

#include "doctest.h"
#include "fuzz.hpp"
#include "instances.hpp"
#include "kktspectra/criticality.hpp"
#include "kktspectra/errors.hpp"
#include "kktspectra/sosc.hpp"
#include "oracles.hpp"

using namespace kkt;
using namespace kkt::testing;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SymMat offdiag2() {
  SymMat m(2);
  m.set(0, 1, 1.0);
  return m;
}

}  // namespace

TEST_CASE("sigma term examples") {
  const auto ctx = ConeContext::from_pair(SymMat::diagonal({2.0, 0.0}), SymMat::diagonal({0.0, -3.0}));
  CHECK(sigma_term(ctx, offdiag2()) == doctest::Approx(-3.0));
  const auto y0 = ConeContext::from_pair(SymMat::diagonal({2.0, 0.0}), SymMat(2));
  CHECK(sigma_term(y0, offdiag2()) == 0.0);
  const auto x0 = ConeContext::from_pair(SymMat(2), SymMat::diagonal({0.0, -3.0}));
  CHECK(sigma_term(x0, SymMat::diagonal({1.0, 0.0})) == 0.0);
  CHECK_THROWS_AS(sigma_term(ctx, SymMat::diagonal({0.0, 1.0})), InputError);
}

TEST_CASE("critical cone of the problem") {
  const auto e2 = example2_instance();
  CHECK(critical_cone_x_membership(e2.pd, e2.x, e2.y, vec2(0, 1)).member);
  CHECK_FALSE(critical_cone_x_membership(e2.pd, e2.x, e2.y, vec2(1, 0)).member);
  CHECK(critical_cone_x_membership(e2.pd, e2.x, e2.y, vec2(0, 0)).member);
  CHECK_FALSE(critical_cone_x_membership(e2.pd, e2.x, e2.y, vec2(0, -1)).member);
}

TEST_CASE("second-order form examples") {
  const auto e3 = example3_instance();
  CHECK(evaluate_second_order_form(e3.pd, e3.x, e3.y, vec2(1, 0)) == doctest::Approx(2.0));
  const auto e2 = example2_instance();
  CHECK(evaluate_second_order_form(e2.pd, e2.x, e2.y, vec2(0, 1)) == doctest::Approx(2.0));
  CHECK(evaluate_second_order_form(e2.pd, e2.x, e2.y, vec2(0, 0)) == 0.0);
  CHECK_THROWS_AS(evaluate_second_order_form(e2.pd, e2.x, e2.y, vec2(1, 0)), InputError);
}

TEST_CASE("SOSC at the fixtures") {
  const auto e3 = example3_instance();
  const auto r3 = check_soscy(e3.pd, e3.point());
  CHECK(r3.verdict == SoscVerdict::Holds);
  CHECK(r3.min_value == doctest::Approx(1.0));
  CHECK(r3.sonc_holds);
  const auto e2 = example2_instance();
  const auto r2 = check_soscy(e2.pd, e2.point());
  CHECK(r2.verdict == SoscVerdict::Holds);
  CHECK(r2.min_value == doctest::Approx(2.0));
  CHECK(r2.exact);
  const auto fx = scalar_fixture();
  const auto rf = check_soscy(fx.pd, fx.point());
  CHECK(rf.verdict == SoscVerdict::Fails);
  CHECK(std::abs(rf.min_value) <= 1e-12);
  CHECK(rf.sonc_holds);
  auto bad = example2_instance();
  bad.y = SymMat(2);
  CHECK_THROWS_AS(check_soscy(bad.pd, bad.point()), InputError);
}

TEST_CASE("SOSC fails with a certified direction") {
  // f = -x^2/2, G(x) = [x] with a strictly active multiplier is fine, but a
  // biactive constraint leaves d = 1 critical with q(d) = -1.
  auto fx = scalar_fixture();
  fx.pd.f_quad(0, 0) = -1.0;
  const auto r = check_soscy(fx.pd, fx.point());
  CHECK(r.verdict == SoscVerdict::Fails);
  CHECK(r.min_value == doctest::Approx(-1.0));
  CHECK_FALSE(r.sonc_holds);
  CHECK(critical_cone_x_membership(fx.pd, fx.x, fx.y, r.minimizer).member);
}

TEST_CASE("sigma term sign and orthogonality") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ctx = random_graph_point(1 + trial % 5, rng);
    const SymMat h = project_critical_cone(ctx, random_sym(ctx.dim(), rng));
    CHECK(sigma_term(ctx, h) <= 1e-10);
  }
}

TEST_CASE("sigma term matches the second-order feasibility oracle") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_sigma_instance(rng);
    const double closed = sigma_term(in.ctx, in.h);
    const double oracle = sigma_grid_oracle(in);
    CHECK(std::abs(closed - oracle) <= std::max(0.05 * std::abs(closed), 1e-6));
  }
}

TEST_CASE("critical projection derivative examples") {
  const SymMat c = SymMat::diagonal({2.0, -3.0});
  auto r = critical_projection_check(c, SymMat::diagonal({1.0, 0.0}), SymMat::diagonal({0.0, 5.0}));
  CHECK(r.lhs);
  CHECK(r.rhs);
  r = critical_projection_check(c, SymMat::diagonal({0.0, 1.0}), SymMat(2));
  CHECK_FALSE(r.lhs);
  CHECK_FALSE(r.rhs);
  r = critical_projection_check(c, SymMat(2), SymMat(2));
  CHECK(r.lhs);
  CHECK(r.rhs);
}

TEST_CASE("critical projection derivative sides agree on fuzzed triples") {
  Rng rng(12);
  int members = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto ctx = random_graph_point(1 + trial % 5, rng);
    const auto [da, db] = mixed_pair(ctx, rng);
    const auto r = critical_projection_check(ctx.X + ctx.Y, da, db);
    CHECK(r.lhs == r.rhs);
    members += r.lhs;
  }
  CHECK(members > 100);
  CHECK(members < 450);
}

TEST_CASE("closedness conditions at the fixtures") {
  const auto e3 = example3_instance();
  auto t = closedness_conditions(e3.pd, e3.point());
  CHECK(t.cond_i == CondVerdict::Holds);
  CHECK(t.cond_ii == CondVerdict::Holds);
  const auto e2 = example2_instance();
  t = closedness_conditions(e2.pd, e2.point());
  CHECK(t.cond_i == CondVerdict::Holds);
  CHECK(t.cond_ii == CondVerdict::Holds);
  CHECK(t.accepted > 0);
  // G(x) = [1 + x]: X positive definite, so K = {0}
  Instance pd{ProblemData::zeros(1, 1), Vec::Zero(1), SymMat(1)};
  pd.pd.g_const = SymMat::diagonal({1.0});
  pd.pd.g_lin[0] = SymMat::diagonal({1.0});
  pd.pd.f_quad(0, 0) = 1.0;
  t = closedness_conditions(pd.pd, pd.point());
  CHECK(t.cond_i == CondVerdict::Holds);
  CHECK(t.cond_ii == CondVerdict::Holds);
}

TEST_CASE("multiplier distance ratios") {
  const auto e2 = example2_instance();
  std::vector<MultiplierSample> s{{0.1, e2.y, Vec::Ones(2), SymMat(2)},
                                  {0.0, SymMat(2), Vec::Zero(2), SymMat(2)}};
  const auto r = multiplier_distance_estimate(e2.pd, e2.x, s);
  CHECK(r[0].ratio == 0.0);
  CHECK(r[1].distance == doctest::Approx(1.0));
  CHECK(r[1].ratio == 0.0);
}

TEST_CASE("SOSC excludes critical multipliers and implies SONC") {
  Rng rng(8);
  int holds = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const Index p = 2 + trial % 2;
    const Index nz = 1 + trial % p;
    const auto in = trial % 3 == 0 ? random_diagonal_instance(2 + trial % 3, p, rng)
                                   : random_instance(2 + trial % 3, p, 0, nz, rng);
    const auto rep = check_soscy(in.pd, in.point());
    if (rep.verdict != SoscVerdict::Holds) continue;
    ++holds;
    CHECK(rep.sonc_holds);
    CHECK(classify_multiplier(build_system(in.pd, in.point())).tag != Verdict::Critical);
  }
  CHECK(holds > 20);
}
