#include <cmath>

#include "doctest.h"
#include "kktspectra/errors.hpp"
#include "kktspectra/problem.hpp"
#include "support.hpp"

using namespace kkt;
using namespace kkt::testing;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("example 2 evaluation") {
  const auto pd = example2_problem(0.0, example2_default_a());
  CHECK(eval_G(pd, vec2(0, 0)).norm() == 0.0);
  CHECK((eval_G(pd, vec2(3, -1)) - SymMat::diagonal({3.0, -1.0})).norm() == 0.0);
  const SymMat ybar = SymMat::diagonal({-1.0, 0.0});
  const Vec adj = adjoint_jacobian_apply(pd, vec2(0, 0), ybar);
  CHECK(adj(0) == -1.0);
  CHECK(adj(1) == 0.0);
  CHECK(adjoint_jacobian_apply(pd, vec2(0, 0), SymMat(2)).norm() == 0.0);
  const auto r = kkt_residual(pd, vec2(0, 0), ybar);
  CHECK(r.r1 == 0.0);
  CHECK(r.r2 == 0.0);
  const auto psi = robinson_normal_map(pd, vec2(0, 0), ybar);
  CHECK(psi.norm() == 0.0);
}

TEST_CASE("example 2 multiplier residuals") {
  const auto pd = example2_problem(0.0, example2_default_a());
  const auto at_ybar = multiplier_set_residual(pd, vec2(0, 0), SymMat::diagonal({-1.0, 0.0}));
  CHECK(at_ybar.d1 == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(at_ybar.d2 == doctest::Approx(0.0).epsilon(1e-14));
  const auto at_zero = multiplier_set_residual(pd, vec2(0, 0), SymMat(2));
  CHECK(at_zero.d1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(at_zero.d2 == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("example 3 evaluation") {
  const auto pd = example3_problem(0.0);
  for (const auto& d : eval_G_jacobian(pd, vec2(0, 0))) CHECK(d.norm() == 0.0);
  Mat h0(2, 2), h1(2, 2);
  h0 << 2, 1, 1, 2;
  h1 << 4, 3, 3, 4;
  CHECK((lagrangian_hessian(pd, vec2(0, 0), SymMat(2)) - h0).norm() == 0.0);
  CHECK((lagrangian_hessian(pd, vec2(0, 0), SymMat::identity(2)) - h1).norm() == 0.0);
  CHECK(adjoint_jacobian_apply(pd, vec2(0, 0), SymMat::diagonal({4.0, -7.0})).norm() == 0.0);
  CHECK(kkt_residual(pd, vec2(0, 0), SymMat(2)).max() == 0.0);
  CHECK(robinson_normal_map(pd, vec2(0, 0), SymMat(2)).norm() == 0.0);
}

TEST_CASE("example 3 path solves the perturbed data") {
  const auto fam = example3_family();
  for (double t : {1e-2, 1e-3, 1e-4}) {
    auto [p1, p2] = fam.perturbation(t);
    const auto pd = perturbed(fam.base, p1, p2);
    const auto direct = example3_problem(t);
    CHECK((pd.f_lin - direct.f_lin).norm() < 1e-15);
    CHECK((pd.g_const - direct.g_const).norm() < 1e-15);
    const auto r = kkt_residual(pd, example3_path(t), SymMat(2));
    CHECK(r.max() < 1e-14);
  }
}

TEST_CASE("constant constraint map and linear objective") {
  ProblemData pd = ProblemData::zeros(3, 2);
  pd.g_const = SymMat::diagonal({1.0, 0.0});
  pd.f_lin << 1, 2, 3;
  Rng rng(3);
  const Vec x = gaussian(3, 1, rng);
  for (const auto& d : eval_G_jacobian(pd, x)) CHECK(d.norm() == 0.0);
  CHECK(lagrangian_hessian(pd, x, SymMat(2)).norm() == 0.0);
  // infeasible x with G(x) negative definite
  ProblemData q = ProblemData::zeros(1, 1);
  q.g_lin[0] = SymMat::diagonal({1.0});
  Vec xi(1);
  xi << -2.0;
  CHECK(kkt_residual(q, xi, SymMat::diagonal({-1.0})).r2 > 0.0);
}

TEST_CASE("normal map of a PSD argument") {
  Rng rng(5);
  const auto pd = random_problem(3, 3, rng);
  const Vec x = gaussian(3, 1, rng);
  const SymMat z = with_spectrum(signed_spectrum(2, 1, 0, rng), rng);
  const auto psi = robinson_normal_map(pd, x, z);
  CHECK((psi.psi2 - (eval_G(pd, x) - z)).norm() < 1e-12);
}

TEST_CASE("validation rejects inconsistent data") {
  ProblemData pd = ProblemData::zeros(2, 2);
  CHECK_NOTHROW(pd.validate());
  pd.g_quad[0][1] = SymMat::identity(2);
  CHECK_THROWS_AS(pd.validate(), InputError);
  pd = ProblemData::zeros(2, 2);
  pd.f_quad(0, 1) = 1.0;
  CHECK_THROWS_AS(pd.validate(), InputError);
  pd = ProblemData::zeros(2, 2);
  CHECK_THROWS_AS(eval_G(pd, Vec::Zero(3)), InputError);
  CHECK_THROWS_AS(example2_problem(0.1, SymMat::identity(2)), InputError);
}

TEST_CASE("derivatives match finite differences") {
  Rng rng(11);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = dim(rng), p = dim(rng);
    const auto pd = random_problem(n, p, rng);
    const Vec x = gaussian(n, 1, rng);
    const SymMat y = random_sym(p, rng);
    const double h = 1e-5;
    const Vec g = eval_grad_f(pd, x);
    const Mat hl = lagrangian_hessian(pd, x, y);
    const auto jac = eval_G_jacobian(pd, x);
    for (Index k = 0; k < n; ++k) {
      Vec e = Vec::Zero(n);
      e(k) = h;
      const double fd = (eval_f(pd, x + e) - eval_f(pd, x - e)) / (2 * h);
      CHECK(std::abs(fd - g(k)) <= 1e-6 * std::max(1.0, std::abs(g(k))));
      const Vec dl = (lagrangian_gradient(pd, x + e, y) - lagrangian_gradient(pd, x - e, y)) / (2 * h);
      CHECK((dl - hl.col(k)).norm() <= 1e-5 * std::max(1.0, hl.col(k).norm()));
      const SymMat dg = (1.0 / (2 * h)) * (eval_G(pd, x + e) - eval_G(pd, x - e));
      CHECK((dg - jac[static_cast<size_t>(k)]).norm() <=
            1e-6 * std::max(1.0, jac[static_cast<size_t>(k)].norm()));
    }
  }
}

TEST_CASE("adjoint identity") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pd = random_problem(4, 3, rng);
    const Vec x = gaussian(4, 1, rng), d = gaussian(4, 1, rng);
    const SymMat y = random_sym(3, rng);
    const auto jac = eval_G_jacobian(pd, x);
    const double lhs = inner(jacobian_apply(jac, d), y);
    const double rhs = d.dot(adjoint_apply(jac, y));
    CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
  }
}

TEST_CASE("kkt residual and normal map share their zeros") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 3, p = 3;
    auto pd = random_problem(n, p, rng);
    const Vec x = gaussian(n, 1, rng);
    // build a KKT pair: choose G(x) PSD and Y NSD complementary, then fix f_lin
    const Mat q = random_orthogonal(p, rng);
    const Vec spectrum = signed_spectrum(1, 1, 1, rng);
    Vec gx = spectrum.cwiseMax(0.0), yv = spectrum.cwiseMin(0.0);
    const SymMat gtarget = congruence_t(q, SymMat::diagonal(gx));
    const SymMat y = congruence_t(q, SymMat::diagonal(yv));
    pd.g_const += gtarget - eval_G(pd, x);
    pd.f_lin -= lagrangian_gradient(pd, x, y);
    const bool perturb = trial % 2 == 1;
    const SymMat yy = perturb ? y + 1e-3 * random_sym(p, rng) : y;
    const double r = kkt_residual(pd, x, yy).max();
    const double psi = robinson_normal_map(pd, x, eval_G(pd, x) + yy).norm();
    CHECK((r <= 1e-8) == (psi <= 1e-8));
    if (!perturb) CHECK(r <= 1e-8);
  }
}
