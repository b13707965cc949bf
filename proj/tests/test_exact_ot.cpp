#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <wext/exact_ot.hpp>

#include "support.hpp"

using namespace wext;

namespace {

AtomicMeasure line_measure(std::initializer_list<double> xs,
                           std::initializer_list<double> ws = {}) {
  Matrix pts(Eigen::Index(xs.size()), 1);
  Eigen::Index i = 0;
  for (double v : xs) pts(i++, 0) = v;
  if (ws.size() == 0) return make_uniform(pts);
  Vector w(Eigen::Index(ws.size()));
  i = 0;
  for (double v : ws) w(i++) = v;
  return make_measure(pts, w);
}

Eigen::Index support_size(const Matrix& plan) {
  return (plan.array() > 0.0).count();
}

}  // namespace

TEST_CASE("w2_sq_exact on forced couplings") {
  Matrix px(1, 2), py(1, 2);
  px << 0.0, 0.0;
  py << 3.0, 4.0;
  const auto r = w2_sq_exact(make_uniform(px), make_uniform(py));
  CHECK(r.value == doctest::Approx(25.0));
  CHECK(r.plan.entries(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("w2_sq_exact identical measures") {
  const auto mu = line_measure({0.0, 1.0});
  const auto r = w2_sq_exact(mu, mu);
  CHECK(r.value == doctest::Approx(0.0));
  CHECK(r.plan.entries(0, 0) == doctest::Approx(0.5));
  CHECK(r.plan.entries(1, 1) == doctest::Approx(0.5));
  CHECK(r.plan.entries(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("w2_sq_exact 2x2 monotone matching") {
  // value 1 from the matching 0->1, 2->3; the crossing matching costs 1+... more
  const auto r = w2_sq_exact(line_measure({0.0, 2.0}), line_measure({1.0, 3.0}));
  CHECK(r.value == doctest::Approx(1.0));
}

TEST_CASE("w2_sq_exact certified against basic-solution enumeration") {
  auto g = support::rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    const int m = 2 + int(g() % 2), n = 2 + int(g() % 2);  // 2x2 .. 3x3
    const auto mu = support::random_measure(g, m, 2, 2.0);
    const auto nu = support::random_measure(g, n, 2, 2.0);
    Matrix cost(m, n);
    for (int j = 0; j < n; ++j)
      cost.col(j) = (mu.points.rowwise() - nu.points.row(j)).rowwise().squaredNorm();
    const double expect = support::brute_force_ot(cost, mu.weights, nu.weights);
    const auto r = w2_sq_exact(mu, nu);
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-9));
    CHECK(validate(r.plan) == Errc::ok);
  }
}

TEST_CASE("plans are vertices of the polytope") {
  auto g = support::rng(22);
  for (int rep = 0; rep < 10; ++rep) {
    const int m = 2 + int(g() % 9), n = 2 + int(g() % 9);
    const auto mu = support::random_measure(g, m, 3, 2.0);
    const auto nu = support::random_measure(g, n, 3, 2.0);
    const auto r = w2_sq_exact(mu, nu);
    CHECK(support_size(r.plan.entries) <= m + n - 1);
    CHECK(validate(r.plan) == Errc::ok);
  }
}

TEST_CASE("w2_sq_exact is symmetric and vanishes only at equality") {
  auto g = support::rng(23);
  const auto mu = support::random_measure(g, 5, 2);
  const auto nu = support::random_measure(g, 7, 2);
  CHECK(w2_sq_exact(mu, nu).value == doctest::Approx(w2_sq_exact(nu, mu).value));

  // same weighted point set, permuted
  Matrix pts(3, 2);
  pts << 0.0, 0.0, 1.0, 0.5, -0.5, 2.0;
  Vector w(3);
  w << 0.2, 0.5, 0.3;
  Matrix perm(3, 2);
  perm << -0.5, 2.0, 0.0, 0.0, 1.0, 0.5;
  Vector wp(3);
  wp << 0.3, 0.2, 0.5;
  CHECK(w2_sq_exact(make_measure(pts, w), make_measure(perm, wp)).value ==
        doctest::Approx(0.0));
  CHECK(w2_sq_exact(make_measure(pts, w), nu).value > 1e-6);
}

TEST_CASE("triangle inequality for the exact distance") {
  auto g = support::rng(24);
  for (int rep = 0; rep < 15; ++rep) {
    const auto a = support::random_measure(g, 4, 2);
    const auto b = support::random_measure(g, 5, 2);
    const auto c = support::random_measure(g, 6, 2);
    const double ab = support::w2(a, b);
    const double bc = support::w2(b, c);
    const double ac = support::w2(a, c);
    CHECK(ac <= ab + bc + 1e-10);
  }
}

TEST_CASE("instance cap raises InstanceTooLarge") {
  auto g = support::rng(25);
  const auto mu = support::random_measure(g, 4, 1);
  const auto nu = support::random_measure(g, 4, 1);
  ExactOtOptions opts;
  opts.max_entries = 8;
  CHECK_THROWS_WITH_AS(static_cast<void>(w2_sq_exact(mu, nu, opts)),
                       doctest::Contains("InstanceTooLarge"), Error);
}

TEST_CASE("quantile of a Dirac") {
  const auto q = quantile(line_measure({3.0}, {1.0}));
  CHECK(q.breakpoints.size() == 1);
  CHECK(q.breakpoints(0) == doctest::Approx(1.0));
  CHECK(q.values(0) == doctest::Approx(3.0));
}

TEST_CASE("quantile of symmetric two atoms") {
  const auto q = quantile(line_measure({-1.0, 1.0}));
  CHECK(q.breakpoints(0) == doctest::Approx(0.5));
  CHECK(q.breakpoints(1) == doctest::Approx(1.0));
  CHECK(q.values(0) == doctest::Approx(-1.0));
  CHECK(q.values(1) == doctest::Approx(1.0));
}

TEST_CASE("quantile sorts atoms") {
  const auto q = quantile(line_measure({5.0, 2.0}, {0.25, 0.75}));
  CHECK(q.breakpoints(0) == doctest::Approx(0.75));
  CHECK(q.breakpoints(1) == doctest::Approx(1.0));
  CHECK(q.values(0) == doctest::Approx(2.0));
  CHECK(q.values(1) == doctest::Approx(5.0));
  CHECK(validate(q) == Errc::ok);
}

TEST_CASE("quantile requires one dimension") {
  Matrix pts(2, 2);
  pts.setZero();
  pts(1, 0) = 1.0;
  CHECK_THROWS_WITH_AS(static_cast<void>(quantile(make_uniform(pts))),
                       doctest::Contains("NotOneDimensional"), Error);
}

TEST_CASE("w2_sq_1d basics") {
  const auto mu = line_measure({0.0, 2.0}, {0.3, 0.7});
  CHECK(w2_sq_1d(mu, mu) == doctest::Approx(0.0));
  CHECK(w2_sq_1d(line_measure({0.0}, {1.0}), line_measure({2.5}, {1.0})) ==
        doctest::Approx(6.25));
  CHECK(w2_sq_1d(line_measure({0.0, 2.0}), line_measure({1.0, 3.0})) ==
        doctest::Approx(1.0));
}

TEST_CASE("1d distance equals the exact solver on random instances") {
  auto g = support::rng(26);
  for (int rep = 0; rep < 40; ++rep) {
    const int m = 1 + int(g() % 50), n = 1 + int(g() % 50);
    const auto mu = support::random_measure(g, m, 1, 3.0);
    const auto nu = support::random_measure(g, n, 1, 3.0);
    const double via_quantiles = w2_sq_1d(mu, nu);
    const double via_lp = w2_sq_exact(mu, nu).value;
    CHECK(via_quantiles == doctest::Approx(via_lp).epsilon(1e-9));
  }
}
