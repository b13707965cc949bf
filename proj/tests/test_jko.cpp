#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <wext/exact_ot.hpp>
#include <wext/isotonic.hpp>
#include <wext/jko.hpp>

#include "support.hpp"

using namespace wext;

namespace {

SolverConfig inner_config(double floor_eps = 1e-3) {
  SolverConfig cfg;
  cfg.epsilon = 0.1;
  cfg.anneal = AnnealSchedule{0.5, floor_eps};
  cfg.tol = 1e-9;
  cfg.max_iter = 100000;
  return cfg;
}

AtomicMeasure dirac(std::initializer_list<double> coords) {
  Matrix m(1, Eigen::Index(coords.size()));
  Eigen::Index k = 0;
  for (double c : coords) m(0, k++) = c;
  return make_uniform(m);
}

}  // namespace

TEST_CASE("jko_step on Diracs is affine extrapolation at the reparameterized time") {
  const auto a = dirac({0.2, -0.4});
  const auto b = dirac({1.0, 0.6});
  const double h = 0.25, t_next = 1.25;
  const double s = t_next / (t_next - h);  // 1.25
  const auto out = jko_step(b, a, h, t_next, inner_config());
  REQUIRE(out.size() == 1);
  const Eigen::RowVector2d expect =
      a.points.row(0) + s * (b.points.row(0) - a.points.row(0));
  CHECK((out.points.row(0) - expect).norm() < 1e-7);
}

TEST_CASE("the coefficient identity behind the reparameterization") {
  // 1/(2(s-1)) : 1/(2s) must equal 1/(2h) : 1/(2 t_next)
  for (double h : {0.01, 0.1, 0.4}) {
    for (double t_next : {1.1, 2.0, 5.0}) {
      const double s = t_next / (t_next - h);
      CHECK((1.0 / (2.0 * (s - 1.0))) / (1.0 / (2.0 * s)) ==
            doctest::Approx(t_next / h).epsilon(1e-12));
    }
  }
}

TEST_CASE("jko_step is stationary at the attractor") {
  auto g = support::rng(71);
  const auto nu0 = support::random_measure(g, 4, 2, 1.0, true);
  const auto out = jko_step(nu0, nu0, 0.1, 2.0, inner_config());
  CHECK(support::w2(out, nu0) < 5e-3);
}

TEST_CASE("1d jko_step matches the quantile solver") {
  auto g = support::rng(72);
  const auto nu0 = support::random_measure(g, 8, 1, 1.5);
  const auto nu1 = support::random_measure(g, 6, 1, 1.5);
  const double h = 0.2, t_next = 1.6;
  const double s = t_next / (t_next - h);

  // with the exact inner path the reduction identity is checked directly
  const auto exact = jko_step(nu1, nu0, h, t_next, inner_config(), true);
  const auto oracle = extrapolate_1d(nu0, nu1, s);
  CHECK(std::sqrt(std::max(0.0, w2_sq_1d(exact, oracle))) < 1e-6);
  CHECK(std::sqrt(std::max(0.0, w2_sq_1d(exact, oracle))) < 1e-14);

  // the entropic path approaches the same point at rate O(epsilon)
  double prev = std::numeric_limits<double>::infinity();
  for (double floor_eps : {1e-3, 1e-4, 1e-5}) {
    const auto entropic = jko_step(nu1, nu0, h, t_next, inner_config(floor_eps), false);
    const double dist = std::sqrt(std::max(0.0, w2_sq_1d(entropic, oracle)));
    CHECK(dist < 10.0 * floor_eps);
    CHECK(dist <= prev);
    prev = dist;
  }
}

TEST_CASE("Dirac flows compose exactly regardless of the step partition") {
  const auto a = dirac({-0.5});
  const auto b = dirac({0.25});
  FlowConfig cfg;
  cfg.h = 0.05;
  cfg.t_final = 2.0;
  cfg.inner = inner_config();
  cfg.use_1d_exact = true;
  const auto traj = run_flow(a, b, cfg);
  REQUIRE(traj.size() == 21);
  for (size_t n = 0; n < traj.size(); ++n) {
    const double tn = 1.0 + cfg.h * double(n);
    const double expect = -0.5 + tn * (0.25 - (-0.5));
    CHECK(traj[n].points(0, 0) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("flow trajectories keep the prescribed weights") {
  auto g = support::rng(73);
  const auto nu0 = support::random_measure(g, 5, 1, 1.0);
  const auto nu1 = support::random_measure(g, 4, 1, 1.0, true);
  FlowConfig cfg;
  cfg.h = 0.1;
  cfg.t_final = 1.5;
  cfg.inner = inner_config();
  cfg.use_1d_exact = false;
  const auto traj = run_flow(nu0, nu1, cfg);
  REQUIRE(traj.size() == 6);
  CHECK(traj.front().points == nu1.points);
  for (const auto& m : traj) {
    CHECK(m.size() == nu1.size());
    CHECK(std::abs(m.weights.sum() - 1.0) < 1e-9);
  }
}

TEST_CASE("1d flow converges to the direct extrapolation as h refines") {
  auto g = support::rng(74);
  const auto nu0 = support::random_measure(g, 7, 1, 1.0);
  const auto nu1 = support::random_measure(g, 7, 1, 1.0);
  const double t_final = 2.0;
  const auto direct = extrapolate_1d(nu0, nu1, t_final);

  auto flow_error = [&](double h) {
    FlowConfig cfg;
    cfg.h = h;
    cfg.t_final = t_final;
    cfg.inner = inner_config();
    cfg.use_1d_exact = true;
    const auto traj = run_flow(nu0, nu1, cfg);
    return std::sqrt(std::max(0.0, w2_sq_1d(traj.back(), direct)));
  };
  const double e1 = flow_error(0.05);
  const double e2 = flow_error(0.025);
  CHECK(e1 < 0.05 * 5.0);  // C*h with a generous constant
  CHECK(e2 <= e1 + 1e-12);
}

TEST_CASE("symmetric three-against-two flow follows the extrapolation") {
  Matrix x(3, 2);
  x << -2.0, 1.0, 2.0, 1.0, 0.0, 0.0;
  Matrix y(2, 2);
  y << -1.0, 1.0, 1.0, 1.0;
  const auto nu0 = make_uniform(x);
  const auto nu1 = make_uniform(y);
  FlowConfig cfg;
  cfg.h = 0.025;
  cfg.t_final = 1.5;
  cfg.inner = inner_config();
  const auto traj = run_flow(nu0, nu1, cfg);
  for (size_t n = 1; n < traj.size(); ++n) {
    const double tn = 1.0 + cfg.h * double(n);
    SolverConfig direct = inner_config();
    direct.t = tn;
    const auto ext = solve(nu0, nu1, direct);
    CHECK(support::w2(traj[n], ext.nu_t) < 5e-2);
  }
}

TEST_CASE("flow configuration is validated") {
  auto g = support::rng(75);
  const auto m = support::random_measure(g, 3, 1);
  FlowConfig cfg;
  cfg.h = 1.5;
  cfg.t_final = 2.0;
  CHECK_THROWS_WITH_AS(static_cast<void>(run_flow(m, m, cfg)),
                       doctest::Contains("InvalidConfig"), Error);
  cfg.h = 0.1;
  cfg.t_final = 0.9;
  CHECK_THROWS_WITH_AS(static_cast<void>(run_flow(m, m, cfg)),
                       doctest::Contains("InvalidConfig"), Error);
  CHECK_THROWS_WITH_AS(static_cast<void>(jko_step(m, m, 0.2, 0.1, SolverConfig{})),
                       doctest::Contains("InvalidConfig"), Error);
}
