#include <doctest.h>

#include <stirring/adjoint.hpp>
#include <stirring/errors.hpp>
#include <stirring/optimizer.hpp>

#include <cmath>
#include <random>

using namespace stirring;
using doctest::Approx;

namespace {

FlowBasis cellular2(double gamma = 1e-5) {
  const int orders[] = {1, 2};
  return FlowBasis::cellular(orders, gamma);
}

ControlSchedule random_controls(TimeGrid grid, std::size_t modes, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-amp, amp);
  return ControlSchedule::sampled(grid, modes, [&](double, std::size_t) { return U(rng); });
}

double max_rel_error(std::span<const double> a, std::span<const double> b) {
  double err = 0, scale = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    err = std::max(err, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(a[i]));
  }
  return err / scale;
}

Mat2 mul(const Mat2& a, const Mat2& b) {
  return {a.xx * b.xx + a.xy * b.yx, a.xx * b.xy + a.xy * b.yy, a.yx * b.xx + a.yy * b.yx,
          a.yx * b.xy + a.yy * b.yy};
}

Mat2 inverse(const Mat2& m) {
  const double d = det(m);
  return {m.yy / d, -m.xy / d, -m.yx / d, m.xx / d};
}

}  // namespace

TEST_CASE("penalty term examples") {
  const auto b = cellular2();
  const double one[] = {1.0, 1.0};
  const auto u = ControlSchedule::constant({1.0, 1000}, one);
  CHECK(control_penalty(u, b) == Approx(1e-5).epsilon(1e-13));
  CHECK(control_penalty(u, cellular2(2e-5)) == 2.0 * control_penalty(u, b));
}

TEST_CASE("cost of a static unit chord") {
  const auto b = cellular2();
  const auto m = init_interface(UnitSquare{}, {0.5}, 101);
  const auto u = ControlSchedule::zeros({1.0, 10}, 2);
  const auto traj = integrate(m, u, b);
  const auto c = evaluate_cost(traj, u, b, {1e-8});
  CHECK(c.total == Approx(-1.0).epsilon(1e-12));
  CHECK(c.penalty_term == 0.0);
  CHECK(c.total == c.length_term + c.penalty_term);
}

TEST_CASE("cost rejects mismatched shapes") {
  const auto b = cellular2();
  const auto m = init_interface(UnitSquare{}, {0.5}, 11);
  const auto traj = integrate(m, ControlSchedule::zeros({1.0, 10}, 2), b);
  CHECK_THROWS_AS(evaluate_cost(traj, ControlSchedule::zeros({1.0, 11}, 2), b, {}), ShapeError);
  const int o[] = {1};
  CHECK_THROWS_AS(evaluate_cost(traj, ControlSchedule::zeros({1.0, 10}, 2), FlowBasis::cellular(o, 1.0), {}),
                  ShapeError);
}

TEST_CASE("zero controls keep the adjoint constant") {
  const auto b = cellular2();
  std::vector<Vec2> pts{{0.1, 0.2}, {0.4, 0.7}, {0.8, 0.3}, {0.6, 0.9}};
  const MarkerSet m{pts};
  const auto u = ControlSchedule::zeros({1.0, 20}, 2);
  const auto traj = integrate(m, u, b);
  const auto adj = backward_adjoint(traj, u, b, LengthParams{});
  const auto pm = length_gradient(m);
  for (const auto& snap : adj.snapshots) CHECK(snap == pm);
}

TEST_CASE("adjoint step solves the linear midpoint recursion") {
  const Mat2 g{0.3, 1.7, -0.4, -0.3};
  const double dt = 0.05;
  const Vec2 pm{0.6, -0.8};
  // Closed form: p_n = (I - dt/2 G^T)^{-1} (I + dt/2 G^T) p_{n+1}, applied 40 times.
  const Mat2 gt = transpose(g);
  const Mat2 step = mul(inverse(Mat2::identity() + (-dt / 2) * gt), Mat2::identity() + (dt / 2) * gt);
  Mat2 power = Mat2::identity();
  for (int i = 0; i < 40; ++i) power = mul(step, power);
  const Vec2 expect = power * pm;
  Vec2 p = pm;
  for (int i = 0; i < 40; ++i) p = adjoint_step(g, p, dt, MidpointSolver::newton());
  CHECK(p.x == Approx(expect.x).epsilon(1e-10));
  CHECK(p.y == Approx(expect.y).epsilon(1e-10));
  // Five sweeps from p_{n+1}.
  Vec2 q = pm;
  for (int s = 0; s < 5; ++s) q = pm + dt * (gt * (0.5 * (q + pm)));
  CHECK(adjoint_step(g, pm, dt, MidpointSolver::fixed5()) == q);
}

TEST_CASE("adjoint pairs with the tangent recursion") {
  const auto b = cellular2();
  const TimeGrid grid{0.5, 100};
  const auto u = random_controls(grid, 2, 1.0, 11);
  ForwardOptions opts;
  opts.solver = MidpointSolver::newton();
  const auto m0 = init_interface(UnitSquare{}, {0.5}, 30);
  const auto traj = integrate(m0, u, b, opts);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> N;
  std::vector<Vec2> pm(m0.size()), dx(m0.size());
  for (auto& v : pm) v = {N(rng), N(rng)};
  for (auto& v : dx) v = {N(rng), N(rng)};
  const auto adj = backward_adjoint(traj, u, b, pm, opts);
  double before = 0;
  for (std::size_t j = 0; j < dx.size(); ++j) before += dot(adj.snapshots[0][j], dx[j]);
  const double dt = grid.dt();
  for (std::size_t n = 0; n < grid.M; ++n) {
    for (std::size_t j = 0; j < dx.size(); ++j) {
      const Mat2 g = b.combined_gradient(u.row(n), midpoint(traj.snapshot(n).positions[j], traj.snapshot(n + 1).positions[j]));
      dx[j] = solve(Mat2::identity() + (-dt / 2) * g, dx[j] + (dt / 2) * (g * dx[j]));
    }
  }
  double after = 0;
  for (std::size_t j = 0; j < dx.size(); ++j) after += dot(pm[j], dx[j]);
  CHECK(before == Approx(after).epsilon(1e-10));
}

TEST_CASE("adjoint is linear in its terminal condition") {
  const auto b = cellular2();
  const TimeGrid grid{0.3, 30};
  const auto u = random_controls(grid, 2, 1.0, 13);
  const auto traj = integrate(init_interface(UnitSquare{}, {0.5}, 20), u, b);
  const auto pm = length_gradient(traj.terminal());
  std::vector<Vec2> scaled(pm);
  for (auto& v : scaled) v *= 2.5;
  const auto a = backward_adjoint(traj, u, b, pm);
  const auto c = backward_adjoint(traj, u, b, scaled);
  for (std::size_t n = 0; n <= grid.M; ++n)
    for (std::size_t j = 0; j < pm.size(); ++j) {
      CHECK(c.snapshots[n][j].x == Approx(2.5 * a.snapshots[n][j].x).epsilon(1e-14).scale(1.0));
      CHECK(c.snapshots[n][j].y == Approx(2.5 * a.snapshots[n][j].y).epsilon(1e-14).scale(1.0));
    }
}

TEST_CASE("gradient vanishes at common stagnation points") {
  const auto b = cellular2();
  const MarkerSet m{{{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}}};
  const auto u = ControlSchedule::zeros({1.0, 10}, 2);
  const auto traj = integrate(m, u, b);
  const auto g = adjoint_gradient(traj, u, b, {});
  for (double v : g.values()) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("penalty-only gradient") {
  const auto b = cellular2();
  const double c[] = {0.7, -1.2};
  const auto u = ControlSchedule::constant({0.2, 40}, c);
  const auto traj = integrate(init_interface(UnitSquare{}, {0.5}, 10), u, b);
  const std::vector<Vec2> zero(10);
  const auto adj = backward_adjoint(traj, u, b, zero);
  const auto g = assemble_gradient(traj, adj, u, b);
  for (std::size_t n = 0; n < 40; ++n) {
    CHECK(g(n, 0) == Approx(1e-5 * 0.005 * 0.7).epsilon(1e-14));
    CHECK(g(n, 1) == Approx(1e-5 * 0.005 * -1.2).epsilon(1e-14));
  }
}

TEST_CASE("gradient matches central differences of the cost") {
  ControlProblem p{cellular2(), init_interface(UnitSquare{}, {0.5}, 200), {0.25, 50}};
  p.forward.solver = MidpointSolver::newton();
  const auto u = random_controls(p.grid, 2, 1.0, 14);
  const auto ev = evaluate(p, u);
  const auto g = adjoint_gradient(ev.trajectory, u, p.basis, p.length, p.forward);
  std::vector<double> fd(u.values().size());
  ControlSchedule w = u;
  for (std::size_t i = 0; i < fd.size(); ++i) {
    const double keep = w.values()[i];
    w.values()[i] = keep + 1e-6;
    const double jp = evaluate(p, w).cost.total;
    w.values()[i] = keep - 1e-6;
    const double jm = evaluate(p, w).cost.total;
    w.values()[i] = keep;
    fd[i] = (jp - jm) / 2e-6;
  }
  CHECK(max_rel_error(g.values(), fd) <= 1e-6);
}

TEST_CASE("fused, two-pass and checkpointed gradients agree") {
  const auto b = cellular2();
  const TimeGrid grid{0.4, 33};
  const auto u = random_controls(grid, 2, 1.0, 15);
  const auto m0 = init_interface(UnitSquare{}, {0.5}, 80);
  const auto dense = integrate(m0, u, b);
  const auto fused = adjoint_gradient(dense, u, b, {});
  const auto two = assemble_gradient(dense, backward_adjoint(dense, u, b, LengthParams{}), u, b);
  CHECK(max_rel_error(fused.values(), two.values()) <= 1e-14);
  ForwardOptions sparse;
  sparse.checkpoint_every = 5;
  const auto ck = integrate(m0, u, b, sparse);
  CHECK(adjoint_gradient(ck, u, b, {}, sparse) == fused);
  ForwardOptions threaded;
  threaded.threads = 3;
  CHECK(adjoint_gradient(dense, u, b, {}, threaded) == fused);
}

TEST_CASE("a small step along the negative gradient lowers the cost") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ControlProblem p{cellular2(), init_interface(UnitSquare{}, {0.5}, 60), {0.5, 40}};
    const auto u = random_controls(p.grid, 2, 1.0, 100 + seed);
    const auto ev = evaluate(p, u);
    const auto g = adjoint_gradient(ev.trajectory, u, p.basis, p.length);
    double gmax = 0;
    for (double v : g.values()) gmax = std::max(gmax, std::abs(v));
    ControlSchedule w = u;
    for (std::size_t i = 0; i < w.values().size(); ++i) w.values()[i] -= 1e-4 * g.values()[i] / gmax;
    CHECK(evaluate(p, w).cost.total < ev.cost.total);
  }
}

TEST_CASE("assembly rejects inconsistent inputs") {
  const auto b = cellular2();
  const auto u = ControlSchedule::zeros({1.0, 10}, 2);
  const auto traj = integrate(init_interface(UnitSquare{}, {0.5}, 10), u, b);
  AdjointTrajectory bad;
  bad.snapshots.resize(5);
  CHECK_THROWS_AS(assemble_gradient(traj, bad, u, b), ShapeError);
  const std::vector<Vec2> wrong(3);
  CHECK_THROWS_AS(backward_adjoint(traj, u, b, wrong), ShapeError);
}
