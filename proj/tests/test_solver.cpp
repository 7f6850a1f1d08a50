#include <doctest.h>

#include "edmik/bench.hpp"
#include "edmik/solver.hpp"
#include "test_util.hpp"

using namespace edmik;
using testutil::max_abs;

namespace {

// Masks drawn at random; Omega templates come from a hidden point set, Psi
// templates are scaled so that roughly half the bounds are active.
CompletionProblem random_problem(std::mt19937_64& rng, Eigen::Index n, Eigen::Index k) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::MatrixXd hidden = testutil::random_matrix(rng, n, k);
  const Eigen::MatrixXd d = testutil::brute_distances(hidden);
  CompletionProblem p;
  p.dim = k;
  p.partial.template_values = Eigen::MatrixXd::Zero(n, n);
  p.partial.equality_mask = Eigen::MatrixXd::Identity(n, n);
  p.partial.lower_bound_mask = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double r = u(rng);
      if (r < 0.4) {
        p.partial.equality_mask(a, b) = p.partial.equality_mask(b, a) = 1.0;
        p.partial.template_values(a, b) = p.partial.template_values(b, a) = d(a, b);
      } else if (r < 0.8) {
        p.partial.lower_bound_mask(a, b) = p.partial.lower_bound_mask(b, a) = 1.0;
        p.partial.template_values(a, b) = p.partial.template_values(b, a) =
            d(a, b) * (0.5 + u(rng));
      }
    }
  }
  p.anchors.indices.resize(static_cast<std::size_t>(k + 1));
  p.anchors.positions.resize(k + 1, k);
  for (Eigen::Index i = 0; i <= k; ++i) {
    p.anchors.indices[static_cast<std::size_t>(i)] = i;
    p.anchors.positions.row(i) = hidden.row(i);
  }
  p.initial = PointMatrix{testutil::random_matrix(rng, n, k)};
  return p;
}

CompletionProblem two_point_problem(double value, bool lower_bound, double distance) {
  CompletionProblem p;
  p.dim = 2;
  p.partial.template_values = Eigen::MatrixXd::Zero(3, 3);
  p.partial.equality_mask = Eigen::MatrixXd::Identity(3, 3);
  p.partial.lower_bound_mask = Eigen::MatrixXd::Zero(3, 3);
  auto& mask = lower_bound ? p.partial.lower_bound_mask : p.partial.equality_mask;
  mask(0, 1) = mask(1, 0) = 1.0;
  p.partial.template_values(0, 1) = p.partial.template_values(1, 0) = value;
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, distance, 0, 0, 1;
  p.initial = PointMatrix{pts};
  p.anchors = AnchorSet{{0, 1}, pts.topRows(2)};
  return p;
}

// Central difference of the cost along a horizontal direction through the
// retraction, against the metric pairing with the Riemannian gradient.
double directional_error(const CompletionProblem& problem, const ManifoldPoint& x,
                         const TangentVector& z) {
  const double h = 1e-6;
  const double fd = (cost(problem, retract(x, TangentVector{h * z.values})) -
                     cost(problem, retract(x, TangentVector{-h * z.values}))) /
                    (2.0 * h);
  const TangentVector g = riemannian_gradient(problem, x);
  const double analytic = inner(x, g, z);
  const double scale = std::max(std::abs(analytic), 1e-3 * norm(x, g) * norm(x, z));
  return std::abs(fd - analytic) / scale;
}

}  // namespace

TEST_CASE("cost on hand-sized problems") {
  // Both triangles of the symmetric mask contribute: 1/2 (3^2 + 3^2).
  const auto known = two_point_problem(4.0, false, 1.0);
  CHECK(cost(known, known.initial.values) == doctest::Approx(9.0).epsilon(1e-15));

  const auto exact = two_point_problem(4.0, false, 2.0);
  CHECK(cost(exact, exact.initial.values) == 0.0);

  const auto slack = two_point_problem(4.0, true, 3.0);
  CHECK(cost(slack, slack.initial.values) == 0.0);

  // Active bound: 1/2 (5^2 + 5^2).
  const auto active = two_point_problem(9.0, true, 2.0);
  CHECK(cost(active, active.initial.values) == doctest::Approx(25.0).epsilon(1e-15));

  // The manifold overload agrees with the matrix overload.
  CHECK(cost(known, ManifoldPoint(known.initial)) == cost(known, known.initial.values));
}

TEST_CASE("gradient at an exact solution vanishes") {
  const auto exact = two_point_problem(4.0, false, 2.0);
  CHECK(max_abs(euclidean_gradient(exact, ManifoldPoint(exact.initial))) < 1e-9);
}

TEST_CASE("gradient matches the dense formula and finite differences") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const Eigen::Index k = 2 + trial % 2;
    const auto problem = random_problem(rng, 8, k);
    const ManifoldPoint x(problem.initial);

    // Dense oracle: 2 K*(Omega o (K(PP^T) - D) - max(Psi o (D - K(PP^T)), 0)) P.
    const Eigen::MatrixXd& pm = x.matrix();
    const Eigen::MatrixXd kx = testutil::brute_distances(pm);
    const auto& part = problem.partial;
    const Eigen::MatrixXd r_eq =
        (part.equality_mask.array() * (kx - part.template_values).array()).matrix();
    const Eigen::MatrixXd r_lb =
        (part.lower_bound_mask.array() * (part.template_values - kx).array()).max(0.0).matrix();
    const Eigen::MatrixXd oracle = 2.0 * kappa_adjoint(r_eq - r_lb) * pm;
    const double oracle_cost = 0.5 * (r_eq.squaredNorm() + r_lb.squaredNorm());

    const CostAndGradient cg = cost_and_gradient(problem, pm);
    REQUIRE(std::abs(cg.cost - oracle_cost) <= 1e-12 * std::max(1.0, oracle_cost));
    REQUIRE(max_abs(cg.gradient - oracle) <= 1e-10 * std::max(1.0, max_abs(oracle)));
    REQUIRE(max_abs(euclidean_gradient(problem, x) - oracle) <= 1e-10 * std::max(1.0, max_abs(oracle)));

    for (int d = 0; d < 10; ++d) {
      const TangentVector z = project_horizontal(x, testutil::random_matrix(rng, 8, k));
      REQUIRE(directional_error(problem, x, z) < 1e-5);
    }
  }
}

TEST_CASE("Riemannian gradient respects the quotient") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index k = 2 + trial % 2;
    const auto problem = random_problem(rng, 7, k);
    const Eigen::MatrixXd pm = problem.initial.values;
    const Eigen::MatrixXd q = testutil::random_orthogonal(rng, k);
    const ManifoldPoint x(problem.initial);
    const ManifoldPoint xq(PointMatrix{pm * q});

    REQUIRE(std::abs(cost(problem, pm) - cost(problem, Eigen::MatrixXd(pm * q))) < 1e-9);

    const TangentVector g = riemannian_gradient(problem, x);
    const Eigen::MatrixXd m = pm.transpose() * g.values;
    REQUIRE(max_abs(m - m.transpose()) < 1e-9);
    REQUIRE(std::abs(norm(x, g) - norm(xq, riemannian_gradient(problem, xq))) < 1e-9);
    for (int j = 0; j < 5; ++j) {
      const Eigen::MatrixXd vertical = pm * testutil::random_skew(rng, k);
      REQUIRE(std::abs((g.values.array() * vertical.array()).sum()) < 1e-9);
    }
  }
}

TEST_CASE("Riemannian gradient equals an already horizontal Euclidean gradient") {
  // A single bar: the gradient points along the bar, and P^T G is symmetric.
  const auto p = two_point_problem(4.0, false, 1.0);
  const ManifoldPoint x(p.initial);
  const Eigen::MatrixXd e = euclidean_gradient(p, x);
  const Eigen::MatrixXd m = x.matrix().transpose() * e;
  REQUIRE(max_abs(m - m.transpose()) < 1e-12);
  CHECK(max_abs(riemannian_gradient(p, x).values - e) < 1e-10);
}

TEST_CASE("solver internals agree with the dense cost at the start point") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const auto problem = random_problem(rng, 9, 3);
    SolverConfig config;
    config.max_iters = 0;
    const SolveOutcome out = solve(problem, config);
    const ManifoldPoint x(problem.initial);
    REQUIRE(out.final_cost == doctest::Approx(cost(problem, x)).epsilon(1e-12));
    REQUIRE(out.grad_norm == doctest::Approx(norm(x, riemannian_gradient(problem, x))).epsilon(1e-10));
    REQUIRE_FALSE(out.converged);
    REQUIRE(out.status == SolveStatus::MaxIterations);
  }
}

TEST_CASE("solve from an exact solution") {
  const auto exact = two_point_problem(4.0, false, 2.0);
  const SolveOutcome out = solve(exact);
  CHECK(out.converged);
  CHECK(out.iterations <= 1);
  CHECK(out.final_cost < 1e-12);
  CHECK(max_abs(out.points.values.topRows(2) - exact.anchors.positions) < 1e-12);
}

TEST_CASE("triangle completion with one unknown side") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> len(0.5, 2.0);
    const double a = len(rng);
    const double b = len(rng);
    CompletionProblem p;
    p.dim = 2;
    p.partial.template_values = Eigen::MatrixXd::Zero(3, 3);
    p.partial.equality_mask = Eigen::MatrixXd::Identity(3, 3);
    p.partial.lower_bound_mask = Eigen::MatrixXd::Zero(3, 3);
    p.partial.equality_mask(0, 1) = p.partial.equality_mask(1, 0) = 1.0;
    p.partial.equality_mask(0, 2) = p.partial.equality_mask(2, 0) = 1.0;
    p.partial.template_values(0, 1) = p.partial.template_values(1, 0) = a * a;
    p.partial.template_values(0, 2) = p.partial.template_values(2, 0) = b * b;
    const bool bounded = trial % 2 == 1;
    const double bound = (a + b) * (a + b) * 0.8;
    if (bounded) {
      p.partial.lower_bound_mask(1, 2) = p.partial.lower_bound_mask(2, 1) = 1.0;
      p.partial.template_values(1, 2) = p.partial.template_values(2, 1) = bound;
    }
    Eigen::MatrixXd anchors(2, 2);
    anchors << 0, 0, a, 0;
    p.anchors = AnchorSet{{0, 1}, anchors};
    Eigen::MatrixXd init(3, 2);
    init << 0, 0, a, 0, 0, b;
    init += 0.2 * testutil::random_matrix(rng, 3, 2);
    p.initial = PointMatrix{init};

    const SolveOutcome out = solve(p);
    REQUIRE(out.converged);
    REQUIRE(out.final_cost < 1e-10);
    const Eigen::MatrixXd d = testutil::brute_distances(out.points.values);
    REQUIRE(std::abs(d(0, 1) - a * a) < 1e-5);
    REQUIRE(std::abs(d(0, 2) - b * b) < 1e-5);
    // Closure: the third side of a planar triangle lies in [|a - b|, a + b],
    // and its length is fixed by the angle at the shared vertex.
    const double c = std::sqrt(d(1, 2));
    REQUIRE(c >= std::abs(a - b) - 1e-6);
    REQUIRE(c <= a + b + 1e-6);
    const Eigen::Vector2d e1 = out.points.values.row(1) - out.points.values.row(0);
    const Eigen::Vector2d e2 = out.points.values.row(2) - out.points.values.row(0);
    const double cos_gamma = e1.dot(e2) / (e1.norm() * e2.norm());
    REQUIRE(std::abs(d(1, 2) - (a * a + b * b - 2 * a * b * cos_gamma)) < 1e-6);
    if (bounded) REQUIRE(d(1, 2) >= bound - 1e-5);
  }
}

TEST_CASE("accepted iterates never increase the cost") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 10; ++trial) {
    const auto problem = random_problem(rng, 10, 3);
    std::vector<double> costs;
    solve(problem, {}, [&](const IterationTrace& t) { costs.push_back(t.cost); });
    REQUIRE(costs.size() >= 2);
    for (std::size_t i = 1; i < costs.size(); ++i) REQUIRE(costs[i] <= costs[i - 1]);
  }
}

TEST_CASE("solve is deterministic") {
  std::mt19937_64 rng(36);
  const auto problem = random_problem(rng, 10, 3);
  const SolveOutcome a = solve(problem);
  const SolveOutcome b = solve(problem);
  CHECK(a.iterations == b.iterations);
  CHECK(a.final_cost == b.final_cost);
  CHECK(max_abs(a.points.values - b.points.values) == 0.0);
}

TEST_CASE("planar-10 instances solve to the pose tolerance") {
  const RobotModel robot = builtin_robot("planar-10");
  int successes = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const GeneratedTrial t = generate_trial(TrialSpec{"planar-10", robot, seed, false});
    const SolveOutcome out = solve(t.problem);
    if (!out.converged) continue;
    const PoseError e = pose_error(t.robot, recover_configuration(t.robot, out.points), t.goal);
    successes += (e.position < 0.01 && e.orientation < 0.01) ? 1 : 0;
  }
  CHECK(successes >= 18);
}

TEST_CASE("solver configuration validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.line_search.backtrack_factor = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.grad_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.max_iters = -1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("degenerate start points") {
  // Collinear start in the plane: the solver translates it off the origin
  // line and still completes the triangle.
  auto p = two_point_problem(4.0, false, 1.0);
  Eigen::MatrixXd line(3, 2);
  line << 0, 0, 1, 0, 3, 0;
  p.initial = PointMatrix{line};
  const SolveOutcome out = solve(p);
  CHECK(out.converged);
  CHECK(out.final_cost < 1e-10);

  // Collinear in 3-D: one translation cannot restore rank 3.
  CompletionProblem q;
  q.dim = 3;
  q.partial.template_values = Eigen::MatrixXd::Zero(4, 4);
  q.partial.equality_mask = Eigen::MatrixXd::Ones(4, 4);
  q.partial.lower_bound_mask = Eigen::MatrixXd::Zero(4, 4);
  Eigen::MatrixXd tetra(4, 3);
  tetra << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  q.partial.template_values = testutil::brute_distances(tetra);
  q.anchors = AnchorSet{{0, 1, 2}, tetra.topRows(3)};
  Eigen::MatrixXd collinear = Eigen::MatrixXd::Zero(4, 3);
  collinear.col(0) << 0, 1, 2, 3;
  q.initial = PointMatrix{collinear};
  const SolveOutcome stuck = solve(q);
  CHECK_FALSE(stuck.converged);
  CHECK(stuck.status == SolveStatus::RankDeficientBase);
  CHECK_FALSE(stuck.diagnostic.empty());
}
