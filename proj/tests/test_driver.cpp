#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace gnn;
using Catch::Approx;

namespace {

// Fitting problem whose target lies in the span of the uniform_bias_1d
// activations of width 4 at beta = 1.
VariationalProblem in_span_problem() {
  const auto rule = map_to_interval(gauss_legendre(128), 0.0, 1.0);
  auto p = interval_problem("in_span", FormKind::l2_fit, 1.0, 1.0, rule, rule);
  const auto f = [](double x) { return std::tanh(x - 0.25) - 2.0 * std::tanh(x - 0.75) + 0.5 * std::tanh(x - 1.0); };
  add_density_load(p, [f](const Eigen::VectorXd& x) { return f(x[0]); });
  p.exact = exact_1d([f](double x) {
    PointJet j;
    j.value = f(x);
    return j;
  });
  return p;
}

Schedules tiny_schedules(double tol) {
  Schedules s;
  s.width = WidthSchedule::fixed(4);
  s.activation_scale = ScaleSchedule::constant(1.0);
  s.epochs = 0;
  s.tol = tol;
  s.max_iterations = 5;
  return s;
}

Schedules short_string_schedules(int iterations, int epochs) {
  Schedules s = find_problem("string_1d").schedules;
  s.width = WidthSchedule::geometric(5, 2);
  s.epochs = epochs;
  s.max_iterations = iterations;
  s.tol = 1e-12;
  return s;
}

}  // namespace

TEST_CASE("schedules") {
  const auto g = WidthSchedule::geometric(4, 2);
  CHECK(g.at(1) == 4);
  CHECK(g.at(5) == 64);
  CHECK(WidthSchedule::fixed(100).at(9) == 100);
  const auto st = WidthSchedule::stepped(200, 100, 2);
  CHECK(st.at(1) == 200);
  CHECK(st.at(2) == 200);
  CHECK(st.at(3) == 300);
  CHECK(st.at(7) == 500);
  CHECK(WidthSchedule::list({3, 5}).at(4) == 5);
  CHECK_THROWS_AS(WidthSchedule::geometric(0.5, 2).validate(), std::invalid_argument);
  CHECK_THROWS_AS(WidthSchedule::list({}).validate(), std::invalid_argument);

  CHECK(ScaleSchedule::affine(1, 3).at(3) == 7.0);
  CHECK(ScaleSchedule::geometric(1, 3, 2).at(3) == 13.0);
  CHECK_THROWS_AS(ScaleSchedule::affine(1, -1).validate("beta"), std::invalid_argument);

  const LearningRateSchedule lr{2e-2, 1.1};
  CHECK(lr.at(1) == 2e-2);
  CHECK(lr.at(3) == Approx(2e-2 / 1.21));
  CHECK_THROWS_AS((LearningRateSchedule{1e-2, 0.9}.validate()), std::invalid_argument);

  Schedules bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  const auto c1 = iteration_config(find_problem("string_1d").schedules, 3, 7);
  const auto c2 = iteration_config(find_problem("string_1d").schedules, 4, 7);
  CHECK(c1.seed != c2.seed);
  CHECK(c1.activation.scale == 3.0);
}

TEST_CASE("a target in the initial span stops after one basis function") {
  const auto p = in_span_problem();
  const auto st = run_adaptive(p, tiny_schedules(1e-8), 1);
  CHECK(st.terminated_reason == TerminatedReason::tol_reached);
  REQUIRE(st.history.size() == 2);
  CHECK(st.history[0].accepted);
  CHECK_FALSE(st.history[1].accepted);
  CHECK(st.history[1].eta <= 1e-8);
  CHECK(st.basis.size() == 1);
  CHECK(st.history[0].post_l2 <= 1e-10);
}

TEST_CASE("an infinite tolerance stops before any solve") {
  const auto p = in_span_problem();
  const auto st = run_adaptive(p, tiny_schedules(std::numeric_limits<double>::infinity()), 1);
  CHECK(st.terminated_reason == TerminatedReason::tol_reached);
  CHECK(st.history.size() == 1);
  CHECK(st.basis.empty());
  CHECK_THROWS_AS(evaluate_solution(st, Eigen::MatrixXd::Zero(1, 1), 0), std::invalid_argument);
}

TEST_CASE("short string run: bookkeeping, monotonicity and determinism") {
  const auto entry = find_problem("string_1d");
  const auto p = entry.build(entry.sizes);
  const auto s = short_string_schedules(4, 60);
  const auto st = run_adaptive(p, s, 3);
  CHECK(st.terminated_reason == TerminatedReason::max_iterations);
  REQUIRE(st.history.size() == 4);
  CHECK(st.iteration == 4);
  CHECK(st.epochs.size() == 4 * 61);
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& r : st.history) {
    INFO("iteration " << r.iteration);
    CHECK(r.accepted);
    CHECK(std::isfinite(r.cond));
    CHECK(r.orthogonality <= 1e-8);
    CHECK(r.phi_norm_error <= 1e-10);
    CHECK(r.post_energy <= prev + 1e-10);
    if (r.iteration > 1) CHECK(r.true_energy == prev);
    prev = r.post_energy;
  }
  CHECK((st.K.diagonal().array() - 1.0).abs().maxCoeff() <= 1e-10);

  // Same inputs, same history bits (wall time aside).
  const auto again = run_adaptive(p, s, 3);
  REQUIRE(again.history.size() == st.history.size());
  for (std::size_t k = 0; k < st.history.size(); ++k) {
    CHECK(again.history[k].eta == st.history[k].eta);
    CHECK(again.history[k].cond == st.history[k].cond);
    CHECK(again.history[k].post_energy == st.history[k].post_energy);
  }
  CHECK(again.coefficients == st.coefficients);

  // The recorded error is reproduced by evaluating the solution on the validation nodes.
  const auto& vrule = p.validation_sites[0].rule;
  const Eigen::VectorXd u = evaluate_solution(st, vrule.nodes, 0).values;
  double l2 = 0.0;
  for (Eigen::Index k = 0; k < vrule.size(); ++k) {
    const double e = exact::string(vrule.nodes(k, 0), p.eps).value - u[k];
    l2 += vrule.weights[k] * e * e;
  }
  CHECK(std::abs(std::sqrt(l2) - st.history.back().post_l2) <= 1e-12);

  // Derivatives of the sum against finite differences.
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd X = gnn::testing::random_points(rng, p.domain, 10);
  const double h = 1e-5;
  const auto s2 = evaluate_solution(st, X, 2);
  const Eigen::MatrixXd Xp = X.array() + h;
  const Eigen::MatrixXd Xm = X.array() - h;
  const Eigen::VectorXd d1 = (evaluate_solution(st, Xp, 0).values - evaluate_solution(st, Xm, 0).values) / (2 * h);
  const Eigen::VectorXd d2 = (evaluate_solution(st, Xp, 1).gradient - evaluate_solution(st, Xm, 1).gradient) / (2 * h);
  const double g_scale = s2.gradient.cwiseAbs().maxCoeff();
  const double s_scale = s2.second.cwiseAbs().maxCoeff();
  CHECK((d1 - s2.gradient.col(0)).cwiseAbs().maxCoeff() <= 1e-6 * g_scale);
  CHECK((d2 - s2.second.col(0)).cwiseAbs().maxCoeff() <= 1e-6 * s_scale);
}

TEST_CASE("evaluate_solution is linear in the coefficients") {
  SolverState st;
  std::mt19937_64 rng(2);
  st.basis.push_back(gnn::testing::random_network(rng, 1, 3));
  st.coefficients = Eigen::VectorXd::Constant(1, 2.0);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 1);
  CHECK(evaluate_solution(st, X, 0).values == 2.0 * eval_stack(st.basis[0], X, 0).values);
}

TEST_CASE("stagnation study on a trivial target") {
  const auto p = in_span_problem();
  const auto study = stagnation_study(p, 4, tiny_schedules(1e-8), 5);
  CHECK(study.fixed.terminated_reason == TerminatedReason::tol_reached);
  CHECK(study.growing.terminated_reason == TerminatedReason::tol_reached);
  REQUIRE(study.fixed.history.size() == study.growing.history.size());
  for (std::size_t k = 0; k < study.fixed.history.size(); ++k) {
    CHECK(study.fixed.history[k].eta == study.growing.history[k].eta);
  }
}

TEST_CASE("max_iterations never reports tol_reached") {
  const auto p = in_span_problem();
  auto s = tiny_schedules(1e-300);
  s.width = WidthSchedule::fixed(2);
  s.max_iterations = 2;
  const auto st = run_adaptive(p, s, 1);
  CHECK(st.terminated_reason != TerminatedReason::tol_reached);
  CHECK(st.history.size() <= 2);
}
