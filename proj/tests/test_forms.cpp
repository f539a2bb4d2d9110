#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <numbers>

using namespace gnn;
using gnn::testing::random_network;
using Catch::Approx;
using std::numbers::pi;

namespace {

// Samples of a closed-form function on every site of p.
Bundle sample_fn(const VariationalProblem& p, std::function<PointJet(const Eigen::VectorXd&)> f,
                 bool validation = false) {
  const ExactSolution e{std::move(f), true};
  const auto& sites = validation ? p.validation_sites : p.sites;
  Bundle b;
  for (std::size_t s = 0; s < sites.size(); ++s) b.push_back(sample_exact(e, sites[s].rule, p.site_order(s)));
  return b;
}

PointJet poly1d(double v, double d1, double d2) {
  PointJet j;
  j.value = v;
  j.grad[0] = d1;
  j.second[0] = d2;
  return j;
}

QuadratureRule unit_gauss(int n) { return map_to_interval(gauss_legendre(n), 0.0, 1.0); }

const std::vector<std::string> kAllProblems{"l2_fit",      "string_1d", "membrane_2d",    "line_source_inner",
                                            "line_source_boundary_layer", "l_shaped", "beam_1d", "beam_couple_1d",
                                            "plate_point_load"};

}  // namespace

TEST_CASE("bilinear forms on hand-computable data") {
  const auto one = [](const Eigen::VectorXd&) { return poly1d(1.0, 0.0, 0.0); };
  const auto lin = [](const Eigen::VectorXd& x) { return poly1d(x[0], 1.0, 0.0); };
  const auto quad = [](const Eigen::VectorXd& x) { return poly1d(x[0] * x[0], 2.0 * x[0], 2.0); };

  const auto l2 = interval_problem("t", FormKind::l2_fit, 1.0, 1.0, unit_gauss(4), unit_gauss(4));
  CHECK(bilinear(l2, sample_fn(l2, one), sample_fn(l2, one)) == Approx(1.0).epsilon(1e-14));
  CHECK(energy_norm(l2, sample_fn(l2, one)).value == Approx(1.0).epsilon(1e-14));

  const auto h1 = interval_problem("t", FormKind::h1_penalty, 1.0, 1.0, unit_gauss(4), unit_gauss(4));
  CHECK(bilinear(h1, sample_fn(h1, lin), sample_fn(h1, lin)) == Approx(2.0).epsilon(1e-14));
  CHECK(energy_norm(h1, sample_fn(h1, lin)).value == Approx(std::sqrt(2.0)).epsilon(1e-14));

  const auto h2 = interval_problem("t", FormKind::h2_penalty, 1.0, 1.0, unit_gauss(4), unit_gauss(4));
  CHECK(bilinear(h2, sample_fn(h2, quad), sample_fn(h2, quad)) == Approx(9.0).epsilon(1e-14));

  CHECK(energy_norm(h2, zero_bundle(h2)).value == 0.0);
  CHECK(derivative_order(FormKind::l2_fit) == 0);
  CHECK(derivative_order(FormKind::h1_penalty) == 1);
  CHECK(derivative_order(FormKind::h2_penalty) == 2);
}

TEST_CASE("load functionals") {
  SECTION("line source with unit strength integrates v = 1 to the circumference") {
    QuadratureSizes q;
    q.interior = 8;
    q.angular = 8;
    q.boundary = 16;
    auto p = disk_problem("t", FormKind::h1_penalty, 1.0, 0.0, 1.0, q);
    const double R0 = 0.3;
    add_curve_load(p, "interface", circle_boundary(32, R0), 1.0);
    const auto v = sample_fn(p, [](const Eigen::VectorXd&) { return PointJet{1.0}; });
    CHECK(load(p, v) == Approx(2.0 * pi * R0).epsilon(1e-14));
  }
  SECTION("point derivative load") {
    auto p = interval_problem("t", FormKind::h2_penalty, 1.0, 1.0, unit_gauss(4), unit_gauss(4));
    add_point_load(p, Eigen::VectorXd::Constant(1, 0.5), Quantity::grad_x, -1.0);
    const auto v = sample_fn(p, [](const Eigen::VectorXd& x) { return poly1d(x[0], 1.0, 0.0); });
    CHECK(load(p, v) == Approx(-1.0));
    CHECK_THROWS_AS(add_point_load(p, Eigen::VectorXd::Constant(1, 1.5), Quantity::value, 1.0),
                    std::invalid_argument);
  }
  SECTION("density load on the unit disk") {
    QuadratureSizes q;
    q.interior = 12;
    q.angular = 16;
    q.boundary = 16;
    auto p = disk_problem("t", FormKind::h1_penalty, 1.0, 0.0, 1.0, q);
    add_density_load(p, [](const Eigen::VectorXd&) { return 2.0; });
    const auto v = sample_fn(p, [](const Eigen::VectorXd&) { return PointJet{1.0}; });
    CHECK(std::abs(load(p, v) - 2.0 * pi) < 1e-12);
  }
}

TEST_CASE("residual basics") {
  std::mt19937_64 rng(2);
  const auto p = gnn::testing::build("string_1d");
  const auto v = sample(p, random_network(rng, 1, 5));
  CHECK(residual(p, zero_bundle(p), v) == load(p, v));
  CHECK(residual(p, sample_exact(p), zero_bundle(p)) == 0.0);
}

TEST_CASE("exact string solution satisfies the weak form") {
  std::mt19937_64 rng(4);
  const auto p = gnn::testing::build("string_1d");
  const Bundle u = sample_exact(p);
  for (int k = 0; k < 20; ++k) {
    const Bundle v = sample(p, random_network(rng, 1, 6, 1.0 + k % 5));
    const double scale = std::abs(load(p, v)) + std::abs(bilinear(p, u, v));
    CHECK(std::abs(residual(p, u, v)) <= 1e-6 * scale);
  }
}

TEST_CASE("exact errors on the fitting problem") {
  const auto p = gnn::testing::build("l2_fit");
  const auto e0 = exact_error(p, zero_bundle(p, true));
  CHECK(e0.l2 == Approx(std::sqrt(0.5 * (1.0 + 1.0 / 9.0 + 1.0 / 25.0 + 1.0 / 49.0))).epsilon(1e-12));

  const auto same = exact_error(p, sample_exact(p, true));
  CHECK(same.l2 <= 1e-10);
  CHECK(same.energy <= 1e-10);

  Bundle shifted = sample_exact(p, true);
  const auto& rule = p.validation_sites[0].rule;
  for (Eigen::Index k = 0; k < rule.size(); ++k) shifted[0].values[k] += 0.1 * std::sin(2.0 * pi * rule.nodes(k, 0));
  CHECK(std::abs(exact_error(p, shifted).l2 - 0.1 / std::sqrt(2.0)) < 1e-10);

  const auto ls = gnn::testing::build("l_shaped");
  CHECK_THROWS_AS(exact_error(ls, zero_bundle(ls, true)), std::invalid_argument);
}

TEST_CASE("catalog contents") {
  const auto entries = catalog();
  REQUIRE(entries.size() == 9);
  CHECK(catalog_names() == kAllProblems);
  for (const auto& e : entries) CHECK(e.has_exact == (e.name != "l_shaped"));
  CHECK_THROWS_WITH(find_problem("nope"), Catch::Matchers::ContainsSubstring("membrane_2d"));

  const double eps = 1e-4;
  CHECK(exact::string(0.0, eps).value == Approx(12.0 * pi * eps / (1.0 + 2.0 * eps)).epsilon(1e-12));
  CHECK(exact::string(0.0, eps).value == Approx(3.76916e-3).epsilon(1e-5));
  CHECK(exact::membrane(Eigen::Vector2d::Zero(), eps).value == Approx(0.5001).epsilon(1e-12));

  for (const auto& p : problem_catalog()) {
    INFO(p.name);
    CHECK_NOTHROW(p.validate());
    for (const auto& t : p.bilinear_terms) CHECK(t.coef > 0.0);
    CHECK(p.derivative_order_required() == derivative_order(p.form_kind));
  }
}

TEST_CASE("symmetry, positivity and Cauchy-Schwarz on every catalog problem") {
  std::mt19937_64 rng(9);
  for (const auto& p : problem_catalog()) {
    INFO(p.name);
    const int d = p.dim();
    for (int k = 0; k < 100; ++k) {
      const Bundle u = sample(p, random_network(rng, d, 3, 1.0 + k % 3));
      const Bundle v = sample(p, random_network(rng, d, 3, 1.0 + k % 4));
      CHECK(bilinear(p, v, v) > 0.0);
      if (k % 10 == 0) {
        const double auv = bilinear(p, u, v);
        const double avu = bilinear(p, v, u);
        CHECK(std::abs(auv - avu) <= 1e-13 * std::max(1.0, std::abs(auv)));
        CHECK(std::abs(auv) <= energy_norm(p, u).value * energy_norm(p, v).value * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("exact solutions are consistent with their discrete forms") {
  std::mt19937_64 rng(31);
  for (const auto& name : kAllProblems) {
    const bool split = name.rfind("line_source", 0) == 0;
    const auto p = gnn::testing::build(name, split);
    if (!p.exact || !p.exact->solves_discrete_form) continue;
    INFO(name);
    const bool singular = split || name == "plate_point_load";
    const Bundle u = sample_exact(p);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Bundle v = sample(p, random_network(rng, p.dim(), 5));
      const double scale = std::abs(load(p, v)) + std::abs(bilinear(p, u, v));
      worst = std::max(worst, std::abs(residual(p, u, v)) / scale);
    }
    CHECK(worst <= (singular ? 1e-3 : 1e-5));
  }
}
