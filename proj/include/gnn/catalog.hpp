#pragma once

// Problem assembly (interval, disk, L-shape) and the configured problem catalog
// with default quadrature sizes, schedules and closed-form solutions.

#include "gnn/forms.hpp"
#include "gnn/quadrature.hpp"
#include "gnn/schedules.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnn {

using std::numbers::pi;

enum class InteriorRuleKind { gauss, riemann };

inline std::string to_string(InteriorRuleKind k) { return k == InteriorRuleKind::gauss ? "gauss" : "riemann"; }

inline InteriorRuleKind parse_interior_rule(const std::string& s) {
  if (s == "gauss") return InteriorRuleKind::gauss;
  if (s == "riemann") return InteriorRuleKind::riemann;
  throw std::invalid_argument("unknown rule kind '" + s + "' (expected gauss or riemann)");
}

/// Node counts of the training and validation rules.
///  interval: `interior` nodes on the interval, `validation` for error measurement
///  disk:     `interior` radial x `angular` nodes, `boundary` on the outer circle,
///            `interface` on an inner load circle
///  L-shape:  `interior` per axis on each unit square, `boundary` per edge
struct QuadratureSizes {
  int interior = 512;
  int angular = 0;
  int boundary = 0;
  int interface = 0;
  int validation = 1000;
  InteriorRuleKind interior_rule = InteriorRuleKind::gauss;
  /// Break the radial disk rule at a load circle (off by default: the
  /// training data then carries no knowledge of where the source sits).
  bool split_at_interface = false;

  void validate() const {
    if (interior < 1 || angular < 0 || boundary < 0 || interface < 0 || validation < 1)
      throw std::invalid_argument("quadrature node counts must be positive");
  }
};

// ---------------------------------------------------------------------------
// Assembly helpers

inline QuadratureRule interval_rule(InteriorRuleKind kind, int n, double a, double b) {
  if (kind == InteriorRuleKind::riemann) return riemann_left(n, a, b);
  return map_to_interval(gauss_legendre(n), a, b);
}

inline std::vector<FormTerm> form_terms(FormKind kind, int d, double eps1, double eps2) {
  switch (kind) {
    case FormKind::l2_fit: return {{0, Quantity::value, 1.0}};
    case FormKind::h1_penalty:
      if (d == 1) return {{0, Quantity::grad_x, 1.0}, {1, Quantity::value, 1.0 / eps1}};
      return {{0, Quantity::grad_x, 1.0}, {0, Quantity::grad_y, 1.0}, {1, Quantity::value, 1.0 / eps1}};
    case FormKind::h2_penalty:
      if (d == 1)
        return {{0, Quantity::second_1d, 1.0}, {1, Quantity::value, 1.0 / eps1}, {1, Quantity::grad_x, 1.0 / eps2}};
      // The plate form multiplies (not divides) the normal-derivative term by eps2.
      return {{0, Quantity::laplacian, 1.0}, {1, Quantity::value, 1.0 / eps1}, {1, Quantity::normal_derivative, eps2}};
  }
  return {};
}

/// A problem on (lo, hi): site 0 is the interior rule, site 1 the two endpoints.
inline VariationalProblem interval_problem(std::string name, FormKind kind, double eps1, double eps2,
                                           QuadratureRule interior, QuadratureRule validation, double lo = 0.0,
                                           double hi = 1.0) {
  VariationalProblem p;
  p.name = std::move(name);
  p.domain = Domain::interval(lo, hi);
  p.form_kind = kind;
  p.eps = eps1;
  p.eps1 = eps1;
  p.eps2 = eps2;
  p.sites.push_back({"interior", std::move(interior)});
  p.validation_sites.push_back({"interior", std::move(validation)});
  if (kind != FormKind::l2_fit) {
    Eigen::MatrixXd pts(2, 1);
    pts << lo, hi;
    Eigen::MatrixXd nrm(2, 1);
    nrm << -1.0, 1.0;
    const QuadratureRule ends = point_set(pts, nrm);
    p.sites.push_back({"boundary", ends});
    p.validation_sites.push_back({"boundary", ends});
  }
  p.bilinear_terms = form_terms(kind, 1, eps1, eps2);
  return p;
}

/// A problem on the disk of radius R: site 0 the polar interior rule, site 1 the circle.
inline VariationalProblem disk_problem(std::string name, FormKind kind, double eps1, double eps2, double R,
                                       const QuadratureSizes& q, const std::vector<double>& radial_breaks = {}) {
  VariationalProblem p;
  p.name = std::move(name);
  p.domain = Domain::disk(R);
  p.form_kind = kind;
  p.eps = eps1;
  p.eps1 = eps1;
  p.eps2 = eps2;
  p.sites.push_back({"interior", disk_interior(q.interior, q.angular, R, radial_breaks)});
  p.sites.push_back({"boundary", circle_boundary(q.boundary, R)});
  p.validation_sites = p.sites;
  p.bilinear_terms = form_terms(kind, 2, eps1, eps2);
  return p;
}

inline VariationalProblem l_shape_problem(std::string name, double eps, int n_per_square, int n_edge) {
  VariationalProblem p;
  p.name = std::move(name);
  p.domain = Domain::l_shape();
  p.form_kind = FormKind::h1_penalty;
  p.eps = eps;
  p.eps1 = eps;
  auto rules = l_shaped_rules(n_per_square, n_edge);
  p.sites.push_back({"interior", std::move(rules.interior)});
  p.sites.push_back({"boundary", std::move(rules.boundary)});
  p.validation_sites = p.sites;
  p.bilinear_terms = form_terms(FormKind::h1_penalty, 2, eps, 0.0);
  return p;
}

/// L(v) = (f, v) on the interior site.
inline void add_density_load(VariationalProblem& p, std::function<double(const Eigen::VectorXd&)> f) {
  const auto& rule = p.sites.front().rule;
  Eigen::VectorXd data(rule.size());
  for (Eigen::Index k = 0; k < rule.size(); ++k) data[k] = f(rule.nodes.row(k).transpose());
  p.load_kind = LoadKind::density;
  p.density = std::move(f);
  p.load_terms.push_back({0, Quantity::value, 1.0, std::move(data)});
}

/// L(v) = strength * int_C v ds over a curve carried by its own rule.
inline void add_curve_load(VariationalProblem& p, const std::string& name, QuadratureRule rule, double strength) {
  p.load_kind = LoadKind::line_source;
  p.sites.push_back({name, rule});
  p.validation_sites.push_back({name, std::move(rule)});
  p.load_terms.push_back({p.sites.size() - 1, Quantity::value, strength, {}});
}

/// L(v) = coef * Q(v)(point), with Q the value or the x-derivative.
inline void add_point_load(VariationalProblem& p, const Eigen::VectorXd& point, Quantity q, double coef) {
  if (!p.domain.contains(point, 0.0)) throw std::invalid_argument("load point lies outside the domain");
  if (q != Quantity::value && q != Quantity::grad_x) throw std::invalid_argument("point loads act on v or v'");
  p.load_kind = q == Quantity::value ? LoadKind::point_value : LoadKind::point_derivative;
  Eigen::MatrixXd pts(1, point.size());
  pts.row(0) = point.transpose();
  const QuadratureRule r = point_set(pts);
  p.sites.push_back({"load_point", r});
  p.validation_sites.push_back({"load_point", r});
  p.load_terms.push_back({p.sites.size() - 1, q, coef, {}});
}

// ---------------------------------------------------------------------------
// Closed-form solutions

namespace exact {

inline PointJet fitting_target(double x) {
  PointJet j;
  for (int k : {1, 3, 5, 7}) {
    const double w = k * pi;
    j.value += std::sin(w * x) / k;
    j.grad[0] += pi * std::cos(w * x);
    j.second[0] += -pi * w * std::sin(w * x);
  }
  return j;
}

inline PointJet string(double x, double eps) {
  PointJet j;
  for (int k : {2, 4, 6}) {
    const double w = k * pi;
    j.value += std::sin(w * x);
    j.grad[0] += w * std::cos(w * x);
    j.second[0] += -w * w * std::sin(w * x);
  }
  j.value += 12.0 * pi * eps * (1.0 - 2.0 * x) / (1.0 + 2.0 * eps);
  j.grad[0] += -24.0 * pi * eps / (1.0 + 2.0 * eps);
  return j;
}

inline double string_load(double x) {
  double f = 0.0;
  for (int k : {2, 4, 6}) f += (k * pi) * (k * pi) * std::sin(k * pi * x);
  return f;
}

/// Radially symmetric u(r) lifted to a 2-D jet.
inline PointJet radial(const Eigen::VectorXd& x, double u, double ur, double urr) {
  PointJet j;
  j.value = u;
  const double r = x.norm();
  if (r == 0.0) return j;
  const double cx = x[0] / r;
  const double cy = x[1] / r;
  j.grad = Eigen::Vector2d(ur * cx, ur * cy);
  j.second[0] = urr * cx * cx + ur * cy * cy / r;
  j.second[1] = (urr - ur / r) * cx * cy;
  j.second[2] = urr * cy * cy + ur * cx * cx / r;
  return j;
}

inline PointJet membrane(const Eigen::VectorXd& x, double eps) {
  const double r = x.norm();
  PointJet j;
  j.value = -r * r / 2.0 + eps + 0.5;
  j.grad = Eigen::Vector2d(-x[0], -x[1]);
  j.second = Eigen::Vector3d(-1.0, 0.0, -1.0);
  return j;
}

/// Load strength that makes the solution equal 1 (plus the Robin offset) on the inner disk.
inline double line_source_strength(double R0, double Re) { return 1.0 / (R0 * std::log(Re / R0)); }

inline PointJet line_source(const Eigen::VectorXd& x, double R0, double Re, double eps) {
  const double L = std::log(Re / R0);
  const double offset = eps / (Re * L);
  const double r = x.norm();
  if (r <= R0) {
    PointJet j;
    j.value = 1.0 + offset;
    return j;
  }
  return radial(x, std::log(Re / r) / L + offset, -1.0 / (r * L), 1.0 / (r * r * L));
}

struct BeamConstants {
  double C0, C1, D;
};

inline BeamConstants beam_constants(double eps1, double eps2) {
  return {4.0 * eps1 * (pi * pi * (6.0 * eps2 + 1.0) + 3.0), 1.0 - 8.0 * eps1 * pi * pi,
          24.0 * eps1 + 6.0 * eps2 + 1.0};
}

inline PointJet beam(double x, double eps1, double eps2) {
  const auto [C0, C1, D] = beam_constants(eps1, eps2);
  const double P = C0 + C1 * (x * x - x);
  const double s = 2.0 * pi / D;
  const double t = 2.0 * x - 1.0;
  PointJet j;
  j.value = std::sin(2.0 * pi * x) - s * t * P;
  j.grad[0] = 2.0 * pi * std::cos(2.0 * pi * x) - s * (2.0 * P + C1 * t * t);
  j.second[0] = -4.0 * pi * pi * std::sin(2.0 * pi * x) - s * 6.0 * C1 * t;
  return j;
}

/// Clamped-beam solution for the unit point couple at 1/2 (limit eps1 = eps2 = 0).
inline PointJet beam_couple(double x) {
  const double m = x - 0.5;
  const double am = std::abs(m);
  PointJet j;
  j.value = 0.25 * m * am - 0.25 * x * x * x + 0.375 * x * x - 0.25 * x + 1.0 / 16.0;
  j.grad[0] = 0.5 * am - 0.75 * x * x + 0.75 * x - 0.25;
  j.second[0] = 0.5 * (m > 0.0 ? 1.0 : (m < 0.0 ? -1.0 : 0.0)) - 1.5 * x + 0.75;
  return j;
}

inline double plate_c1(double eps2) { return (-1.0 / (2.0 * pi) - eps2 / (8.0 * pi)) / (4.0 + 2.0 * eps2); }
inline double plate_c2(double eps1, double eps2) { return -plate_c1(eps2) + eps1 / (2.0 * pi); }

inline PointJet plate(const Eigen::VectorXd& x, double eps1, double eps2) {
  const double c1 = plate_c1(eps2);
  const double c2 = plate_c2(eps1, eps2);
  const double r = x.norm();
  if (r == 0.0) {
    PointJet j;
    j.value = c2;
    return j;
  }
  const double lr = std::log(r);
  return radial(x, r * r * lr / (8.0 * pi) + c1 * r * r + c2, (2.0 * r * lr + r) / (8.0 * pi) + 2.0 * c1 * r,
                (2.0 * lr + 3.0) / (8.0 * pi) + 2.0 * c1);
}

}  // namespace exact

inline ExactSolution exact_1d(std::function<PointJet(double)> f, bool solves = true) {
  return {[f = std::move(f)](const Eigen::VectorXd& x) { return f(x[0]); }, solves};
}

// ---------------------------------------------------------------------------
// Catalog

struct CatalogEntry {
  std::string name;
  std::string description;
  int dim = 1;
  FormKind form_kind = FormKind::l2_fit;
  bool has_exact = false;
  Schedules schedules;
  QuadratureSizes sizes;
  std::function<VariationalProblem(const QuadratureSizes&)> build;
};

namespace detail {

inline QuadratureRule interval_validation(const QuadratureSizes& q) {
  return map_to_interval(gauss_legendre(q.validation), 0.0, 1.0);
}

inline Schedules schedules_of(WidthSchedule w, ScaleSchedule beta, LearningRateSchedule lr, InitStrategy init,
                              double tol) {
  Schedules s;
  s.width = std::move(w);
  s.activation_scale = std::move(beta);
  s.learning_rate = lr;
  s.init = init;
  s.tol = tol;
  return s;
}

inline CatalogEntry line_source_entry(const std::string& name, double R0, double tol) {
  const double Re = 1.0 - 1.0 / (pi * pi);
  const double eps = 1e-3;
  CatalogEntry e;
  e.name = name;
  e.description = "Poisson on the disk of radius 1-1/pi^2 with a line source on r = " + std::to_string(R0);
  e.dim = 2;
  e.form_kind = FormKind::h1_penalty;
  e.has_exact = true;
  e.sizes = {128, 128, 512, 512, 1, InteriorRuleKind::gauss};
  e.schedules = schedules_of(WidthSchedule::geometric(30, 2), ScaleSchedule::affine(1, 1), {2e-2, 1.1},
                             InitStrategy::box_init, tol);
  e.build = [name, R0, Re, eps](const QuadratureSizes& q) {
    const std::vector<double> breaks = q.split_at_interface ? std::vector<double>{R0} : std::vector<double>{};
    VariationalProblem p = disk_problem(name, FormKind::h1_penalty, eps, 0.0, Re, q, breaks);
    add_curve_load(p, "interface", circle_boundary(q.interface, R0), exact::line_source_strength(R0, Re));
    p.exact = ExactSolution{[=](const Eigen::VectorXd& x) { return exact::line_source(x, R0, Re, eps); }, true};
    return p;
  };
  return e;
}

}  // namespace detail

inline std::vector<CatalogEntry> catalog() {
  std::vector<CatalogEntry> out;

  {
    CatalogEntry e;
    e.name = "l2_fit";
    e.description = "L2 projection of the 4-term square-wave partial sum on (0,1)";
    e.form_kind = FormKind::l2_fit;
    e.has_exact = true;
    e.sizes = {512, 0, 0, 0, 1000, InteriorRuleKind::gauss};
    e.schedules = detail::schedules_of(WidthSchedule::geometric(4, 2), ScaleSchedule::affine(1, 3), {1e-2, 1.0},
                                       InitStrategy::uniform_bias_1d, 1e-6);
    e.build = [](const QuadratureSizes& q) {
      VariationalProblem p = interval_problem("l2_fit", FormKind::l2_fit, 0.0, 0.0,
                                              interval_rule(q.interior_rule, q.interior, 0.0, 1.0),
                                              detail::interval_validation(q));
      add_density_load(p, [](const Eigen::VectorXd& x) { return exact::fitting_target(x[0]).value; });
      p.exact = exact_1d(exact::fitting_target);
      return p;
    };
    out.push_back(std::move(e));
  }
  {
    const double eps = 1e-4;
    CatalogEntry e;
    e.name = "string_1d";
    e.description = "-u'' = f on (0,1), u + eps du/dn = 0, eps = 1e-4";
    e.form_kind = FormKind::h1_penalty;
    e.has_exact = true;
    e.sizes = {512, 0, 0, 0, 1000, InteriorRuleKind::gauss};
    e.schedules = detail::schedules_of(WidthSchedule::fixed(400), ScaleSchedule::affine(1, 1), {2e-2, 1.0},
                                       InitStrategy::uniform_bias_1d, 2e-6);
    e.build = [eps](const QuadratureSizes& q) {
      VariationalProblem p = interval_problem("string_1d", FormKind::h1_penalty, eps, 0.0,
                                              interval_rule(q.interior_rule, q.interior, 0.0, 1.0),
                                              detail::interval_validation(q));
      add_density_load(p, [](const Eigen::VectorXd& x) { return exact::string_load(x[0]); });
      p.exact = exact_1d([eps](double x) { return exact::string(x, eps); });
      return p;
    };
    out.push_back(std::move(e));
  }
  {
    const double eps = 1e-4;
    CatalogEntry e;
    e.name = "membrane_2d";
    e.description = "-Laplace u = 2 on the unit disk, u + eps du/dn = 0, eps = 1e-4";
    e.dim = 2;
    e.form_kind = FormKind::h1_penalty;
    e.has_exact = true;
    e.sizes = {128, 128, 256, 0, 1, InteriorRuleKind::gauss};
    e.schedules = detail::schedules_of(WidthSchedule::stepped(200, 100, 2), ScaleSchedule::constant(1), {1e-2, 1.1},
                                       InitStrategy::axis_diagonal_2d, 2e-6);
    e.build = [eps](const QuadratureSizes& q) {
      VariationalProblem p = disk_problem("membrane_2d", FormKind::h1_penalty, eps, 0.0, 1.0, q);
      add_density_load(p, [](const Eigen::VectorXd&) { return 2.0; });
      p.exact = ExactSolution{[eps](const Eigen::VectorXd& x) { return exact::membrane(x, eps); }, true};
      return p;
    };
    out.push_back(std::move(e));
  }
  out.push_back(detail::line_source_entry("line_source_inner", 1.0 / std::sqrt(29.0), 0.2));
  out.push_back(detail::line_source_entry("line_source_boundary_layer", 7.0 / (6.0 * std::sqrt(2.0)), 1.0));
  {
    const double eps = 1e-4;
    CatalogEntry e;
    e.name = "l_shaped";
    e.description = "-Laplace u = 1 on the L-shape (-1,1)^2 minus (-1,0]^2, u + eps du/dn = 0";
    e.dim = 2;
    e.form_kind = FormKind::h1_penalty;
    e.has_exact = false;
    e.sizes = {128, 0, 128, 0, 1, InteriorRuleKind::gauss};
    e.schedules = detail::schedules_of(WidthSchedule::geometric(20, 2), ScaleSchedule::constant(1), {2e-2, 1.1},
                                       InitStrategy::box_init, 2e-2);
    e.build = [eps](const QuadratureSizes& q) {
      VariationalProblem p = l_shape_problem("l_shaped", eps, q.interior, q.boundary);
      add_density_load(p, [](const Eigen::VectorXd&) { return 1.0; });
      return p;
    };
    out.push_back(std::move(e));
  }
  {
    const double eps1 = 1e-4;
    const double eps2 = 1e-4;
    CatalogEntry e;
    e.name = "beam_1d";
    e.description = "u'''' = (2pi)^4 sin(2 pi x) on (0,1) with penalised clamped ends, eps1 = eps2 = 1e-4";
    e.form_kind = FormKind::h2_penalty;
    e.has_exact = true;
    e.sizes = {512, 0, 0, 0, 1000, InteriorRuleKind::gauss};
    e.schedules = detail::schedules_of(WidthSchedule::geometric(30, 2), ScaleSchedule::affine(1, 3), {2e-2, 1.1},
                                       InitStrategy::uniform_bias_1d, 3e-5);
    e.build = [eps1, eps2](const QuadratureSizes& q) {
      VariationalProblem p = interval_problem("beam_1d", FormKind::h2_penalty, eps1, eps2,
                                              interval_rule(q.interior_rule, q.interior, 0.0, 1.0),
                                              detail::interval_validation(q));
      const double c = std::pow(2.0 * pi, 4);
      add_density_load(p, [c](const Eigen::VectorXd& x) { return c * std::sin(2.0 * pi * x[0]); });
      p.exact = exact_1d([eps1, eps2](double x) { return exact::beam(x, eps1, eps2); });
      return p;
    };
    out.push_back(std::move(e));
  }
  {
    const double eps = 1e-5;
    CatalogEntry e;
    e.name = "beam_couple_1d";
    e.description = "beam on (0,1) loaded by a point couple L(v) = -v'(1/2), eps1 = eps2 = 1e-5";
    e.form_kind = FormKind::h2_penalty;
    e.has_exact = true;
    e.sizes = {1024, 0, 0, 0, 1000, InteriorRuleKind::gauss};
    e.schedules = detail::schedules_of(WidthSchedule::geometric(10, 2), ScaleSchedule::geometric(1, 3, 2),
                                       {1e-2, 1.4}, InitStrategy::uniform_bias_1d, 4e-3);
    e.build = [eps](const QuadratureSizes& q) {
      VariationalProblem p = interval_problem("beam_couple_1d", FormKind::h2_penalty, eps, eps,
                                              interval_rule(q.interior_rule, q.interior, 0.0, 1.0),
                                              detail::interval_validation(q));
      add_point_load(p, Eigen::VectorXd::Constant(1, 0.5), Quantity::grad_x, -1.0);
      p.exact = exact_1d(exact::beam_couple, false);
      return p;
    };
    out.push_back(std::move(e));
  }
  {
    const double eps = 1e-5;
    CatalogEntry e;
    e.name = "plate_point_load";
    e.description = "biharmonic plate on the unit disk with a unit point load at the centre, eps1 = eps2 = 1e-5";
    e.dim = 2;
    e.form_kind = FormKind::h2_penalty;
    e.has_exact = true;
    e.sizes = {100, 100, 256, 0, 1, InteriorRuleKind::gauss};
    e.schedules = detail::schedules_of(WidthSchedule::geometric(20, 2), ScaleSchedule::constant(1), {1e-2, 1.1},
                                       InitStrategy::box_init, 5e-3);
    e.build = [eps](const QuadratureSizes& q) {
      VariationalProblem p = disk_problem("plate_point_load", FormKind::h2_penalty, eps, eps, 1.0, q);
      add_point_load(p, Eigen::VectorXd::Zero(2), Quantity::value, 1.0);
      p.exact = ExactSolution{[eps](const Eigen::VectorXd& x) { return exact::plate(x, eps, eps); }, true};
      return p;
    };
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<std::string> catalog_names() {
  std::vector<std::string> names;
  for (const auto& e : catalog()) names.push_back(e.name);
  return names;
}

/// Catalog entry by name; the error message lists every valid name.
inline CatalogEntry find_problem(const std::string& name) {
  for (auto& e : catalog())
    if (e.name == name) return e;
  std::string msg = "unknown problem '" + name + "'; available:";
  for (const auto& n : catalog_names()) msg += " " + n;
  throw std::invalid_argument(msg);
}

/// Every catalog problem built with its default quadrature.
inline std::vector<VariationalProblem> problem_catalog() {
  std::vector<VariationalProblem> out;
  for (const auto& e : catalog()) {
    VariationalProblem p = e.build(e.sizes);
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace gnn
