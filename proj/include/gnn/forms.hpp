#pragma once

// Symmetric coercive variational problems a(u, v) = L(v), expressed as sums of
// weighted quadrature products of pointwise quantities (value, gradient
// components, v'', Laplacian, normal derivative) over a list of sites.

#include "gnn/domain.hpp"
#include "gnn/network.hpp"
#include "gnn/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnn {

enum class Quantity { value, grad_x, grad_y, second_1d, laplacian, normal_derivative };

inline int quantity_order(Quantity q) {
  switch (q) {
    case Quantity::value: return 0;
    case Quantity::grad_x:
    case Quantity::grad_y:
    case Quantity::normal_derivative: return 1;
    case Quantity::second_1d:
    case Quantity::laplacian: return 2;
  }
  return 0;
}

enum class FormKind { l2_fit, h1_penalty, h2_penalty };
enum class LoadKind { density, line_source, point_value, point_derivative };

inline std::string to_string(FormKind k) {
  switch (k) {
    case FormKind::l2_fit: return "l2_fit";
    case FormKind::h1_penalty: return "h1_penalty";
    case FormKind::h2_penalty: return "h2_penalty";
  }
  return "unknown";
}

inline std::string to_string(LoadKind k) {
  switch (k) {
    case LoadKind::density: return "density";
    case LoadKind::line_source: return "line_source";
    case LoadKind::point_value: return "point_value";
    case LoadKind::point_derivative: return "point_derivative";
  }
  return "unknown";
}

inline int derivative_order(FormKind k) {
  switch (k) {
    case FormKind::l2_fit: return 0;
    case FormKind::h1_penalty: return 1;
    case FormKind::h2_penalty: return 2;
  }
  return 0;
}

/// Pointwise quantity q of a sampled field at the nodes of `rule`.
inline Eigen::VectorXd extract(const FieldSample& s, Quantity q, const QuadratureRule& rule) {
  if (s.order < quantity_order(q)) throw std::invalid_argument("sample lacks the derivative order this form needs");
  switch (q) {
    case Quantity::value: return s.values;
    case Quantity::grad_x: return s.gradient.col(0);
    case Quantity::grad_y: return s.gradient.col(1);
    case Quantity::second_1d: return s.second.col(0);
    case Quantity::laplacian: return s.laplacian();
    case Quantity::normal_derivative:
      if (!rule.has_normals()) throw std::invalid_argument("normal derivative requested on a rule without normals");
      return s.gradient.cwiseProduct(rule.normals).rowwise().sum();
  }
  return {};
}

/// coef * sum_k w_k Q(u)_k Q(v)_k over one site.
struct FormTerm {
  std::size_t site = 0;
  Quantity quantity = Quantity::value;
  double coef = 1.0;
};

/// coef * sum_k w_k g_k Q(v)_k over one site; g defaults to 1.
struct LoadTerm {
  std::size_t site = 0;
  Quantity quantity = Quantity::value;
  double coef = 1.0;
  Eigen::VectorXd data;
};

struct Site {
  std::string name;
  QuadratureRule rule;
};

/// Value, gradient and distinct second derivatives of a closed-form function at a point.
struct PointJet {
  double value = 0.0;
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  Eigen::Vector3d second = Eigen::Vector3d::Zero();  // xx, xy, yy (1-D uses xx only)
};

struct ExactSolution {
  std::function<PointJet(const Eigen::VectorXd&)> eval;
  /// False when the closed form solves a limiting problem rather than this
  /// penalised one (its weak residual is then not expected to vanish).
  bool solves_discrete_form = true;
};

/// Samples of one field on every site of a problem.
using Bundle = std::vector<FieldSample>;

struct VariationalProblem {
  std::string name;
  Domain domain;
  FormKind form_kind = FormKind::l2_fit;
  LoadKind load_kind = LoadKind::density;
  double eps = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  std::vector<Site> sites;
  /// Same layout as `sites` with the interior replaced by the validation rule.
  std::vector<Site> validation_sites;
  std::vector<FormTerm> bilinear_terms;
  std::vector<LoadTerm> load_terms;
  std::optional<ExactSolution> exact;
  std::function<double(const Eigen::VectorXd&)> density;

  [[nodiscard]] int dim() const { return domain.dim(); }
  [[nodiscard]] int derivative_order_required() const { return derivative_order(form_kind); }

  /// Highest derivative order any term reads on site s.
  [[nodiscard]] int site_order(std::size_t s) const {
    int order = 0;
    for (const auto& t : bilinear_terms)
      if (t.site == s) order = std::max(order, quantity_order(t.quantity));
    for (const auto& t : load_terms)
      if (t.site == s) order = std::max(order, quantity_order(t.quantity));
    return order;
  }

  void validate() const {
    if (sites.empty()) throw std::invalid_argument("problem '" + name + "' has no sites");
    if (validation_sites.size() != sites.size()) throw std::invalid_argument("validation sites do not mirror sites");
    for (const auto& t : bilinear_terms) {
      if (t.site >= sites.size()) throw std::invalid_argument("bilinear term refers to a missing site");
      if (!(t.coef > 0.0)) throw std::invalid_argument("penalty and form coefficients must be positive");
      if (quantity_order(t.quantity) > derivative_order_required())
        throw std::invalid_argument("bilinear term exceeds the form's derivative order");
    }
    for (const auto& t : load_terms) {
      if (t.site >= sites.size()) throw std::invalid_argument("load term refers to a missing site");
      if (t.data.size() != 0 && t.data.size() != sites[t.site].rule.size())
        throw std::invalid_argument("load data length does not match its site");
    }
    for (const auto& s : sites)
      if (s.rule.dim() != dim()) throw std::invalid_argument("site dimension does not match the domain");
  }
};

namespace detail {

inline void check_bundle(const std::vector<Site>& sites, const Bundle& b, const char* what) {
  if (b.size() != sites.size()) throw std::invalid_argument(std::string(what) + ": bundle does not cover every site");
  for (std::size_t s = 0; s < sites.size(); ++s) {
    if (b[s].rows() != sites[s].rule.size())
      throw std::invalid_argument(std::string(what) + ": sample rows do not match rule '" + sites[s].name + "'");
  }
}

inline double bilinear_on(const std::vector<FormTerm>& terms, const std::vector<Site>& sites, const Bundle& u,
                          const Bundle& v) {
  check_bundle(sites, u, "bilinear");
  check_bundle(sites, v, "bilinear");
  double sum = 0.0;
  for (const auto& t : terms) {
    const auto& rule = sites[t.site].rule;
    const Eigen::VectorXd qu = extract(u[t.site], t.quantity, rule);
    const Eigen::VectorXd qv = extract(v[t.site], t.quantity, rule);
    sum += t.coef * (rule.weights.array() * qu.array() * qv.array()).sum();
  }
  return sum;
}

}  // namespace detail

/// Quadrature approximation of a(u, v).
inline double bilinear(const VariationalProblem& p, const Bundle& u, const Bundle& v) {
  return detail::bilinear_on(p.bilinear_terms, p.sites, u, v);
}

/// Quadrature (or exact point) evaluation of L(v).
inline double load(const VariationalProblem& p, const Bundle& v) {
  detail::check_bundle(p.sites, v, "load");
  double sum = 0.0;
  for (const auto& t : p.load_terms) {
    const auto& rule = p.sites[t.site].rule;
    const Eigen::VectorXd qv = extract(v[t.site], t.quantity, rule);
    Eigen::ArrayXd w = rule.weights.array();
    if (t.data.size() != 0) w *= t.data.array();
    sum += t.coef * (w * qv.array()).sum();
  }
  return sum;
}

/// <r(u_prev), v> = L(v) - a(u_prev, v)
inline double residual(const VariationalProblem& p, const Bundle& u_prev, const Bundle& v) {
  return load(p, v) - bilinear(p, u_prev, v);
}

struct EnergyValue {
  double value = 0.0;
};

/// sqrt(a(v, v)); a(v, v) below -1e-12 means the form or rule is broken.
inline EnergyValue energy_norm(const VariationalProblem& p, const Bundle& v) {
  const double a = bilinear(p, v, v);
  if (a < -1e-12) throw std::runtime_error("energy_norm: a(v,v) < 0, form is not positive on samples");
  return {std::sqrt(std::max(a, 0.0))};
}

/// sqrt(sum w v^2) on the interior site (site 0).
inline double l2_norm(const VariationalProblem& p, const Bundle& v, bool validation = false) {
  const auto& rule = (validation ? p.validation_sites : p.sites).front().rule;
  return std::sqrt((rule.weights.array() * v.front().values.array().square()).sum());
}

inline FieldSample sample_exact(const ExactSolution& exact, const QuadratureRule& rule, int order) {
  const int d = rule.dim();
  FieldSample s = FieldSample::zeros(rule.size(), d, order);
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    const PointJet j = exact.eval(rule.nodes.row(k).transpose());
    s.values[k] = j.value;
    if (order >= 1)
      for (int a = 0; a < d; ++a) s.gradient(k, a) = j.grad[a];
    if (order >= 2) {
      if (d == 1) {
        s.second(k, 0) = j.second[0];
      } else {
        s.second.row(k) = j.second.transpose();
      }
    }
  }
  return s;
}

/// Samples of a network on every training (or validation) site at the order each site needs.
inline Bundle sample(const VariationalProblem& p, const ShallowNetwork& net, bool validation = false) {
  const auto& sites = validation ? p.validation_sites : p.sites;
  Bundle b;
  b.reserve(sites.size());
  for (std::size_t s = 0; s < sites.size(); ++s) b.push_back(eval_stack(net, sites[s].rule.nodes, p.site_order(s)));
  return b;
}

inline Bundle sample_exact(const VariationalProblem& p, bool validation = false) {
  if (!p.exact) throw std::invalid_argument("problem '" + p.name + "' has no exact solution");
  const auto& sites = validation ? p.validation_sites : p.sites;
  Bundle b;
  b.reserve(sites.size());
  for (std::size_t s = 0; s < sites.size(); ++s) b.push_back(sample_exact(*p.exact, sites[s].rule, p.site_order(s)));
  return b;
}

inline Bundle zero_bundle(const VariationalProblem& p, bool validation = false) {
  const auto& sites = validation ? p.validation_sites : p.sites;
  Bundle b;
  for (std::size_t s = 0; s < sites.size(); ++s)
    b.push_back(FieldSample::zeros(sites[s].rule.size(), p.dim(), p.site_order(s)));
  return b;
}

struct ExactErrors {
  double l2 = 0.0;
  double energy = 0.0;
};

/// L2 and energy-norm errors of a numerical solution sampled on the validation sites.
inline ExactErrors exact_error(const VariationalProblem& p, const Bundle& u_num) {
  if (!p.exact) throw std::invalid_argument("problem '" + p.name + "' has no exact solution");
  const Bundle u = sample_exact(p, true);
  Bundle e;
  for (std::size_t s = 0; s < u.size(); ++s) e.push_back(u[s] - u_num.at(s));
  ExactErrors out;
  out.l2 = l2_norm(p, e, true);
  out.energy = std::sqrt(std::max(0.0, detail::bilinear_on(p.bilinear_terms, p.validation_sites, e, e)));
  return out;
}

}  // namespace gnn
