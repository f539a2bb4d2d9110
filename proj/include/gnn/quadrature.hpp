#pragma once

// Quadrature rules for every inner product the method evaluates: Gauss-type
// rules on intervals, polar rules on disks, equispaced rules on circles and
// the composite rules of the L-shaped domain.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gnn {

enum class DomainTag { interval, circle_boundary, disk_interior, rectangle, polyline, point_set };

inline std::string to_string(DomainTag tag) {
  switch (tag) {
    case DomainTag::interval: return "interval";
    case DomainTag::circle_boundary: return "circle_boundary";
    case DomainTag::disk_interior: return "disk_interior";
    case DomainTag::rectangle: return "rectangle";
    case DomainTag::polyline: return "polyline";
    case DomainTag::point_set: return "point_set";
  }
  return "unknown";
}

/// Nodes (one row per node) and positive weights over a tagged domain.
///
/// `normals` is populated for boundary rules (unit outward normal per node)
/// and left empty otherwise. `lo`/`hi` record the parameter interval of
/// interval rules so that they can be remapped.
struct QuadratureRule {
  Eigen::MatrixXd nodes;
  Eigen::VectorXd weights;
  DomainTag tag = DomainTag::interval;
  Eigen::MatrixXd normals;
  double lo = -1.0;
  double hi = 1.0;

  [[nodiscard]] Eigen::Index size() const { return weights.size(); }
  [[nodiscard]] int dim() const { return static_cast<int>(nodes.cols()); }
  [[nodiscard]] double measure() const { return weights.sum(); }
  [[nodiscard]] bool has_normals() const { return normals.rows() == nodes.rows() && normals.size() > 0; }

  template <class F>
  [[nodiscard]] double integrate(F&& f) const {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < size(); ++k) {
      sum += weights[k] * f(nodes.row(k));
    }
    return sum;
  }
};

namespace detail {

// Legendre P_n and P_n' at x by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  // p1 = P_n, p0 = P_{n-1}
  const double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

inline void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace detail

/// n-point Gauss-Legendre rule on (-1,1). Nodes come from Newton iteration on
/// P_n started at the asymptotic guesses cos(pi (i - 1/4) / (n + 1/2)).
inline QuadratureRule gauss_legendre(int n) {
  detail::require(n >= 1, "gauss_legendre: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n, 1);
  rule.weights.resize(n);
  rule.tag = DomainTag::interval;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = detail::legendre_with_derivative(n, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    dp = detail::legendre_with_derivative(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // ascending order: negative root first
    rule.nodes(i, 0) = -x;
    rule.nodes(n - 1 - i, 0) = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes(n / 2, 0) = 0.0;
  return rule;
}

/// n-point Gauss-Lobatto rule on (-1,1); includes both endpoints.
inline QuadratureRule gauss_lobatto(int n) {
  detail::require(n >= 2, "gauss_lobatto: n must be >= 2");
  const int N = n - 1;  // interior nodes are the roots of P_N'
  QuadratureRule rule;
  rule.nodes.resize(n, 1);
  rule.weights.resize(n);
  rule.tag = DomainTag::interval;
  const double end_weight = 2.0 / (N * (N + 1.0));
  rule.nodes(0, 0) = -1.0;
  rule.nodes(n - 1, 0) = 1.0;
  rule.weights[0] = end_weight;
  rule.weights[n - 1] = end_weight;
  for (int i = 1; i <= (n - 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * i / N);
    // Newton on P_N'(x) with P_N'' = (2x P_N' - N(N+1) P_N) / (1 - x^2)
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = detail::legendre_with_derivative(N, x);
      const double ddp = (2.0 * x * dp - N * (N + 1.0) * p) / (1.0 - x * x);
      const double dx = dp / ddp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double p = detail::legendre_with_derivative(N, x).first;
    const double w = end_weight / (p * p);
    rule.nodes(i, 0) = -x;
    rule.nodes(n - 1 - i, 0) = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    const double p = detail::legendre_with_derivative(N, 0.0).first;
    rule.nodes(n / 2, 0) = 0.0;
    rule.weights[n / 2] = end_weight / (p * p);
  }
  return rule;
}

/// Left Riemann sum on (a,b): nodes a + k h, weights h = (b - a)/n.
inline QuadratureRule riemann_left(int n, double a, double b) {
  detail::require(n >= 1, "riemann_left: n must be >= 1");
  detail::require(a < b, "riemann_left: requires a < b");
  QuadratureRule rule;
  const double h = (b - a) / n;
  rule.nodes.resize(n, 1);
  rule.weights = Eigen::VectorXd::Constant(n, h);
  for (int k = 0; k < n; ++k) rule.nodes(k, 0) = a + k * h;
  rule.tag = DomainTag::interval;
  rule.lo = a;
  rule.hi = b;
  return rule;
}

/// Affine image of an interval rule onto (a,b).
inline QuadratureRule map_to_interval(const QuadratureRule& rule, double a, double b) {
  detail::require(rule.tag == DomainTag::interval && rule.dim() == 1,
                  "map_to_interval: rule must be a 1-D interval rule");
  detail::require(a < b, "map_to_interval: requires a < b");
  QuadratureRule out = rule;
  const double scale = (b - a) / (rule.hi - rule.lo);
  out.nodes = ((rule.nodes.array() - rule.lo) * scale + a).matrix();
  out.weights = rule.weights * scale;
  out.lo = a;
  out.hi = b;
  return out;
}

/// Cartesian product of two interval rules; x varies slowest.
inline QuadratureRule tensor_rectangle(const QuadratureRule& rx, const QuadratureRule& ry) {
  detail::require(rx.tag == DomainTag::interval && ry.tag == DomainTag::interval,
                  "tensor_rectangle: both factors must be interval rules");
  const Eigen::Index nx = rx.size();
  const Eigen::Index ny = ry.size();
  QuadratureRule rule;
  rule.nodes.resize(nx * ny, 2);
  rule.weights.resize(nx * ny);
  rule.tag = DomainTag::rectangle;
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      const Eigen::Index k = i * ny + j;
      rule.nodes(k, 0) = rx.nodes(i, 0);
      rule.nodes(k, 1) = ry.nodes(j, 0);
      rule.weights[k] = rx.weights[i] * ry.weights[j];
    }
  }
  return rule;
}

/// Concatenation of rules over disjoint pieces of one domain.
inline QuadratureRule concatenate(const std::vector<QuadratureRule>& parts, DomainTag tag) {
  detail::require(!parts.empty(), "concatenate: no parts");
  Eigen::Index total = 0;
  const int d = parts.front().dim();
  bool normals = true;
  for (const auto& p : parts) {
    detail::require(p.dim() == d, "concatenate: dimension mismatch");
    total += p.size();
    normals = normals && p.has_normals();
  }
  QuadratureRule rule;
  rule.tag = tag;
  rule.nodes.resize(total, d);
  rule.weights.resize(total);
  if (normals) rule.normals.resize(total, d);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    rule.nodes.middleRows(off, p.size()) = p.nodes;
    rule.weights.segment(off, p.size()) = p.weights;
    if (normals) rule.normals.middleRows(off, p.size()) = p.normals;
    off += p.size();
  }
  return rule;
}

/// Composite Gauss-Legendre rule on (0, R) with breakpoints; the n nodes are
/// shared among the pieces in proportion to their lengths (at least one each).
inline QuadratureRule composite_radial(int n, double R, std::vector<double> breaks) {
  std::sort(breaks.begin(), breaks.end());
  std::vector<double> edges{0.0};
  for (double b : breaks) {
    detail::require(b > 0.0 && b < R, "radial breakpoints must lie inside (0, R)");
    if (b > edges.back()) edges.push_back(b);
  }
  edges.push_back(R);
  const int pieces = static_cast<int>(edges.size()) - 1;
  detail::require(n >= pieces, "composite_radial: fewer nodes than pieces");
  std::vector<QuadratureRule> parts;
  int used = 0;
  for (int k = 0; k < pieces; ++k) {
    const double len = edges[k + 1] - edges[k];
    int m = k + 1 == pieces ? n - used : std::max(1, static_cast<int>(std::lround(n * len / R)));
    m = std::min(m, n - used - (pieces - k - 1));
    used += m;
    parts.push_back(map_to_interval(gauss_legendre(m), edges[k], edges[k + 1]));
  }
  QuadratureRule rule = concatenate(parts, DomainTag::interval);
  rule.lo = 0.0;
  rule.hi = R;
  return rule;
}

/// Polar tensor rule on the disk of radius R centred at the origin:
/// Gauss-Legendre in r on (0,R) times the periodic trapezoid rule in angle,
/// with the Jacobian r folded into the weights. Optional radial breakpoints
/// make the radial rule composite (for data with a kink on a circle).
inline QuadratureRule disk_interior(int n_r, int n_t, double R, const std::vector<double>& radial_breaks = {}) {
  detail::require(n_r >= 1 && n_t >= 1, "disk_interior: node counts must be >= 1");
  detail::require(R > 0.0, "disk_interior: radius must be positive");
  const QuadratureRule radial =
      radial_breaks.empty() ? map_to_interval(gauss_legendre(n_r), 0.0, R) : composite_radial(n_r, R, radial_breaks);
  QuadratureRule rule;
  rule.nodes.resize(static_cast<Eigen::Index>(n_r) * n_t, 2);
  rule.weights.resize(static_cast<Eigen::Index>(n_r) * n_t);
  rule.tag = DomainTag::disk_interior;
  const double dtheta = 2.0 * std::numbers::pi / n_t;
  for (int i = 0; i < n_r; ++i) {
    const double r = radial.nodes(i, 0);
    for (int k = 0; k < n_t; ++k) {
      const Eigen::Index idx = static_cast<Eigen::Index>(i) * n_t + k;
      const double theta = k * dtheta;
      rule.nodes(idx, 0) = r * std::cos(theta);
      rule.nodes(idx, 1) = r * std::sin(theta);
      rule.weights[idx] = radial.weights[i] * r * dtheta;
    }
  }
  return rule;
}

/// n equispaced nodes on the circle of radius R, each weighted 2 pi R / n.
inline QuadratureRule circle_boundary(int n, double R) {
  detail::require(n >= 1, "circle_boundary: n must be >= 1");
  detail::require(R > 0.0, "circle_boundary: radius must be positive");
  QuadratureRule rule;
  rule.nodes.resize(n, 2);
  rule.normals.resize(n, 2);
  rule.weights = Eigen::VectorXd::Constant(n, 2.0 * std::numbers::pi * R / n);
  rule.tag = DomainTag::circle_boundary;
  for (int k = 0; k < n; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / n;
    rule.normals(k, 0) = std::cos(theta);
    rule.normals(k, 1) = std::sin(theta);
    rule.nodes(k, 0) = R * std::cos(theta);
    rule.nodes(k, 1) = R * std::sin(theta);
  }
  return rule;
}

/// Unit-weight rule at explicit points (point functionals, 1-D boundaries).
inline QuadratureRule point_set(const Eigen::MatrixXd& points, const Eigen::MatrixXd& normals = {}) {
  QuadratureRule rule;
  rule.nodes = points;
  rule.weights = Eigen::VectorXd::Ones(points.rows());
  rule.normals = normals;
  rule.tag = DomainTag::point_set;
  return rule;
}

namespace detail {

// Rule along the straight edge from p to q built from a (-1,1) rule.
inline QuadratureRule edge_rule(const QuadratureRule& ref, Eigen::Vector2d p, Eigen::Vector2d q,
                                Eigen::Vector2d outward) {
  const QuadratureRule unit = map_to_interval(ref, 0.0, 1.0);
  const double len = (q - p).norm();
  QuadratureRule rule;
  rule.tag = DomainTag::polyline;
  rule.nodes.resize(unit.size(), 2);
  rule.normals.resize(unit.size(), 2);
  rule.weights = unit.weights * len;
  for (Eigen::Index k = 0; k < unit.size(); ++k) {
    const double t = unit.nodes(k, 0);
    rule.nodes.row(k) = ((1.0 - t) * p + t * q).transpose();
    rule.normals.row(k) = outward.transpose();
  }
  return rule;
}

}  // namespace detail

struct LShapedRules {
  QuadratureRule interior;
  QuadratureRule boundary;
};

/// Rules for (-1,1)^2 minus (-1,0]^2. The interior is three unit squares with
/// an n x n tensor Gauss-Legendre rule each. The boundary is eight unit edges.
/// The two re-entrant edges meeting at the origin use Gauss-Lobatto and the
/// rest use Gauss-Legendre.
inline LShapedRules l_shaped_rules(int n_per_square, int n_edge) {
  detail::require(n_per_square >= 2 && n_edge >= 2, "l_shaped_rules: node counts must be >= 2");
  const QuadratureRule gl = gauss_legendre(n_per_square);
  const auto square = [&](double x0, double y0) {
    return tensor_rectangle(map_to_interval(gl, x0, x0 + 1.0), map_to_interval(gl, y0, y0 + 1.0));
  };
  LShapedRules out;
  out.interior = concatenate({square(0.0, -1.0), square(-1.0, 0.0), square(0.0, 0.0)}, DomainTag::rectangle);

  const QuadratureRule edge_gl = gauss_legendre(n_edge);
  const QuadratureRule edge_lob = gauss_lobatto(n_edge);
  using V = Eigen::Vector2d;
  std::vector<QuadratureRule> edges;
  // outer boundary, counter-clockwise from (0,-1)
  edges.push_back(detail::edge_rule(edge_gl, V(0, -1), V(1, -1), V(0, -1)));
  edges.push_back(detail::edge_rule(edge_gl, V(1, -1), V(1, 0), V(1, 0)));
  edges.push_back(detail::edge_rule(edge_gl, V(1, 0), V(1, 1), V(1, 0)));
  edges.push_back(detail::edge_rule(edge_gl, V(1, 1), V(0, 1), V(0, 1)));
  edges.push_back(detail::edge_rule(edge_gl, V(0, 1), V(-1, 1), V(0, 1)));
  edges.push_back(detail::edge_rule(edge_gl, V(-1, 1), V(-1, 0), V(-1, 0)));
  // re-entrant edges
  edges.push_back(detail::edge_rule(edge_lob, V(-1, 0), V(0, 0), V(0, -1)));
  edges.push_back(detail::edge_rule(edge_lob, V(0, 0), V(0, -1), V(-1, 0)));
  out.boundary = concatenate(edges, DomainTag::polyline);
  return out;
}

/// CSV dump with header x[,y],w.
inline void write_csv(std::ostream& os, const QuadratureRule& rule) {
  const auto old_precision = os.precision(17);
  os << (rule.dim() == 2 ? "x,y,w\n" : "x,w\n");
  for (Eigen::Index k = 0; k < rule.size(); ++k) {
    for (int a = 0; a < rule.dim(); ++a) os << rule.nodes(k, a) << ',';
    os << rule.weights[k] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace gnn
