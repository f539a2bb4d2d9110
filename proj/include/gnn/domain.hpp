#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace gnn {

/// Geometry of the supported domains: an interval, a disk centred at the
/// origin, or the L-shape (-1,1)^2 minus (-1,0]^2.
struct Domain {
  enum class Kind { interval, disk, l_shape };

  Kind kind = Kind::interval;
  double lo = 0.0;  // interval endpoints
  double hi = 1.0;
  double radius = 1.0;  // disk

  static Domain interval(double a, double b) { return {Kind::interval, a, b, 0.0}; }
  static Domain disk(double r) { return {Kind::disk, 0.0, 0.0, r}; }
  static Domain l_shape() { return {Kind::l_shape, -1.0, 1.0, 0.0}; }

  [[nodiscard]] int dim() const { return kind == Kind::interval ? 1 : 2; }

  /// Closed-domain membership with a small absolute slack.
  [[nodiscard]] bool contains(const Eigen::VectorXd& x, double slack = 1e-12) const {
    switch (kind) {
      case Kind::interval: return x.size() == 1 && x[0] >= lo - slack && x[0] <= hi + slack;
      case Kind::disk: return x.size() == 2 && x.norm() <= radius + slack;
      case Kind::l_shape:
        if (x.size() != 2) return false;
        if (std::abs(x[0]) > 1.0 + slack || std::abs(x[1]) > 1.0 + slack) return false;
        return !(x[0] < -slack && x[1] < -slack);
    }
    return false;
  }

  /// Axis-aligned bounding box as (lower corner, upper corner).
  [[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box() const {
    switch (kind) {
      case Kind::interval: return {Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi)};
      case Kind::disk: return {Eigen::VectorXd::Constant(2, -radius), Eigen::VectorXd::Constant(2, radius)};
      case Kind::l_shape: return {Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0)};
    }
    return {};
  }

  /// Range of x . dir over the domain for a unit direction.
  [[nodiscard]] std::pair<double, double> projection_range(const Eigen::VectorXd& dir) const {
    if (kind == Kind::disk) return {-radius * dir.norm(), radius * dir.norm()};
    const auto [a, b] = bounding_box();
    double mn = 0.0;
    double mx = 0.0;
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
      mn += std::min(a[i] * dir[i], b[i] * dir[i]);
      mx += std::max(a[i] * dir[i], b[i] * dir[i]);
    }
    return {mn, mx};
  }

  [[nodiscard]] std::string describe() const {
    switch (kind) {
      case Kind::interval: return "interval";
      case Kind::disk: return "disk";
      case Kind::l_shape: return "l_shape";
    }
    return "unknown";
  }
};

}  // namespace gnn
