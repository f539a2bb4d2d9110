#pragma once

// Single-hidden-layer networks v(x) = sum_j c_j sigma(beta (x . W_j + b_j)),
// their spatial derivatives through second order, and parameter derivatives.

#include "gnn/domain.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnn {

enum class ActivationBase { tanh, relu };

inline std::string to_string(ActivationBase base) { return base == ActivationBase::tanh ? "tanh" : "relu"; }

inline ActivationBase parse_activation_base(const std::string& s) {
  if (s == "tanh") return ActivationBase::tanh;
  if (s == "relu") return ActivationBase::relu;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

/// sigma_beta(t) = sigma(beta t).
struct Activation {
  ActivationBase base = ActivationBase::tanh;
  double scale = 1.0;

  [[nodiscard]] int max_order() const { return base == ActivationBase::tanh ? 3 : 1; }

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("activation scale must be positive");
  }

  /// m-th derivative of t -> sigma(beta t) at a scalar t.
  [[nodiscard]] double derivative(int m, double t) const {
    if (m > max_order()) throw std::invalid_argument("activation derivative order not supported");
    const double z = scale * t;
    if (base == ActivationBase::relu) {
      if (m == 0) return z > 0.0 ? z : 0.0;
      return z > 0.0 ? scale : 0.0;
    }
    const double e = std::exp(-2.0 * std::abs(z));
    const double th = std::copysign((1.0 - e) / (1.0 + e), z);
    const double s = 4.0 * e / ((1.0 + e) * (1.0 + e));
    switch (m) {
      case 0: return th;
      case 1: return scale * s;
      case 2: return -2.0 * scale * scale * th * s;
      default: return scale * scale * scale * s * (6.0 * th * th - 2.0);
    }
  }
};

/// Derivatives S_0..S_order of t -> sigma(beta t), applied elementwise to the
/// pre-activation matrix T = X W + 1 b^T.
///
/// tanh is evaluated through e = exp(-2 beta |t|): tanh = sign(t)(1-e)/(1+e) and
/// 1 - tanh^2 = 4e/(1+e)^2, so every derivative decays without cancellation.
inline std::array<Eigen::MatrixXd, 4> activation_jet(const Activation& act, const Eigen::MatrixXd& T, int order) {
  if (order > act.max_order()) throw std::invalid_argument("activation derivative order not supported");
  std::array<Eigen::MatrixXd, 4> S;
  const double beta = act.scale;
  if (act.base == ActivationBase::relu) {
    S[0] = (beta * T.array()).max(0.0).matrix();
    if (order >= 1) S[1] = ((T.array() > 0.0).cast<double>() * beta).matrix();
    return S;
  }
  const Eigen::ArrayXXd e = (-2.0 * beta * T.array().abs()).exp();
  const Eigen::ArrayXXd th = (1.0 - e) / (1.0 + e) * T.array().sign();
  S[0] = th.matrix();
  if (order >= 1) {
    const Eigen::ArrayXXd s = 4.0 * e / (1.0 + e).square();
    S[1] = (beta * s).matrix();
    if (order >= 2) S[2] = (-2.0 * beta * beta * th * s).matrix();
    if (order >= 3) S[3] = (beta * beta * beta * s * (6.0 * th.square() - 2.0)).matrix();
  }
  return S;
}

/// Number of distinct second derivatives in dimension d: 1 (xx) or 3 (xx, xy, yy).
inline int second_count(int d) { return d * (d + 1) / 2; }

/// Index pair (a, b) of the k-th distinct second derivative.
inline std::pair<int, int> second_pair(int d, int k) {
  if (d == 1) return {0, 0};
  static constexpr std::array<std::pair<int, int>, 3> pairs{{{0, 0}, {0, 1}, {1, 1}}};
  return pairs[static_cast<std::size_t>(k)];
}

/// Values and spatial derivatives of a function at the nodes of a rule.
struct FieldSample {
  Eigen::VectorXd values;
  Eigen::MatrixXd gradient;  // n_G x d
  Eigen::MatrixXd second;    // n_G x d(d+1)/2, ordered xx[, xy, yy]
  int order = 0;

  static FieldSample zeros(Eigen::Index rows, int d, int order) {
    FieldSample s;
    s.order = order;
    s.values = Eigen::VectorXd::Zero(rows);
    if (order >= 1) s.gradient = Eigen::MatrixXd::Zero(rows, d);
    if (order >= 2) s.second = Eigen::MatrixXd::Zero(rows, second_count(d));
    return s;
  }

  [[nodiscard]] Eigen::Index rows() const { return values.size(); }

  [[nodiscard]] Eigen::VectorXd laplacian() const {
    if (order < 2) throw std::invalid_argument("FieldSample: Laplacian needs second derivatives");
    if (second.cols() == 1) return second.col(0);
    return second.col(0) + second.col(2);
  }

  /// this += s * other, over the blocks both samples carry.
  void axpy(double s, const FieldSample& other) {
    values += s * other.values;
    if (order >= 1) gradient += s * other.gradient;
    if (order >= 2) second += s * other.second;
  }
};

inline FieldSample operator-(const FieldSample& a, const FieldSample& b) {
  FieldSample out = a;
  out.order = std::min(a.order, b.order);
  out.axpy(-1.0, b);
  return out;
}

/// A shallow network with parameters (W, b, c): W is d x n (column j is the
/// weight vector of unit j), b and c have length n.
struct ShallowNetwork {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Activation activation;

  [[nodiscard]] int dim() const { return static_cast<int>(W.rows()); }
  [[nodiscard]] Eigen::Index width() const { return W.cols(); }

  void validate() const {
    if (W.cols() != b.size() || W.cols() != c.size()) throw std::invalid_argument("network: W, b, c widths differ");
    if (W.rows() < 1 || W.rows() > 2) throw std::invalid_argument("network: dimension must be 1 or 2");
    activation.validate();
  }

  [[nodiscard]] bool finite() const { return W.allFinite() && b.allFinite() && c.allFinite(); }

  /// max|W_ij| + max|b_j| + max|c_j|
  [[nodiscard]] double param_norm() const {
    if (width() == 0) return 0.0;
    return W.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff() + c.cwiseAbs().maxCoeff();
  }
};

/// Pre-activations T = X W + 1 b^T for nodes X (n_G x d).
inline Eigen::MatrixXd preactivation(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Eigen::MatrixXd& X) {
  if (X.cols() != W.rows()) throw std::invalid_argument("points dimension does not match network dimension");
  Eigen::MatrixXd T = X * W;
  T.rowwise() += b.transpose();
  return T;
}

inline void check_order(const Activation& act, int order) {
  if (order < 0 || order > 2) throw std::invalid_argument("derivative order must be 0, 1 or 2");
  if (order > act.max_order()) throw std::invalid_argument("derivative order not supported by activation");
}

/// Values and spatial derivatives up to `order` at the rows of `points`.
inline FieldSample eval_stack(const ShallowNetwork& net, const Eigen::MatrixXd& points, int order) {
  net.validate();
  check_order(net.activation, order);
  const int d = net.dim();
  const auto S = activation_jet(net.activation, preactivation(net.W, net.b, points), order);
  FieldSample out;
  out.order = order;
  out.values = S[0] * net.c;
  if (order >= 1) {
    out.gradient.resize(points.rows(), d);
    for (int a = 0; a < d; ++a) {
      out.gradient.col(a) = S[1] * net.c.cwiseProduct(net.W.row(a).transpose());
    }
  }
  if (order >= 2) {
    out.second.resize(points.rows(), second_count(d));
    for (int k = 0; k < second_count(d); ++k) {
      const auto [a, bb] = second_pair(d, k);
      const Eigen::VectorXd coeff = net.c.cwiseProduct(net.W.row(a).transpose()).cwiseProduct(net.W.row(bb).transpose());
      out.second.col(k) = S[2] * coeff;
    }
  }
  return out;
}

/// d/dp of the FieldSample for every hidden parameter p, with c held fixed.
/// `dW[e * n + j]` is the derivative with respect to W(e, j); `db[j]` with
/// respect to b(j).
struct ParamGradients {
  std::vector<FieldSample> dW;
  std::vector<FieldSample> db;
};

inline ParamGradients param_gradient_stack(const ShallowNetwork& net, const Eigen::MatrixXd& points, int order) {
  net.validate();
  if (order < 0 || order > 2) throw std::invalid_argument("derivative order must be 0, 1 or 2");
  if (order + 1 > net.activation.max_order()) {
    throw std::invalid_argument("parameter gradients of this order need a smoother activation");
  }
  const int d = net.dim();
  const Eigen::Index n = net.width();
  const Eigen::Index rows = points.rows();
  const auto S = activation_jet(net.activation, preactivation(net.W, net.b, points), order + 1);
  ParamGradients out;
  out.db.reserve(static_cast<std::size_t>(n));
  out.dW.resize(static_cast<std::size_t>(d * n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double cj = net.c[j];
    const Eigen::VectorXd Wj = net.W.col(j);
    FieldSample g = FieldSample::zeros(rows, d, order);
    g.values = cj * S[1].col(j);
    if (order >= 1) {
      for (int a = 0; a < d; ++a) g.gradient.col(a) = cj * Wj[a] * S[2].col(j);
    }
    if (order >= 2) {
      for (int k = 0; k < second_count(d); ++k) {
        const auto [a, bb] = second_pair(d, k);
        g.second.col(k) = cj * Wj[a] * Wj[bb] * S[3].col(j);
      }
    }
    out.db.push_back(std::move(g));

    for (int e = 0; e < d; ++e) {
      const Eigen::VectorXd xe = points.col(e);
      FieldSample h = FieldSample::zeros(rows, d, order);
      h.values = cj * S[1].col(j).cwiseProduct(xe);
      if (order >= 1) {
        for (int a = 0; a < d; ++a) {
          h.gradient.col(a) = cj * Wj[a] * S[2].col(j).cwiseProduct(xe);
          if (a == e) h.gradient.col(a) += cj * S[1].col(j);
        }
      }
      if (order >= 2) {
        for (int k = 0; k < second_count(d); ++k) {
          const auto [a, bb] = second_pair(d, k);
          h.second.col(k) = cj * Wj[a] * Wj[bb] * S[3].col(j).cwiseProduct(xe);
          const double lin = (a == e ? Wj[bb] : 0.0) + (bb == e ? Wj[a] : 0.0);
          if (lin != 0.0) h.second.col(k) += cj * lin * S[2].col(j);
        }
      }
      out.dW[static_cast<std::size_t>(e * n + j)] = std::move(h);
    }
  }
  return out;
}

/// Copy of `net` with output coefficients s * c.
inline ShallowNetwork scale_output(ShallowNetwork net, double s) {
  if (!std::isfinite(s)) throw std::invalid_argument("scale_output: factor must be finite");
  net.c *= s;
  return net;
}

enum class InitStrategy { uniform_bias_1d, axis_diagonal_2d, box_init };

inline std::string to_string(InitStrategy s) {
  switch (s) {
    case InitStrategy::uniform_bias_1d: return "uniform_bias_1d";
    case InitStrategy::axis_diagonal_2d: return "axis_diagonal_2d";
    case InitStrategy::box_init: return "box_init";
  }
  return "unknown";
}

inline InitStrategy parse_init_strategy(const std::string& s) {
  if (s == "uniform_bias_1d") return InitStrategy::uniform_bias_1d;
  if (s == "axis_diagonal_2d") return InitStrategy::axis_diagonal_2d;
  if (s == "box_init") return InitStrategy::box_init;
  throw std::invalid_argument("unknown init strategy '" + s + "'");
}

struct HiddenParams {
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

/// Initial hidden parameters.
///
///  - uniform_bias_1d: W_j = 1, b_j = -(lo + j h), h = (hi - lo)/n, so the
///    breakpoints sit at lo + h, ..., hi.
///  - axis_diagonal_2d: unit j takes direction family j mod 4 out of
///    (1,0), (0,1), (1,1)/sqrt2, (1,-1)/sqrt2; within a family the offsets are
///    spaced uniformly over the domain's extent along that direction.
///  - box_init: direction uniform on the unit sphere, a point p uniform in the
///    bounding box, b = -p . W, so every hyperplane meets the box.
inline HiddenParams init_hidden(InitStrategy strategy, Eigen::Index n, int d, std::uint64_t seed, const Domain& domain) {
  if (n < 1) throw std::invalid_argument("init_hidden: width must be >= 1");
  if (d != domain.dim()) throw std::invalid_argument("init_hidden: dimension does not match domain");
  HiddenParams p{Eigen::MatrixXd(d, n), Eigen::VectorXd(n)};
  switch (strategy) {
    case InitStrategy::uniform_bias_1d: {
      if (d != 1) throw std::invalid_argument("uniform_bias_1d requires d = 1");
      const auto [lo, hi] = domain.bounding_box();
      const double h = (hi[0] - lo[0]) / static_cast<double>(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        p.W(0, j) = 1.0;
        p.b[j] = -(lo[0] + static_cast<double>(j + 1) * h);
      }
      break;
    }
    case InitStrategy::axis_diagonal_2d: {
      if (d != 2) throw std::invalid_argument("axis_diagonal_2d requires d = 2");
      const double r = std::numbers::sqrt2 / 2.0;
      const std::array<Eigen::Vector2d, 4> dirs{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1), Eigen::Vector2d(r, r),
                                               Eigen::Vector2d(r, -r)};
      for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index family = j % 4;
        const Eigen::Index k = j / 4;
        const Eigen::Index members = n / 4 + (family < n % 4 ? 1 : 0);
        const auto [mn, mx] = domain.projection_range(dirs[static_cast<std::size_t>(family)]);
        const double offset = mn + (static_cast<double>(k) + 0.5) * (mx - mn) / static_cast<double>(members);
        p.W.col(j) = dirs[static_cast<std::size_t>(family)];
        p.b[j] = -offset;
      }
      break;
    }
    case InitStrategy::box_init: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const auto [lo, hi] = domain.bounding_box();
      for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd dir(d);
        do {
          for (int a = 0; a < d; ++a) dir[a] = normal(rng);
        } while (dir.norm() < 1e-12);
        dir.normalize();
        Eigen::VectorXd pt(d);
        for (int a = 0; a < d; ++a) pt[a] = lo[a] + unit(rng) * (hi[a] - lo[a]);
        p.W.col(j) = dir;
        p.b[j] = -pt.dot(dir);
      }
      break;
    }
  }
  return p;
}

// Checkpoint format (text, one record per line):
//   gnn-network 1
//   <d> <n> <beta> <base>
//   W row-major, d lines of n values
//   b: one line of n values
//   c: one line of n values
// Values are written with 17 significant digits, which round-trips doubles.

inline void write_checkpoint(std::ostream& os, const ShallowNetwork& net) {
  net.validate();
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "gnn-network 1\n" << net.dim() << ' ' << net.width() << ' ' << net.activation.scale << ' '
     << to_string(net.activation.base) << '\n';
  const auto line = [&](const auto& v) {
    for (Eigen::Index j = 0; j < v.size(); ++j) os << (j ? " " : "") << v[j];
    os << '\n';
  };
  for (int a = 0; a < net.dim(); ++a) line(Eigen::VectorXd(net.W.row(a).transpose()));
  line(net.b);
  line(net.c);
  os.precision(old);
}

inline ShallowNetwork read_checkpoint(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "gnn-network" || version != 1) throw std::runtime_error("not a gnn-network checkpoint");
  int d = 0;
  Eigen::Index n = 0;
  std::string beta_text;
  std::string base;
  is >> d >> n >> beta_text >> base;
  if (!is || d < 1 || d > 2 || n < 0) throw std::runtime_error("malformed checkpoint header");
  const auto number = [&]() {
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("truncated checkpoint");
    return std::stod(tok);
  };
  ShallowNetwork net;
  net.activation = {parse_activation_base(base), std::stod(beta_text)};
  net.W.resize(d, n);
  net.b.resize(n);
  net.c.resize(n);
  for (int a = 0; a < d; ++a)
    for (Eigen::Index j = 0; j < n; ++j) net.W(a, j) = number();
  for (Eigen::Index j = 0; j < n; ++j) net.b[j] = number();
  for (Eigen::Index j = 0; j < n; ++j) net.c[j] = number();
  net.validate();
  return net;
}

}  // namespace gnn
