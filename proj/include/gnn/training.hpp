#pragma once

// Basis-function generation: maximise eta(u_prev, v) = <r(u_prev), v> / |||v|||
// over the hidden parameters of one network with Adam, re-solving for the
// output coefficients after every step.

#include "gnn/forms.hpp"
#include "gnn/galerkin.hpp"
#include "gnn/network.hpp"
#include "gnn/schedules.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace gnn {

/// Adam moments for a flat parameter vector.
struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-2;

  AdamState() = default;
  AdamState(Eigen::Index size, double learning_rate)
      : m(Eigen::VectorXd::Zero(size)), v(Eigen::VectorXd::Zero(size)), lr(learning_rate) {}
};

/// One bias-corrected Adam step. `ascent` moves along +grad (maximisation).
inline void adam_step(AdamState& s, Eigen::VectorXd& theta, const Eigen::VectorXd& grad, bool ascent = true) {
  if (grad.size() != theta.size() || s.m.size() != theta.size()) throw std::invalid_argument("adam_step: size mismatch");
  ++s.step;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  const Eigen::ArrayXd update = (s.m.array() / bc1) / ((s.v.array() / bc2).sqrt() + s.eps);
  if (ascent) {
    theta.array() += s.lr * update;
  } else {
    theta.array() -= s.lr * update;
  }
}

/// (W, b) packed as [W column-major, b].
inline Eigen::VectorXd pack_hidden(const Eigen::MatrixXd& W, const Eigen::VectorXd& b) {
  Eigen::VectorXd theta(W.size() + b.size());
  theta.head(W.size()) = Eigen::Map<const Eigen::VectorXd>(W.data(), W.size());
  theta.tail(b.size()) = b;
  return theta;
}

inline HiddenParams unpack_hidden(const Eigen::VectorXd& theta, int d, Eigen::Index n) {
  HiddenParams p;
  p.W = Eigen::Map<const Eigen::MatrixXd>(theta.data(), d, n);
  p.b = theta.tail(n);
  return p;
}

/// eta of the network (W, b, c) and, optionally, its gradient in (W, b) with c frozen.
struct ObjectiveValue {
  double eta = 0.0;
  double residual = 0.0;  // <r(u_prev), v>
  double norm = 0.0;      // |||v|||
  double l2 = 0.0;        // ||v||_{L2} on the interior rule
  Eigen::VectorXd c;
  Eigen::MatrixXd grad_W;
  Eigen::VectorXd grad_b;
  SolveMethod method = SolveMethod::cholesky;
};

namespace detail {

using SiteQuantity = std::pair<std::size_t, Quantity>;

/// eta and friends for fixed coefficients c on an existing feature set.
inline ObjectiveValue objective_for(FeatureSet& fs, const VariationalProblem& p, const Bundle& u_prev,
                                    const Eigen::VectorXd& c, bool with_gradient) {
  ObjectiveValue out;
  out.c = c;
  std::map<SiteQuantity, Eigen::VectorXd> qv;
  const auto Q = [&](std::size_t s, Quantity q) -> const Eigen::VectorXd& {
    auto it = qv.find({s, q});
    if (it == qv.end()) it = qv.emplace(SiteQuantity{s, q}, fs.quantity(s, q, c)).first;
    return it->second;
  };
  double avv = 0.0;
  double r = 0.0;
  for (const auto& t : p.bilinear_terms) {
    const auto& rule = p.sites[t.site].rule;
    const Eigen::VectorXd& v = Q(t.site, t.quantity);
    const Eigen::VectorXd u = extract(u_prev.at(t.site), t.quantity, rule);
    avv += t.coef * (rule.weights.array() * v.array().square()).sum();
    r -= t.coef * (rule.weights.array() * u.array() * v.array()).sum();
  }
  for (const auto& t : p.load_terms) {
    const auto& rule = p.sites[t.site].rule;
    Eigen::ArrayXd w = rule.weights.array();
    if (t.data.size() != 0) w *= t.data.array();
    r += t.coef * (w * Q(t.site, t.quantity).array()).sum();
  }
  const auto& interior = p.sites.front().rule;
  out.l2 = std::sqrt((interior.weights.array() * Q(0, Quantity::value).array().square()).sum());
  out.residual = r;
  out.norm = std::sqrt(std::max(avv, 0.0));
  if (!(out.norm > 0.0)) return out;
  out.eta = r / out.norm;
  if (!with_gradient) return out;

  // Adjoint weights A on each (site, quantity): d eta = sum A . dQ(v) / |||v|||.
  std::map<SiteQuantity, Eigen::VectorXd> adj;
  const auto accumulate = [&](std::size_t s, Quantity q, const Eigen::VectorXd& a) {
    auto it = adj.find({s, q});
    if (it == adj.end()) {
      adj.emplace(SiteQuantity{s, q}, a);
    } else {
      it->second += a;
    }
  };
  const double ratio = out.eta / out.norm;
  for (const auto& t : p.bilinear_terms) {
    const auto& rule = p.sites[t.site].rule;
    const Eigen::VectorXd u = extract(u_prev.at(t.site), t.quantity, rule);
    accumulate(t.site, t.quantity, -t.coef * rule.weights.cwiseProduct(u + ratio * Q(t.site, t.quantity)));
  }
  for (const auto& t : p.load_terms) {
    const auto& rule = p.sites[t.site].rule;
    Eigen::VectorXd w = rule.weights;
    if (t.data.size() != 0) w = w.cwiseProduct(t.data);
    accumulate(t.site, t.quantity, t.coef * w);
  }
  std::vector<std::pair<SiteQuantity, Eigen::VectorXd>> list(adj.begin(), adj.end());
  auto [gW, gb] = fs.contract(list, c);
  out.grad_W = gW / out.norm;
  out.grad_b = gb / out.norm;
  return out;
}

}  // namespace detail

/// LSQ solve for c followed by eta (and its gradient) at (W, b).
inline ObjectiveValue evaluate_objective(const VariationalProblem& p, const Bundle& u_prev, const Eigen::MatrixXd& W,
                                         const Eigen::VectorXd& b, const Activation& act, bool with_gradient) {
  FeatureSet fs(W, b, act, p, with_gradient);
  const LsqResult lsq = galerkin_lsq(fs, u_prev);
  ObjectiveValue out = detail::objective_for(fs, p, u_prev, lsq.c, with_gradient);
  out.method = lsq.solve.method;
  return out;
}

/// eta at (W, b, c) with c supplied rather than solved for.
inline ObjectiveValue evaluate_objective_fixed_c(const VariationalProblem& p, const Bundle& u_prev,
                                                 const ShallowNetwork& net, bool with_gradient) {
  FeatureSet fs(net.W, net.b, net.activation, p, with_gradient);
  return detail::objective_for(fs, p, u_prev, net.c, with_gradient);
}

/// eta(u_prev, v) = <r(u_prev), v> / |||v||| from sampled bundles.
inline double eta(const VariationalProblem& p, const Bundle& u_prev, const Bundle& v) {
  const double n = energy_norm(p, v).value;
  if (!(n > 0.0)) throw std::invalid_argument("eta: test function has zero energy norm");
  return residual(p, u_prev, v) / n;
}

inline double eta(const VariationalProblem& p, const Bundle& u_prev, const ShallowNetwork& v) {
  return eta(p, u_prev, sample(p, v));
}

struct EtaGradient {
  double eta = 0.0;
  Eigen::MatrixXd W;
  Eigen::VectorXd b;
};

/// Gradient of eta with respect to (W, b), holding c at the network's current value.
inline EtaGradient eta_gradient(const VariationalProblem& p, const Bundle& u_prev, const ShallowNetwork& net) {
  const ObjectiveValue v = evaluate_objective_fixed_c(p, u_prev, net, true);
  if (!(v.norm > 0.0)) throw std::invalid_argument("eta_gradient: network has zero energy norm");
  return {v.eta, v.grad_W, v.grad_b};
}

struct TrainRecord {
  int epoch = 0;
  double eta = 0.0;
  double l2_eta = 0.0;
  double param_norm = 0.0;
  double wall_time = 0.0;
};

struct AugmentResult {
  ShallowNetwork phi;  // normalised: |||phi||| = 1
  ShallowNetwork raw;  // the trained network with its LSQ coefficients
  double eta = 0.0;
  double l2_eta = 0.0;
  bool degenerate = false;  // zero residual or zero-norm start; phi is unusable
  std::vector<TrainRecord> records;
};

/// Train one network of the configured width and return it normalised in the energy norm.
inline AugmentResult augment_basis(const VariationalProblem& p, const Bundle& u_prev, const IterationConfig& cfg) {
  cfg.activation.validate();
  const int d = p.dim();
  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&]() { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  HiddenParams hp = init_hidden(cfg.init, cfg.width, d, cfg.seed, p.domain);
  Eigen::VectorXd theta = pack_hidden(hp.W, hp.b);
  AdamState adam(theta.size(), cfg.learning_rate);

  AugmentResult out;
  ObjectiveValue obj = evaluate_objective(p, u_prev, hp.W, hp.b, cfg.activation, cfg.epochs > 0);
  const auto record = [&](int epoch) {
    ShallowNetwork cur{hp.W, hp.b, obj.c, cfg.activation};
    if (!std::isfinite(obj.eta) || !cur.finite()) {
      throw NumericalError("augment_basis: non-finite eta or parameters at epoch " + std::to_string(epoch));
    }
    out.records.push_back({epoch, obj.eta, obj.l2, cur.param_norm(), elapsed()});
  };
  if (!(obj.norm > 0.0) || obj.eta == 0.0) {
    out.degenerate = true;
    out.raw = {hp.W, hp.b, obj.c, cfg.activation};
    out.phi = out.raw;
    out.records.push_back({0, 0.0, obj.l2, out.raw.finite() ? out.raw.param_norm() : 0.0, elapsed()});
    return out;
  }
  record(0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Eigen::VectorXd grad = pack_hidden(obj.grad_W, obj.grad_b);
    adam_step(adam, theta, grad, true);
    hp = unpack_hidden(theta, d, cfg.width);
    obj = evaluate_objective(p, u_prev, hp.W, hp.b, cfg.activation, epoch < cfg.epochs);
    if (!(obj.norm > 0.0)) throw NumericalError("augment_basis: network collapsed to zero energy at epoch " + std::to_string(epoch));
    record(epoch);
  }

  out.raw = {hp.W, hp.b, obj.c, cfg.activation};
  const Bundle raw_samples = sample(p, out.raw);
  const double norm = energy_norm(p, raw_samples).value;
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("augment_basis: trained network has no energy");
  out.phi = scale_output(out.raw, 1.0 / norm);
  out.eta = residual(p, u_prev, raw_samples) / norm;
  out.l2_eta = obj.l2;
  return out;
}

}  // namespace gnn
