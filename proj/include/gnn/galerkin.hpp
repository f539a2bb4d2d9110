#pragma once

// The two linear systems of the method: the activation-space projection that
// fixes the output coefficients c of a network with frozen hidden parameters,
// and the projection onto the span of the accumulated basis functions.

#include "gnn/forms.hpp"
#include "gnn/linalg.hpp"
#include "gnn/network.hpp"

#include <Eigen/Dense>

#include <map>
#include <utility>
#include <vector>

namespace gnn {

/// Activation features of a set of hidden units on every site of a problem.
///
/// For a quantity Q and site s, `features(s, Q)` is the n_G x n matrix whose
/// column j holds Q applied to the j-th activation function sigma(beta(x.W_j + b_j)).
/// Jets of t -> sigma(beta t) are kept up to `jet_order` so that parameter
/// derivatives of every quantity can be contracted as well.
class FeatureSet {
 public:
  FeatureSet(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Activation& act,
             const VariationalProblem& problem, bool with_gradient)
      : W_(W), b_(b), problem_(&problem) {
    if (W.cols() != b.size()) throw std::invalid_argument("FeatureSet: W and b widths differ");
    if (W.rows() != problem.dim()) throw std::invalid_argument("FeatureSet: network dimension does not match problem");
    jets_.reserve(problem.sites.size());
    for (std::size_t s = 0; s < problem.sites.size(); ++s) {
      const int order = problem.site_order(s) + (with_gradient ? 1 : 0);
      if (order > act.max_order()) throw std::invalid_argument("activation cannot supply the derivatives this form needs");
      jets_.push_back(activation_jet(act, preactivation(W, b, problem.sites[s].rule.nodes), order));
    }
  }

  [[nodiscard]] Eigen::Index width() const { return W_.cols(); }

  const Eigen::MatrixXd& features(std::size_t site, Quantity q) {
    const auto key = std::make_pair(site, q);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    const auto& S = jets_[site];
    const auto& rule = problem_->sites[site].rule;
    Eigen::MatrixXd B;
    switch (q) {
      case Quantity::value: B = S[0]; break;
      case Quantity::grad_x: B = S[1] * W_.row(0).asDiagonal(); break;
      case Quantity::grad_y: B = S[1] * W_.row(1).asDiagonal(); break;
      case Quantity::second_1d: B = S[2] * W_.row(0).cwiseAbs2().asDiagonal(); break;
      case Quantity::laplacian: B = S[2] * W_.colwise().squaredNorm().asDiagonal(); break;
      case Quantity::normal_derivative:
        if (!rule.has_normals()) throw std::invalid_argument("normal derivative requested on a rule without normals");
        B = S[1].cwiseProduct(rule.normals * W_);
        break;
    }
    return cache_.emplace(key, std::move(B)).first->second;
  }

  /// Q(v) at the site nodes for v = sum_j c_j sigma_j.
  Eigen::VectorXd quantity(std::size_t site, Quantity q, const Eigen::VectorXd& c) { return features(site, q) * c; }

  /// Gram matrix K_ij = a(sigma_i, sigma_j).
  Eigen::MatrixXd gram() {
    const Eigen::Index n = width();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : problem_->bilinear_terms) {
      const auto& w = problem_->sites[t.site].rule.weights;
      const Eigen::MatrixXd scaled = w.cwiseSqrt().asDiagonal() * features(t.site, t.quantity);
      K.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), t.coef);
    }
    K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
    return K;
  }

  /// F_i = L(sigma_i) - a(u_prev, sigma_i).
  Eigen::VectorXd residual_vector(const Bundle& u_prev) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(width());
    for (const auto& t : problem_->load_terms) {
      const auto& rule = problem_->sites[t.site].rule;
      Eigen::VectorXd g = rule.weights;
      if (t.data.size() != 0) g = g.cwiseProduct(t.data);
      F += t.coef * (features(t.site, t.quantity).transpose() * g);
    }
    for (const auto& t : problem_->bilinear_terms) {
      const auto& rule = problem_->sites[t.site].rule;
      const Eigen::VectorXd qu = extract(u_prev.at(t.site), t.quantity, rule).cwiseProduct(rule.weights);
      F -= t.coef * (features(t.site, t.quantity).transpose() * qu);
    }
    return F;
  }

  /// Contraction sum_k A_k d Q(v)_k / d p over every hidden parameter p, for
  /// adjoint weights A on (site, quantity) and output coefficients c.
  /// Returns (dW as d x n, db as n).
  std::pair<Eigen::MatrixXd, Eigen::VectorXd> contract(
      const std::vector<std::pair<std::pair<std::size_t, Quantity>, Eigen::VectorXd>>& adjoints,
      const Eigen::VectorXd& c) {
    const int d = static_cast<int>(W_.rows());
    const Eigen::Index n = width();
    Eigen::MatrixXd gW = Eigen::MatrixXd::Zero(d, n);
    Eigen::VectorXd gb = Eigen::VectorXd::Zero(n);
    for (const auto& [key, A] : adjoints) {
      const auto [site, q] = key;
      const auto& S = jets_[site];
      const auto& rule = problem_->sites[site].rule;
      const Eigen::MatrixXd& X = rule.nodes;
      // "lead" multiplies the highest jet, which also carries the x_e factor for dW.
      const auto add_leading = [&](const Eigen::MatrixXd& Sm, const Eigen::VectorXd& unit_factor) {
        gb += c.cwiseProduct(unit_factor).cwiseProduct(Sm.transpose() * A);
        for (int e = 0; e < d; ++e) {
          gW.row(e) += c.cwiseProduct(unit_factor).cwiseProduct(Sm.transpose() * A.cwiseProduct(X.col(e))).transpose();
        }
      };
      switch (q) {
        case Quantity::value: add_leading(S[1], Eigen::VectorXd::Ones(n)); break;
        case Quantity::grad_x:
        case Quantity::grad_y: {
          const int a = q == Quantity::grad_x ? 0 : 1;
          add_leading(S[2], W_.row(a).transpose());
          gW.row(a) += c.cwiseProduct(S[1].transpose() * A).transpose();
          break;
        }
        case Quantity::second_1d: {
          add_leading(S[3], W_.row(0).cwiseAbs2().transpose());
          gW.row(0) += 2.0 * c.cwiseProduct(W_.row(0).transpose()).cwiseProduct(S[2].transpose() * A).transpose();
          break;
        }
        case Quantity::laplacian: {
          add_leading(S[3], W_.colwise().squaredNorm().transpose());
          const Eigen::VectorXd s2a = S[2].transpose() * A;
          for (int e = 0; e < d; ++e) gW.row(e) += 2.0 * c.cwiseProduct(W_.row(e).transpose()).cwiseProduct(s2a).transpose();
          break;
        }
        case Quantity::normal_derivative: {
          const Eigen::MatrixXd S2P = S[2].cwiseProduct(rule.normals * W_);
          gb += c.cwiseProduct(S2P.transpose() * A);
          for (int e = 0; e < d; ++e) {
            gW.row(e) += c.cwiseProduct(S2P.transpose() * A.cwiseProduct(X.col(e))).transpose();
            gW.row(e) += c.cwiseProduct(S[1].transpose() * A.cwiseProduct(rule.normals.col(e))).transpose();
          }
          break;
        }
      }
    }
    return {gW, gb};
  }

 private:
  Eigen::MatrixXd W_;
  Eigen::VectorXd b_;
  const VariationalProblem* problem_;
  std::vector<std::array<Eigen::MatrixXd, 4>> jets_;
  std::map<std::pair<std::size_t, Quantity>, Eigen::MatrixXd> cache_;
};

struct LsqResult {
  Eigen::VectorXd c;
  SpdSolveResult solve;
};

/// Output coefficients c that make the residual of u_prev a-orthogonal to the
/// span of the activation functions of (W, b).
inline LsqResult galerkin_lsq(FeatureSet& features, const Bundle& u_prev) {
  const Eigen::MatrixXd K = features.gram();
  const Eigen::VectorXd F = features.residual_vector(u_prev);
  LsqResult out;
  out.solve = spd_solve(K, F);
  out.c = out.solve.x;
  return out;
}

inline LsqResult galerkin_lsq(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const Activation& act,
                              const VariationalProblem& problem, const Bundle& u_prev) {
  FeatureSet features(W, b, act, problem, false);
  return galerkin_lsq(features, u_prev);
}

struct GalerkinSolution {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
  ConditionNumber cond;
  SolveMethod method = SolveMethod::cholesky;
};

/// Hard cap on cond(K) for the basis-space system.
inline constexpr double kConditionCap = 1e12;

/// Projection onto span{phi_1..phi_m} given the samples of each basis function.
inline GalerkinSolution galerkin_solve(const std::vector<Bundle>& basis, const VariationalProblem& problem) {
  const auto m = static_cast<Eigen::Index>(basis.size());
  GalerkinSolution out;
  out.K.resize(m, m);
  out.F.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    out.F[i] = load(problem, basis[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double kij = bilinear(problem, basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(j)]);
      out.K(i, j) = kij;
      out.K(j, i) = kij;
    }
  }
  out.cond = condition_number(out.K);
  if (!out.cond.positive_definite || out.cond.value > kConditionCap) {
    throw NumericalError("galerkin_solve: basis Gram matrix is degenerate (cond = " + std::to_string(out.cond.value) +
                         ", cap 1e12)");
  }
  const SpdSolveResult sol = spd_solve(out.K, out.F);
  out.coefficients = sol.x;
  out.method = sol.method;
  return out;
}

/// sum_j coef_j * basis_j, site by site.
inline Bundle combine(const std::vector<Bundle>& basis, const Eigen::VectorXd& coef, const Bundle& zero) {
  Bundle out = zero;
  for (std::size_t j = 0; j < basis.size(); ++j) {
    for (std::size_t s = 0; s < out.size(); ++s) out[s].axpy(coef[static_cast<Eigen::Index>(j)], basis[j][s]);
  }
  return out;
}

}  // namespace gnn
