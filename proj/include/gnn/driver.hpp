#pragma once

// The outer adaptive loop: estimate with a freshly trained network, stop once
// eta <= tol, otherwise add the network to the basis and re-solve.

#include "gnn/forms.hpp"
#include "gnn/galerkin.hpp"
#include "gnn/schedules.hpp"
#include "gnn/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace gnn {

enum class TerminatedReason { running, tol_reached, max_iterations, degenerate };

inline std::string to_string(TerminatedReason r) {
  switch (r) {
    case TerminatedReason::running: return "running";
    case TerminatedReason::tol_reached: return "tol_reached";
    case TerminatedReason::max_iterations: return "max_iterations";
    case TerminatedReason::degenerate: return "degenerate";
  }
  return "unknown";
}

/// One estimate (and, unless stopped, one basis update) of the loop.
struct IterationRecord {
  int iteration = 0;
  int width = 0;
  double beta = 0.0;
  double learning_rate = 0.0;
  double eta = 0.0;     // eta(u_{i-1}, phi_i)
  double l2_eta = 0.0;  // ||v||_{L2} of the unnormalised trained network
  double true_l2 = std::numeric_limits<double>::quiet_NaN();      // ||u - u_{i-1}||
  double true_energy = std::numeric_limits<double>::quiet_NaN();  // |||u - u_{i-1}|||
  bool accepted = false;
  double cond = std::numeric_limits<double>::quiet_NaN();  // cond(K) after accepting phi_i
  double post_l2 = std::numeric_limits<double>::quiet_NaN();      // ||u - u_i||
  double post_energy = std::numeric_limits<double>::quiet_NaN();  // |||u - u_i|||
  double orthogonality = std::numeric_limits<double>::quiet_NaN();  // max_k |L(phi_k) - a(u_i, phi_k)| / (|L(phi_k)| + 1)
  double phi_norm_error = std::numeric_limits<double>::quiet_NaN();  // | |||phi_i||| - 1 |
  double wall_time = 0.0;
  double cumulative_cost = 0.0;  // sum of n_j^3 over the estimates so far
};

struct EpochRecord {
  int galerkin_iter = 0;
  TrainRecord record;
};

struct SolverState {
  std::vector<ShallowNetwork> basis;
  std::vector<Bundle> basis_samples;             // on the training sites
  std::vector<Bundle> basis_validation_samples;  // on the validation sites
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
  Eigen::VectorXd coefficients;
  Bundle u;             // u_i on the training sites
  Bundle u_validation;  // u_i on the validation sites
  int iteration = 0;    // number of estimates performed
  std::vector<IterationRecord> history;
  std::vector<EpochRecord> epochs;
  TerminatedReason terminated_reason = TerminatedReason::running;
  std::string message;
};

struct RunOptions {
  std::function<void(const IterationRecord&)> on_iteration;
};

/// Algorithm: phi_1 from u_0 = 0; while eta_i > tol accept phi_i, solve, estimate again.
/// Since u_0 = 0, no phi_0 term enters the basis.
inline SolverState run_adaptive(const VariationalProblem& p, const Schedules& s, std::uint64_t seed,
                                const RunOptions& opts = {}) {
  p.validate();
  s.validate();
  SolverState st;
  st.u = zero_bundle(p);
  st.u_validation = zero_bundle(p, true);
  double cost = 0.0;
  const auto start = std::chrono::steady_clock::now();
  const auto zero = st.u;
  const auto zero_val = st.u_validation;

  try {
    for (int i = 1; i <= s.max_iterations; ++i) {
      const IterationConfig cfg = iteration_config(s, i, seed);
      IterationRecord rec;
      rec.iteration = i;
      rec.width = cfg.width;
      rec.beta = cfg.activation.scale;
      rec.learning_rate = cfg.learning_rate;
      if (p.exact) {
        const ExactErrors e = exact_error(p, st.u_validation);
        rec.true_l2 = e.l2;
        rec.true_energy = e.energy;
      }
      cost += std::pow(static_cast<double>(cfg.width), 3);
      rec.cumulative_cost = cost;

      AugmentResult ar;
      try {
        ar = augment_basis(p, st.u, cfg);
      } catch (...) {
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        st.history.push_back(rec);
        st.iteration = i;
        throw;
      }
      for (const auto& r : ar.records) st.epochs.push_back({i, r});
      rec.eta = ar.eta;
      rec.l2_eta = ar.l2_eta;
      st.iteration = i;

      if (ar.degenerate || ar.eta <= s.tol) {
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        st.history.push_back(rec);
        if (opts.on_iteration) opts.on_iteration(rec);
        // A zero residual (degenerate start) is an exact stop as well.
        st.terminated_reason = ar.eta <= s.tol ? TerminatedReason::tol_reached : TerminatedReason::degenerate;
        if (st.terminated_reason == TerminatedReason::degenerate) st.message = "trained network has zero energy";
        return st;
      }

      const Bundle phi = sample(p, ar.phi);
      st.basis.push_back(ar.phi);
      st.basis_samples.push_back(phi);
      st.basis_validation_samples.push_back(sample(p, ar.phi, true));
      GalerkinSolution sol;
      try {
        sol = galerkin_solve(st.basis_samples, p);
      } catch (...) {
        st.basis.pop_back();
        st.basis_samples.pop_back();
        st.basis_validation_samples.pop_back();
        rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        st.history.push_back(rec);
        throw;
      }
      st.K = sol.K;
      st.F = sol.F;
      st.coefficients = sol.coefficients;
      st.u = combine(st.basis_samples, st.coefficients, zero);
      st.u_validation = combine(st.basis_validation_samples, st.coefficients, zero_val);

      rec.accepted = true;
      rec.cond = sol.cond.value;
      rec.phi_norm_error = std::abs(energy_norm(p, phi).value - 1.0);
      double orth = 0.0;
      for (const auto& b : st.basis_samples) {
        const double l = load(p, b);
        orth = std::max(orth, std::abs(l - bilinear(p, st.u, b)) / (std::abs(l) + 1.0));
      }
      rec.orthogonality = orth;
      if (p.exact) {
        const ExactErrors e = exact_error(p, st.u_validation);
        rec.post_l2 = e.l2;
        rec.post_energy = e.energy;
      }
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      st.history.push_back(rec);
      if (opts.on_iteration) opts.on_iteration(rec);
    }
    st.terminated_reason = TerminatedReason::max_iterations;
  } catch (const NumericalError& e) {
    st.terminated_reason = TerminatedReason::degenerate;
    st.message = e.what();
  }
  return st;
}

/// u_i and its derivatives at arbitrary points.
inline FieldSample evaluate_solution(const SolverState& st, const Eigen::MatrixXd& points, int order) {
  if (st.basis.empty()) throw std::invalid_argument("evaluate_solution: the basis is empty");
  FieldSample out = FieldSample::zeros(points.rows(), static_cast<int>(points.cols()), order);
  for (std::size_t j = 0; j < st.basis.size(); ++j) {
    out.axpy(st.coefficients[static_cast<Eigen::Index>(j)], eval_stack(st.basis[j], points, order));
  }
  return out;
}

struct StagnationStudy {
  SolverState fixed;
  SolverState growing;
};

/// The same problem and seed run with n_i = fixed_width and with the growing schedule.
inline StagnationStudy stagnation_study(const VariationalProblem& p, int fixed_width, const Schedules& growing,
                                        std::uint64_t seed, const RunOptions& opts = {}) {
  Schedules fixed = growing;
  fixed.width = WidthSchedule::fixed(fixed_width);
  StagnationStudy out;
  out.fixed = run_adaptive(p, fixed, seed, opts);
  out.growing = run_adaptive(p, growing, seed, opts);
  return out;
}

}  // namespace gnn
