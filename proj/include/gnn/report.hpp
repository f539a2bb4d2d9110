#pragma once

// On-disk artifacts of a run: history/epoch/conditioning CSVs, solution and
// basis samples on a uniform grid, basis checkpoints and a JSON manifest.

#include "gnn/config.hpp"
#include "gnn/driver.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace gnn {

namespace fs = std::filesystem;

/// Doubles in CSVs: shortest text that round-trips, "nan"/"inf" for non-finite values.
inline std::string csv_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(std::numeric_limits<double>::max_digits10);
  os << x;
  return os.str();
}

inline void write_history_csv(std::ostream& os, const SolverState& st, bool timing) {
  os << "iteration,n_i,beta,learning_rate,eta,l2_eta,true_l2,true_energy,accepted,cond,post_l2,post_energy,"
        "orthogonality,phi_norm_error,wall_time,cumulative_cost\n";
  for (const auto& r : st.history) {
    os << r.iteration << ',' << r.width << ',' << csv_number(r.beta) << ',' << csv_number(r.learning_rate) << ','
       << csv_number(r.eta) << ',' << csv_number(r.l2_eta) << ',' << csv_number(r.true_l2) << ','
       << csv_number(r.true_energy) << ',' << (r.accepted ? 1 : 0) << ',' << csv_number(r.cond) << ','
       << csv_number(r.post_l2) << ',' << csv_number(r.post_energy) << ',' << csv_number(r.orthogonality) << ','
       << csv_number(r.phi_norm_error) << ',' << csv_number(timing ? r.wall_time : 0.0) << ','
       << csv_number(r.cumulative_cost) << '\n';
  }
}

inline void write_epochs_csv(std::ostream& os, const SolverState& st) {
  os << "galerkin_iter,epoch,eta,l2_eta,param_norm\n";
  for (const auto& e : st.epochs) {
    os << e.galerkin_iter << ',' << e.record.epoch << ',' << csv_number(e.record.eta) << ','
       << csv_number(e.record.l2_eta) << ',' << csv_number(e.record.param_norm) << '\n';
  }
}

inline void write_conditioning_csv(std::ostream& os, const SolverState& st) {
  os << "iteration,basis_size,cond\n";
  int size = 0;
  for (const auto& r : st.history) {
    if (!r.accepted) continue;
    ++size;
    os << r.iteration << ',' << size << ',' << csv_number(r.cond) << '\n';
  }
}

/// Uniform sample points inside the problem domain, `m` per axis.
inline Eigen::MatrixXd uniform_grid(const Domain& domain, int m) {
  const auto [lo, hi] = domain.bounding_box();
  const int d = domain.dim();
  std::vector<Eigen::VectorXd> pts;
  const auto coord = [&](int a, int k) { return lo[a] + (hi[a] - lo[a]) * k / std::max(1, m - 1); };
  if (d == 1) {
    for (int k = 0; k < m; ++k) pts.push_back(Eigen::VectorXd::Constant(1, coord(0, k)));
  } else {
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < m; ++k) {
        Eigen::VectorXd x(2);
        x << coord(0, i), coord(1, k);
        if (domain.contains(x)) pts.push_back(x);
      }
    }
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pts.size()), d);
  for (std::size_t k = 0; k < pts.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = pts[k].transpose();
  return out;
}

/// x[,y],u[,exact]
inline void write_solution_csv(std::ostream& os, const VariationalProblem& p, const SolverState& st,
                               const Eigen::MatrixXd& pts) {
  const int d = p.dim();
  os << (d == 1 ? "x" : "x,y") << ",u" << (p.exact ? ",exact" : "") << '\n';
  Eigen::VectorXd u = Eigen::VectorXd::Zero(pts.rows());
  if (!st.basis.empty()) u = evaluate_solution(st, pts, 0).values;
  for (Eigen::Index k = 0; k < pts.rows(); ++k) {
    for (int a = 0; a < d; ++a) os << csv_number(pts(k, a)) << ',';
    os << csv_number(u[k]);
    if (p.exact) os << ',' << csv_number(p.exact->eval(pts.row(k).transpose()).value);
    os << '\n';
  }
}

inline void write_basis_csv(std::ostream& os, const ShallowNetwork& phi, const Eigen::MatrixXd& pts) {
  const int d = phi.dim();
  os << (d == 1 ? "x" : "x,y") << ",phi\n";
  const Eigen::VectorXd v = eval_stack(phi, pts, 0).values;
  for (Eigen::Index k = 0; k < pts.rows(); ++k) {
    for (int a = 0; a < d; ++a) os << csv_number(pts(k, a)) << ',';
    os << csv_number(v[k]) << '\n';
  }
}

/// Output root: $GNN_OUTPUT_ROOT if set, else the working directory.
inline fs::path output_root() {
  if (const char* env = std::getenv("GNN_OUTPUT_ROOT"); env && *env) return fs::path(env);
  return fs::current_path();
}

inline fs::path resolve_output_dir(const RunConfig& c) {
  const fs::path dir = c.output_dir.empty() ? fs::path("runs") / c.problem : fs::path(c.output_dir);
  return dir.is_absolute() ? dir : output_root() / dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

struct RunArtifacts {
  fs::path dir;
  std::vector<std::string> files;  // relative to dir
};

/// All artifacts of a finished (or aborted) run plus manifest.json.
inline RunArtifacts write_run(const RunConfig& cfg, const VariationalProblem& p, const SolverState& st,
                              const fs::path& dir) {
  fs::create_directories(dir);
  RunArtifacts art{dir, {}};
  const auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    art.files.push_back(name);
  };
  {
    std::ostringstream os;
    write_history_csv(os, st, cfg.report.timing);
    emit("history.csv", os.str());
  }
  {
    std::ostringstream os;
    write_epochs_csv(os, st);
    emit("epochs.csv", os.str());
  }
  {
    std::ostringstream os;
    write_conditioning_csv(os, st);
    emit("conditioning.csv", os.str());
  }
  const int m = cfg.report.grid > 0 ? cfg.report.grid : (p.dim() == 1 ? 201 : 81);
  const Eigen::MatrixXd pts = uniform_grid(p.domain, m);
  {
    std::ostringstream os;
    write_solution_csv(os, p, st, pts);
    emit("solution.csv", os.str());
  }
  if (cfg.report.basis) {
    for (std::size_t k = 0; k < st.basis.size(); ++k) {
      const std::string stem = "basis_" + std::to_string(k + 1);
      std::ostringstream os;
      write_basis_csv(os, st.basis[k], pts);
      emit(stem + ".csv", os.str());
      std::ostringstream net;
      write_checkpoint(net, st.basis[k]);
      emit(stem + ".net", net.str());
    }
  }
  if (cfg.report.rules) {
    for (const auto& s : p.sites) {
      std::ostringstream os;
      write_csv(os, s.rule);
      emit("rule_" + s.name + ".csv", os.str());
    }
  }

  nlohmann::ordered_json man;
  man["problem"] = p.name;
  man["seed"] = cfg.seed;
  man["tol"] = cfg.schedules.tol;
  man["schedules"] = {{"width", cfg.schedules.width.describe()},
                      {"activation", to_string(cfg.schedules.activation)},
                      {"beta", cfg.schedules.activation_scale.describe()},
                      {"learning_rate_A", cfg.schedules.learning_rate.A},
                      {"learning_rate_rho", cfg.schedules.learning_rate.rho},
                      {"init", to_string(cfg.schedules.init)},
                      {"epochs", cfg.schedules.epochs},
                      {"max_iterations", cfg.schedules.max_iterations}};
  nlohmann::ordered_json rules = nlohmann::ordered_json::array();
  for (const auto& s : p.sites) {
    rules.push_back({{"site", s.name}, {"kind", to_string(s.rule.tag)}, {"nodes", s.rule.size()}});
  }
  man["quadrature"] = rules;
  man["terminated_reason"] = to_string(st.terminated_reason);
  man["message"] = st.message;
  man["iterations"] = st.iteration;
  man["basis_size"] = st.basis.size();
  man["files"] = art.files;
  man["config"] = config_to_json(cfg);
  write_text(dir / "manifest.json", man.dump(2) + "\n");
  return art;
}

}  // namespace gnn
