// Command-line front end: run a catalog problem, list the catalog, and the
// quadrature and fixed-versus-growing width studies.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical abort.

#include "gnn/config.hpp"
#include "gnn/gnn.hpp"
#include "gnn/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> sets;
  std::string problem;
  std::string output;
  std::string seed;
  std::string tol;
  std::string epochs;
  std::string max_iterations;
};

void add_common(CLI::App* app, CommonOptions& o, bool with_problem) {
  app->add_option("--config", o.config_file, "config file (key = value lines or JSON)");
  app->add_option("--set", o.sets, "override a config key: key=value (repeatable)");
  if (with_problem) app->add_option("--problem", o.problem, "catalog problem name");
  app->add_option("--output", o.output, "output directory (relative paths go under $GNN_OUTPUT_ROOT)");
  app->add_option("--seed", o.seed, "random seed");
  app->add_option("--tol", o.tol, "stopping tolerance on eta");
  app->add_option("--epochs", o.epochs, "training epochs per Galerkin iteration");
  app->add_option("--max-iterations", o.max_iterations, "cap on Galerkin iterations");
}

gnn::ConfigMap gather(const CommonOptions& o, const std::string& forced_problem = {}) {
  gnn::ConfigMap map;
  if (!o.config_file.empty()) map = gnn::load_config_file(o.config_file);
  const auto put = [&](const std::string& key, const std::string& value) {
    if (!value.empty()) map[key] = {value, 0};
  };
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw gnn::ConfigError("--set expects key=value, got '" + s + "'");
    put(gnn::detail::trim(s.substr(0, eq)), gnn::detail::trim(s.substr(eq + 1)));
  }
  put("problem.name", o.problem);
  put("output.dir", o.output);
  put("seed", o.seed);
  put("schedules.tol", o.tol);
  put("schedules.epochs", o.epochs);
  put("schedules.max_iterations", o.max_iterations);
  if (!forced_problem.empty()) {
    const auto it = map.find("problem.name");
    if (it != map.end() && it->second.value != forced_problem)
      throw gnn::ConfigError("this study runs only on problem '" + forced_problem + "'");
    map["problem.name"] = {forced_problem, 0};
  }
  return map;
}

gnn::RunOptions progress(const gnn::RunConfig& cfg, const std::string& tag) {
  gnn::RunOptions opts;
  if (cfg.report.verbosity == gnn::Verbosity::quiet) return opts;
  opts.on_iteration = [tag](const gnn::IterationRecord& r) {
    std::fprintf(stderr, "[%s] i=%d n=%d eta=%.4e l2_eta=%.4e true_energy=%.4e cond=%.4f\n", tag.c_str(),
                 r.iteration, r.width, r.eta, r.l2_eta, r.true_energy, r.cond);
  };
  return opts;
}

int finish(const gnn::SolverState& st, const gnn::RunArtifacts& art) {
  std::cout << "terminated: " << gnn::to_string(st.terminated_reason) << " after " << st.iteration
            << " iteration(s), basis size " << st.basis.size() << "\n"
            << "output: " << art.dir.string() << "\n";
  if (st.terminated_reason == gnn::TerminatedReason::degenerate) {
    std::cerr << "numerical abort: " << st.message << "\n";
    return kExitNumerical;
  }
  return 0;
}

int cmd_run(const CommonOptions& o) {
  const gnn::RunConfig cfg = gnn::resolve_config(gather(o));
  const auto entry = gnn::find_problem(cfg.problem);
  const gnn::VariationalProblem p = entry.build(cfg.quadrature);
  const gnn::SolverState st = gnn::run_adaptive(p, cfg.schedules, cfg.seed, progress(cfg, cfg.problem));
  const auto art = gnn::write_run(cfg, p, st, gnn::resolve_output_dir(cfg));
  return finish(st, art);
}

int cmd_list(bool json) {
  const auto entries = gnn::catalog();
  if (json) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
      arr.push_back({{"name", e.name},
                     {"dimension", e.dim},
                     {"form", gnn::to_string(e.form_kind)},
                     {"exact_solution", e.has_exact},
                     {"width", e.schedules.width.describe()},
                     {"beta", e.schedules.activation_scale.describe()},
                     {"learning_rate_A", e.schedules.learning_rate.A},
                     {"learning_rate_rho", e.schedules.learning_rate.rho},
                     {"init", gnn::to_string(e.schedules.init)},
                     {"tol", e.schedules.tol},
                     {"description", e.description}});
    }
    std::cout << arr.dump(2) << "\n";
    return 0;
  }
  std::printf("%-28s %-3s %-11s %-5s %-22s %-16s %-14s %s\n", "name", "d", "form", "exact", "width", "beta", "lr",
              "tol");
  for (const auto& e : entries) {
    std::ostringstream lr;
    lr << e.schedules.learning_rate.A << "/" << e.schedules.learning_rate.rho << "^(i-1)";
    std::printf("%-28s %-3d %-11s %-5s %-22s %-16s %-14s %g\n", e.name.c_str(), e.dim,
                gnn::to_string(e.form_kind).c_str(), e.has_exact ? "yes" : "no", e.schedules.width.describe().c_str(),
                e.schedules.activation_scale.describe().c_str(), lr.str().c_str(), e.schedules.tol);
  }
  return 0;
}

int cmd_quadrature_study(const CommonOptions& o, const std::vector<int>& nodes, const std::vector<std::string>& kinds) {
  if (nodes.empty()) throw gnn::ConfigError("quadrature-study needs at least one node count (--nodes)");
  if (kinds.empty()) throw gnn::ConfigError("quadrature-study needs at least one rule kind (--rule)");
  const gnn::ConfigMap base = gather(o, "l2_fit");
  const gnn::RunConfig base_cfg = gnn::resolve_config(base);
  const std::filesystem::path dir = base_cfg.output_dir.empty() ? gnn::output_root() / "runs" / "quadrature_study"
                                                                 : gnn::resolve_output_dir(base_cfg);
  std::filesystem::create_directories(dir);

  std::ostringstream csv;
  csv << "rule,nodes,iteration,n_i,eta,l2_eta,true_l2,post_l2\n";
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  int status = 0;
  for (const auto& kind : kinds) {
    for (int n : nodes) {
      gnn::ConfigMap m = base;
      m["quadrature.interior.rule"] = {kind, 0};
      m["quadrature.interior.n"] = {std::to_string(n), 0};
      const std::string sub = kind + "_" + std::to_string(n);
      m["output.dir"] = {(dir / sub).string(), 0};
      const gnn::RunConfig cfg = gnn::resolve_config(m);
      const auto p = gnn::find_problem(cfg.problem).build(cfg.quadrature);
      const auto st = gnn::run_adaptive(p, cfg.schedules, cfg.seed, progress(cfg, sub));
      gnn::write_run(cfg, p, st, dir / sub);
      for (const auto& r : st.history) {
        csv << kind << ',' << n << ',' << r.iteration << ',' << r.width << ',' << gnn::csv_number(r.eta) << ','
            << gnn::csv_number(r.l2_eta) << ',' << gnn::csv_number(r.true_l2) << ',' << gnn::csv_number(r.post_l2)
            << '\n';
      }
      runs.push_back({{"rule", kind}, {"nodes", n}, {"dir", sub}, {"terminated_reason", gnn::to_string(st.terminated_reason)}});
      if (st.terminated_reason == gnn::TerminatedReason::degenerate) status = kExitNumerical;
    }
  }
  gnn::write_text(dir / "quadrature_study.csv", csv.str());
  nlohmann::ordered_json man;
  man["study"] = "quadrature";
  man["problem"] = "l2_fit";
  man["runs"] = runs;
  man["files"] = {"quadrature_study.csv"};
  gnn::write_text(dir / "manifest.json", man.dump(2) + "\n");
  std::cout << "output: " << dir.string() << "\n";
  return status;
}

int cmd_stagnation_study(const CommonOptions& o, int fixed_width) {
  if (fixed_width < 1) throw gnn::ConfigError("--fixed-width must be >= 1");
  gnn::ConfigMap m = gather(o);
  if (!m.count("problem.name")) m["problem.name"] = {"l2_fit", 0};
  const gnn::RunConfig cfg = gnn::resolve_config(m);
  const auto p = gnn::find_problem(cfg.problem).build(cfg.quadrature);
  const auto study = gnn::stagnation_study(p, fixed_width, cfg.schedules, cfg.seed, progress(cfg, cfg.problem));
  const std::filesystem::path dir =
      cfg.output_dir.empty() ? gnn::output_root() / "runs" / (cfg.problem + "_stagnation") : gnn::resolve_output_dir(cfg);
  gnn::RunConfig fixed_cfg = cfg;
  fixed_cfg.schedules.width = gnn::WidthSchedule::fixed(fixed_width);
  gnn::write_run(fixed_cfg, p, study.fixed, dir / "fixed");
  gnn::write_run(cfg, p, study.growing, dir / "growing");

  std::ostringstream csv;
  csv << "iteration,fixed_n_i,fixed_eta,fixed_true_energy,fixed_cost,growing_n_i,growing_eta,growing_true_energy,"
         "growing_cost\n";
  const std::size_t rows = std::max(study.fixed.history.size(), study.growing.history.size());
  const auto cell = [](const std::vector<gnn::IterationRecord>& h, std::size_t k, auto f) {
    return k < h.size() ? gnn::csv_number(f(h[k])) : std::string();
  };
  for (std::size_t k = 0; k < rows; ++k) {
    csv << (k + 1) << ','
        << cell(study.fixed.history, k, [](const auto& r) { return static_cast<double>(r.width); }) << ','
        << cell(study.fixed.history, k, [](const auto& r) { return r.eta; }) << ','
        << cell(study.fixed.history, k, [](const auto& r) { return r.true_energy; }) << ','
        << cell(study.fixed.history, k, [](const auto& r) { return r.cumulative_cost; }) << ','
        << cell(study.growing.history, k, [](const auto& r) { return static_cast<double>(r.width); }) << ','
        << cell(study.growing.history, k, [](const auto& r) { return r.eta; }) << ','
        << cell(study.growing.history, k, [](const auto& r) { return r.true_energy; }) << ','
        << cell(study.growing.history, k, [](const auto& r) { return r.cumulative_cost; }) << '\n';
  }
  gnn::write_text(dir / "stagnation.csv", csv.str());
  nlohmann::ordered_json man;
  man["study"] = "stagnation";
  man["problem"] = cfg.problem;
  man["fixed_width"] = fixed_width;
  man["runs"] = {{{"dir", "fixed"}, {"terminated_reason", gnn::to_string(study.fixed.terminated_reason)}},
                 {{"dir", "growing"}, {"terminated_reason", gnn::to_string(study.growing.terminated_reason)}}};
  man["files"] = {"stagnation.csv"};
  man["config"] = gnn::config_to_json(cfg);
  gnn::write_text(dir / "manifest.json", man.dump(2) + "\n");
  std::cout << "output: " << dir.string() << "\n";
  const bool bad = study.fixed.terminated_reason == gnn::TerminatedReason::degenerate ||
                   study.growing.terminated_reason == gnn::TerminatedReason::degenerate;
  return bad ? kExitNumerical : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive Galerkin neural-network solver"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  auto* run = app.add_subcommand("run", "run the adaptive loop on one problem");
  add_common(run, run_opts, true);

  bool list_json = false;
  auto* list = app.add_subcommand("list", "list the problem catalog");
  list->add_flag("--json", list_json, "machine-readable output");

  CommonOptions quad_opts;
  std::vector<int> quad_nodes;
  std::vector<std::string> quad_rules{"gauss"};
  auto* quad = app.add_subcommand("quadrature-study", "rerun the function-fitting problem per quadrature size");
  add_common(quad, quad_opts, false);
  quad->add_option("--nodes", quad_nodes, "interior node counts")->delimiter(',');
  quad->add_option("--rule", quad_rules, "rule kinds: gauss, riemann")->delimiter(',');

  CommonOptions stag_opts;
  int fixed_width = 100;
  auto* stag = app.add_subcommand("stagnation-study", "fixed versus growing widths on one problem");
  add_common(stag, stag_opts, true);
  stag->add_option("--fixed-width", fixed_width, "width of every network in the fixed run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*list) return cmd_list(list_json);
    if (*quad) return cmd_quadrature_study(quad_opts, quad_nodes, quad_rules);
    if (*stag) return cmd_stagnation_study(stag_opts, fixed_width);
  } catch (const gnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gnn::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
