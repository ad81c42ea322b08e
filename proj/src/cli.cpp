#include "saturex/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "saturex/errors.hpp"
#include "saturex/experiment.hpp"
#include "saturex/lagrangian.hpp"
#include "saturex/transport.hpp"

namespace saturex {

namespace {

struct ModelArgs {
  std::string psi;
  std::string phi = "linear";
  double s = 1.0;
  double L = 1.0;
  int dim = 1;

  void add(CLI::App* cmd) {
    cmd->add_option("model", psi, "psi catalog id: rhe, wilson, larsen:p=<x>, coth, tanh:gamma=<x>, linear")->required();
    cmd->add_option("--phi", phi, "phi id: linear or power:m=<m>[,scale=<c>]");
    cmd->add_option("--s", s, "characteristic speed");
    cmd->add_option("--L", L, "characteristic length");
    cmd->add_option("--dim", dim, "spatial dimension");
  }
  ModelSpec build() const { return ModelSpec(parse_psi(psi), parse_phi(phi, s), L, dim); }
};

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("--out: cannot write '" + path + "'");
  f << text;
}

int cmd_check(const ModelArgs& ma, double z_max, const std::string& out_path, std::ostream& out) {
  const ModelSpec model = ma.build();
  Json j = to_json(check_assumptions(model));
  j["phi"] = to_json(check_phi(model.phi, z_max));
  emit(j.dump(2) + "\n", out_path, out);
  return 0;
}

int cmd_inspect(const ModelArgs& ma, double c0, int samples, std::uint64_t seed, const std::string& out_path,
                std::ostream& out) {
  const ModelSpec model = ma.build();
  const FluxObjects fo(model);
  const int d = model.dimension;
  Json j;
  j["model"] = model.id();
  j["s"] = model.s;
  j["L"] = model.L;
  j["dimension"] = d;
  Json rows = Json::array();
  for (double r : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e6}) {
    for (double sg : {1.0, -1.0}) {
      if (r == 0.0 && sg < 0) continue;
      Vec rv(static_cast<size_t>(d), 0.0);
      rv[0] = sg * r;
      const Vec psi = eval_psi(model, rv);
      const auto [h, h0] = fo.h_and_recession(1.0, rv);
      Json row;
      row["r"] = rv;
      row["psi"] = psi;
      row["dpsi"] = eval_dpsi(model, rv);
      row["Phi"] = num(fo.potential(rv));
      row["kstar"] = num(kstar(model, rv));
      row["flux_a_z1"] = fo.flux_a(1.0, rv);
      row["h_z1"] = num(h);
      row["h0_z1"] = num(h0);
      row["f_z1"] = num(fo.lagrangian(1.0, rv));
      rows.push_back(row);
    }
  }
  j["samples"] = rows;
  const GrowthConstants gc = fo.growth_constants(c0);
  j["growth_constants"] = to_json(gc);
  j["growth_check"] = to_json(fo.verify_growth(gc, samples, seed));
  j["phi"] = to_json(check_phi(model.phi, 1.0));
  emit(j.dump(2) + "\n", out_path, out);
  return 0;
}

int cmd_cost(const ModelArgs& ma, const std::string& grid, const std::string& out_path, const std::string& sidecar,
             std::ostream& out) {
  const ModelSpec model = ma.build();
  if (model.dimension != 1) throw ConfigError("cost: --grid tabulates a 1D velocity line; use --dim 1");
  const Vec vs = parse_number_list(grid, "--grid");
  if (vs.empty()) throw ConfigError("--grid: empty velocity grid");
  std::vector<Vec> vel;
  for (double v : vs) vel.push_back({std::abs(v) < 1e-14 * std::max(1.0, std::abs(vs.front())) ? 0.0 : v});
  const CostTable table = cost_table(model, vel);
  std::ostringstream csv;
  write_cost_csv(csv, table);
  emit(csv.str(), out_path, out);
  if (!sidecar.empty()) {
    Json j = to_json(table);
    j["boundary_value_plus"] = to_json(boundary_value(model, {1.0}));
    j["boundary_value_minus"] = to_json(boundary_value(model, {-1.0}));
    std::ofstream f(sidecar, std::ios::binary);
    if (!f) throw ConfigError("--sidecar: cannot write '" + sidecar + "'");
    f << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_simulate(const std::string& path, std::ostream& out) {
  const ExperimentConfig cfg = load_config(path);
  const Trajectory tr = simulate_experiment(cfg);
  out << write_simulation(cfg, tr) << "\n";
  return 0;
}

int cmd_verify(const std::string& path, std::ostream& out) {
  const ExperimentConfig cfg = load_config(path);
  const VerifyResult r = verify_experiment(cfg);
  const std::string report = write_verification(cfg, r);
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-5s %14s %14s %12s\n", "check", "pass", "measured", "expected", "tolerance");
  out << line;
  for (const auto& c : r.checks) {
    std::snprintf(line, sizeof line, "%-28s %-5s %14.6g %14.6g %12.3g\n", c.name.c_str(), c.pass ? "PASS" : "FAIL",
                  c.measured, c.expected, c.tolerance);
    out << line;
  }
  out << (r.all_pass() ? "all checks passed" : "verification FAILED") << "; report: " << report << "\n";
  return r.all_pass() ? 0 : 1;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int cmd_sweep(const std::string& path, int threads, std::ostream& out) {
  const ExperimentConfig cfg = load_config(path);
  const auto res = run_sweep(cfg, threads > 0 ? threads : sweep_threads());
  std::ostringstream csv;
  csv << "id";
  for (const auto& ax : cfg.sweep.axes) csv << ',' << ax.section << '.' << ax.key;
  csv << ",status,message\n";
  int worst = 0;
  for (const auto& o : res) {
    csv << o.id;
    for (const auto& v : o.values) csv << ',' << csv_field(v);
    csv << ',' << o.status << ',' << csv_field(o.message) << '\n';
    worst = std::max(worst, o.status);
  }
  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream f(std::filesystem::path(cfg.output_dir) / (cfg.id + "_sweep.csv"), std::ios::binary);
  f << csv.str();
  out << csv.str();
  return worst;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"saturex: flux-saturated diffusion toolkit", "saturex"};
  app.require_subcommand(1);

  ModelArgs check_m, inspect_m, cost_m;
  std::string out_path, sidecar, grid = "-1.5:1.5:0.1", config_path;
  double z_max = 1.0, c0 = 0.5;
  int samples = 1000, threads = 0;
  std::uint64_t seed = 1;

  auto* check = app.add_subcommand("check", "assumption report as JSON");
  check_m.add(check);
  check->add_option("--z-max", z_max, "range for the phi checks");
  check->add_option("--out", out_path, "write to a file instead of stdout");

  auto* inspect = app.add_subcommand("inspect", "flux and Lagrangian samples with growth constants as JSON");
  inspect_m.add(inspect);
  inspect->add_option("--c0", c0, "lower-bound constant in (0,1)");
  inspect->add_option("--samples", samples, "random samples for the growth bound");
  inspect->add_option("--seed", seed, "seed for the random samples");
  inspect->add_option("--out", out_path, "write to a file instead of stdout");

  auto* cost = app.add_subcommand("cost", "cost table as CSV");
  cost_m.add(cost);
  cost->add_option("--grid", grid, "velocity grid a:b:step or v1,v2,...");
  cost->add_option("--out", out_path, "write the CSV to a file instead of stdout");
  cost->add_option("--sidecar", sidecar, "also write the table and boundary values as JSON");

  auto* simulate = app.add_subcommand("simulate", "run a config and write the trajectory");
  simulate->add_option("config", config_path, "experiment config")->required();
  auto* verify = app.add_subcommand("verify", "run a config and check it against the predictions");
  verify->add_option("config", config_path, "experiment config")->required();
  auto* sweep = app.add_subcommand("sweep", "run the [sweep] grid of a config in parallel");
  sweep->add_option("config", config_path, "experiment config")->required();
  sweep->add_option("--threads", threads, "worker count (default SATUREX_THREADS or all cores)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (check->parsed()) return cmd_check(check_m, z_max, out_path, out);
    if (inspect->parsed()) return cmd_inspect(inspect_m, c0, samples, seed, out_path, out);
    if (cost->parsed()) return cmd_cost(cost_m, grid, out_path, sidecar, out);
    if (simulate->parsed()) return cmd_simulate(config_path, out);
    if (verify->parsed()) return cmd_verify(config_path, out);
    if (sweep->parsed()) return cmd_sweep(config_path, threads, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    err << "model error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace saturex
