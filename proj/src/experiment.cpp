#include "saturex/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "saturex/errors.hpp"

namespace saturex {

namespace {

Check make_check(std::string name, bool pass, double measured, double expected, double tol, std::string detail = {}) {
  Check c;
  c.name = std::move(name);
  c.pass = pass;
  c.measured = measured;
  c.expected = expected;
  c.tolerance = tol;
  c.detail = std::move(detail);
  return c;
}

double median_of(Vec v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

JumpPick parse_pick(const std::string& s) {
  if (s == "leftmost") return JumpPick::Leftmost;
  if (s == "rightmost_interior") return JumpPick::RightmostInterior;
  return JumpPick::Rightmost;
}

void edge_bound_check(const EdgeSeries& es, const Vec& speeds, double theta, double slack_dx, const std::string& name,
                      std::vector<Check>& out) {
  bool pass = true;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_allow = theta;
  for (size_t k = 0; k < speeds.size(); ++k) {
    const double dt = es.t[k + 1] - es.t[k];
    const double allow = theta + slack_dx / dt;
    if (!std::isfinite(speeds[k])) continue;
    if (speeds[k] > allow) pass = false;
    if (speeds[k] - allow > worst - worst_allow) {
      worst = speeds[k];
      worst_allow = allow;
    }
  }
  out.push_back(make_check(name, pass, worst, theta, worst_allow - theta, "interval speed <= theta + slack*dx/dt_snapshot"));
}

void front_checks(const ExperimentConfig& cfg, const ModelSpec& model, const Trajectory& tr, FrontReport& rep) {
  const VerifySpec& v = cfg.verify;
  const double dx = tr.grid.dx();
  if (v.support) {
    rep.edges = track_support(tr, edge_threshold(tr, v.edge_threshold_rel));
    const double theta = max_phi_prime(model.phi, tr.u0_max);
    std::optional<double> expected = v.edge_speed;
    if (!expected && model.phi.kind() == PhiKind::LinearSpeed) expected = model.s;
    rep.predicted_edge_speed = expected.value_or(theta);
    if (expected) {
      for (const auto& [name, fit] : {std::pair{"edge_speed_right", rep.edges.right_fit}, std::pair{"edge_speed_left", rep.edges.left_fit}}) {
        const double tol = v.edge_speed_tol * *expected;
        const bool pass = std::isfinite(fit.slope) && std::abs(fit.slope - *expected) <= tol;
        rep.checks.push_back(make_check(name, pass, fit.slope, *expected, tol, "least squares over the last half of the snapshots"));
      }
    }
    edge_bound_check(rep.edges, rep.edges.right_interval_speeds, theta, v.edge_slack_cells * dx, "edge_bound_right", rep.checks);
    edge_bound_check(rep.edges, rep.edges.left_interval_speeds, theta, v.edge_slack_cells * dx, "edge_bound_left", rep.checks);
  }
  if (v.jump) {
    JumpParams prm;
    prm.threshold = v.jump_threshold;
    prm.plateau_width = v.jump_plateau;
    prm.skip = v.jump_skip;
    prm.span = v.jump_span;
    for (const auto& s : tr.snapshots) rep.jumps.push_back(detect_jumps(s.u, tr.grid, prm));
    const JumpPick pick = parse_pick(v.jump_pick);
    rep.tracked = track_jump(tr, model, prm, pick, v.jump_t_from, v.jump_t_to, v.jump_fit_fraction);
    const JumpTrack& jt = rep.tracked;
    const size_t m = jt.t.size();
    const double gap = m ? jt.u_plus.back() - jt.u_minus.back() : 0.0;
    rep.checks.push_back(make_check("jump_persists", jt.persisted && gap > v.jump_min_gap, gap, v.jump_min_gap, 0.0,
                                    jt.persisted ? "u+ - u- at the last snapshot of the window" : "no jump at the last snapshot of the window"));
    if (model.phi.kind() == PhiKind::LinearSpeed) {
      const AssumptionReport ar = check_assumptions(model);
      rep.checks.push_back(make_check("persistence_classification", ar.persistence_holds(), ar.dpsi_fit.exponent,
                                      2.0 + ar.tol.persistence_eps, ar.tol.exponent_tol, "fitted psi' tail exponent"));
    }
    double predicted = std::numeric_limits<double>::quiet_NaN();
    if (v.jump_speed) {
      predicted = *v.jump_speed;
    } else if (m) {
      const size_t cnt = std::max<size_t>(1, static_cast<size_t>(std::ceil(v.jump_fit_fraction * static_cast<double>(m))));
      const Vec up(jt.u_plus.end() - static_cast<long>(std::min(cnt, m)), jt.u_plus.end());
      const Vec um(jt.u_minus.end() - static_cast<long>(std::min(cnt, m)), jt.u_minus.end());
      const double a = median_of(up), b = median_of(um);
      if (a > b) predicted = rh_speed(model.phi, a, b);
    }
    rep.predicted_jump_speed = predicted;
    const double sign = pick == JumpPick::Leftmost ? -1.0 : 1.0;
    const double measured = sign * jt.fit.slope;
    const double tol = v.jump_speed_tol * std::abs(predicted);
    const bool pass = std::isfinite(measured) && std::isfinite(predicted) && std::abs(measured - predicted) <= tol;
    rep.checks.push_back(make_check("jump_speed", pass, measured, predicted, tol,
                                    "fit over the last " + std::to_string(jt.fit.n) + " detections"));
  }
}

}  // namespace

bool VerifyResult::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

Trajectory simulate_experiment(const ExperimentConfig& cfg) {
  const ModelSpec model = cfg.model();
  return run(model, cfg.grid, cfg.initial_datum(), cfg.solver);
}

VerifyResult verify_experiment(const ExperimentConfig& cfg) {
  const ModelSpec model = cfg.model();
  const VerifySpec& v = cfg.verify;
  VerifyResult res;
  res.id = cfg.id;
  std::future<Trajectory> second;
  if (v.contraction) {
    DatumSpec wide = cfg.datum.widened(v.contraction_widen);
    const Vec u1 = wide.cell_averages(cfg.grid);
    second = std::async(std::launch::async, [&model, &cfg, u1] { return run(model, cfg.grid, u1, cfg.solver); });
  }
  res.trajectory = run(model, cfg.grid, cfg.initial_datum(), cfg.solver);
  const Trajectory& tr = res.trajectory;
  const double dx = tr.grid.dx();
  const double tol = v.tol_cells * dx * tr.u0_max;
  const double T = cfg.solver.end_time;

  res.front.model_id = model.id();
  front_checks(cfg, model, tr, res.front);
  res.checks = res.front.checks;

  auto add_ordering = [&](const ProfileSpec& p) {
    ProfileOrdering po{p, verify_profile_ordering(tr, p, tol)};
    double worst = 0.0;
    for (const auto& x : po.report.verdicts) worst = std::max(worst, x.metric);
    res.checks.push_back(make_check(po.report.profile + "_ordering", po.report.all_pass(), worst,
                                    po.report.initial_metric, tol, "max over snapshots of the ordering defect"));
    res.orderings.push_back(std::move(po));
  };
  if (v.super) {
    int i0 = -1, i1 = -1;
    for (int i = 0; i < tr.grid.n_cells; ++i)
      if (tr.u0[static_cast<size_t>(i)] > 0.0) {
        if (i0 < 0) i0 = i;
        i1 = i;
      }
    if (i0 < 0) throw ConfigError("[verify] super: the initial datum is identically zero");
    add_ordering(super_indicator(model, tr.u0_max, tr.grid.x_min + i0 * dx, tr.grid.x_min + (i1 + 1) * dx, T));
  }
  if (v.sub == SubProfile::Semicircle) add_ordering(sub_semicircle(model, v.sub_R, v.sub_c, T, v.sub_center));
  if (v.sub == SubProfile::ThetaPower)
    add_ordering(sub_theta_power(model, v.sub_R, v.sub_c, v.sub_theta, v.sub_gamma0, T, v.sub_center));
  if (v.contraction) {
    const Trajectory tr2 = second.get();
    const double tol2 = v.tol_cells * dx * std::max(tr.u0_max, tr2.u0_max);
    res.contraction = l1_contraction(tr, tr2, tol2);
    const ContractionReport& c = *res.contraction;
    auto growth = [](const Vec& m) {
      double best = m[0], worst = 0.0;
      for (size_t k = 1; k < m.size(); ++k) {
        worst = std::max(worst, m[k] - best);
        best = std::min(best, m[k]);
      }
      return worst;
    };
    res.checks.push_back(make_check("contraction_forward", c.forward_pass, growth(c.forward), 0.0, tol2,
                                    "largest increase of ||(u - v)^+||_1 over its running minimum"));
    res.checks.push_back(make_check("contraction_backward", c.backward_pass, growth(c.backward), 0.0, tol2,
                                    "largest increase of ||(v - u)^+||_1 over its running minimum"));
  }
  return res;
}

Json to_json(const VerifyResult& r) {
  Json j;
  j["id"] = r.id;
  j["run"] = trajectory_metadata(r.trajectory);
  j["front"] = to_json(r.front);
  Json ords = Json::array();
  for (const auto& po : r.orderings) ords.push_back(Json{{"profile", to_json(po.profile)}, {"report", to_json(po.report)}});
  j["orderings"] = ords;
  j["contraction"] = r.contraction ? to_json(*r.contraction) : Json(nullptr);
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = checks;
  j["all_pass"] = r.all_pass();
  return j;
}

namespace {

std::filesystem::path prepare_dir(const ExperimentConfig& cfg) {
  std::filesystem::path dir(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("[output] dir: cannot create '" + cfg.output_dir + "': " + ec.message());
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw ConfigError("[output] dir: cannot write '" + p.string() + "'");
  f << text;
}

}  // namespace

std::string write_simulation(const ExperimentConfig& cfg, const Trajectory& tr) {
  const auto dir = prepare_dir(cfg);
  const auto csv = dir / (cfg.id + "_trajectory.csv");
  std::ofstream f(csv, std::ios::binary);
  if (!f) throw ConfigError("[output] dir: cannot write '" + csv.string() + "'");
  write_trajectory_csv(f, tr);
  Json meta = trajectory_metadata(tr);
  meta["id"] = cfg.id;
  meta["seed"] = cfg.seed;
  write_file(dir / (cfg.id + "_meta.json"), meta.dump(2) + "\n");
  return csv.string();
}

std::string write_verification(const ExperimentConfig& cfg, const VerifyResult& r) {
  const auto dir = prepare_dir(cfg);
  const auto p = dir / (cfg.id + "_report.json");
  write_file(p, to_json(r).dump(2) + "\n");
  return p.string();
}

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
  const auto& axes = cfg.sweep.axes;
  if (axes.empty()) throw ConfigError("[sweep] needs at least one <section>.<key> axis");
  std::vector<ExperimentConfig> out;
  std::vector<size_t> idx(axes.size(), 0);
  int count = 0;
  while (true) {
    RawConfig raw = cfg.raw;
    raw.erase("sweep");
    for (size_t a = 0; a < axes.size(); ++a) raw[axes[a].section][axes[a].key] = axes[a].values[idx[a]];
    raw["experiment"]["id"] = cfg.id + "_" + std::to_string(count++);
    out.push_back(config_from_raw(raw));
    size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++idx[a] < axes[a].values.size()) break;
      idx[a] = 0;
      if (a == 0) return out;
    }
  }
}

int sweep_threads() {
  if (const char* env = std::getenv("SATUREX_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<int>(std::min<long>(n, 1024));
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

std::vector<SweepOutcome> run_sweep(const ExperimentConfig& cfg, int threads) {
  const auto children = expand_sweep(cfg);
  std::vector<SweepOutcome> out(children.size());
  std::vector<size_t> idx(cfg.sweep.axes.size(), 0);
  for (size_t k = 0; k < children.size(); ++k) {
    out[k].id = children[k].id;
    for (size_t a = 0; a < idx.size(); ++a) out[k].values.push_back(cfg.sweep.axes[a].values[idx[a]]);
    for (size_t a = idx.size(); a > 0; --a) {
      if (++idx[a - 1] < cfg.sweep.axes[a - 1].values.size()) break;
      idx[a - 1] = 0;
    }
  }
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < children.size(); k = next++) {
      const ExperimentConfig& c = children[k];
      SweepOutcome& o = out[k];
      try {
        if (cfg.sweep.mode == "simulate") {
          o.message = write_simulation(c, simulate_experiment(c));
        } else {
          const VerifyResult r = verify_experiment(c);
          o.message = write_verification(c, r);
          o.status = r.all_pass() ? 0 : 1;
        }
      } catch (const ConfigError& e) {
        o.status = 2;
        o.message = e.what();
      } catch (const ModelError& e) {
        o.status = 2;
        o.message = e.what();
      } catch (const SolverError& e) {
        o.status = 2;
        o.message = e.what();
      } catch (const std::exception& e) {
        o.status = 1;
        o.message = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(children.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace saturex
