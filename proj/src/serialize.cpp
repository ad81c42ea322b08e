#include "saturex/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace saturex {

std::string fmt17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "infinite" : "-infinite";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json num(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "infinite" : "-infinite";
  return x;
}

namespace {

Json vec(const Vec& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

}  // namespace

Json to_json(const TailFit& f) {
  Json j;
  j["reported"] = f.reported;
  j["super_polynomial"] = f.super_polynomial;
  j["exponent"] = f.reported ? num(f.exponent) : Json(nullptr);
  j["residual"] = num(f.residual);
  j["r_lo"] = f.r_lo;
  j["r_hi"] = f.r_hi;
  return j;
}

Json to_json(const AssumptionItem& it) {
  Json j;
  j["item"] = it.item;
  j["verdict"] = to_string(it.verdict);
  j["worst_point"] = num(it.worst_point);
  j["residual"] = num(it.residual);
  j["fitted_exponent"] = it.fitted_exponent ? num(*it.fitted_exponent) : Json(nullptr);
  if (!it.note.empty()) j["note"] = it.note;
  return j;
}

Json to_json(const AssumptionReport& rep) {
  Json j;
  j["model"] = rep.model_id;
  j["dimension"] = rep.dimension;
  Json items = Json::array();
  for (const auto& it : rep.items) items.push_back(to_json(it));
  j["items"] = items;
  j["assumptions_pass"] = rep.assumptions_pass();
  j["persistence"] = rep.persistence_holds();
  j["c_equals_s_allowed"] = rep.allows_c_equal_s();
  j["d_fit"] = to_json(rep.d_fit);
  j["dpsi_fit"] = to_json(rep.dpsi_fit);
  j["grid"] = {{"log_min", rep.grid.log_min},
               {"log_max", rep.grid.log_max},
               {"n_log", rep.grid.log_points.size()},
               {"lin_max", rep.grid.lin_max},
               {"n_lin", rep.grid.linear_points.size()}};
  j["tolerances"] = {{"sat_tol", rep.tol.sat_tol},     {"mono_tol", rep.tol.mono_tol},
                     {"fit_tol", rep.tol.fit_tol},     {"odd_tol", rep.tol.odd_tol},
                     {"exponent_tol", rep.tol.exponent_tol}, {"persistence_eps", rep.tol.persistence_eps}};
  return j;
}

Json to_json(const PhiReport& rep) {
  Json j;
  j["phi"] = rep.phi_id;
  j["z_max"] = rep.z_max;
  Json items = Json::array();
  for (const auto& it : rep.items) items.push_back(to_json(it));
  j["items"] = items;
  j["pass"] = rep.pass();
  j["phi_prime0"] = num(rep.phi_prime0);
  j["lipschitz"] = num(rep.lipschitz);
  j["convex"] = rep.convex;
  j["strictly_convex"] = rep.strictly_convex;
  return j;
}

Json to_json(const GrowthConstants& gc) {
  return Json{{"c0", gc.c0}, {"C0", gc.C0}, {"D0", gc.D0}, {"r_tilde", gc.r_tilde}};
}

Json to_json(const GrowthCheck& gc) {
  return Json{{"samples", gc.samples},
              {"holds", gc.holds},
              {"worst_margin", num(gc.worst_margin)},
              {"worst_z", num(gc.worst_z)},
              {"worst_xi", vec(gc.worst_xi)}};
}

Json to_json(const BoundaryValue& bv) {
  Json j;
  j["value"] = num(bv.value);
  j["classification"] = to_string(bv.classification);
  j["body"] = num(bv.body);
  j["tail"] = num(bv.tail);
  j["tail_exponent"] = num(bv.tail_exponent);
  j["tail_residual"] = num(bv.tail_residual);
  if (!bv.diagnostic.empty()) j["diagnostic"] = bv.diagnostic;
  return j;
}

Json to_json(const CostTable& table) {
  Json j;
  j["model"] = table.model_id;
  j["s"] = table.s;
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json row;
    row["v"] = vec(r.v);
    row["k"] = num(r.k);
    row["classification"] = to_string(r.classification);
    row["pbar"] = num(r.pbar);
    row["residual"] = num(r.residual);
    row["closed_form"] = r.closed_form ? num(*r.closed_form) : Json(nullptr);
    if (!r.diagnostic.empty()) row["diagnostic"] = r.diagnostic;
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j;
}

Json to_json(const LineFit& f) {
  return Json{{"slope", num(f.slope)}, {"intercept", num(f.intercept)}, {"residual", num(f.residual)}, {"n", f.n}};
}

Json to_json(const EdgeSeries& es) {
  Json j;
  j["threshold"] = es.threshold;
  j["t"] = vec(es.t);
  j["left"] = vec(es.left);
  j["right"] = vec(es.right);
  j["left_fit"] = to_json(es.left_fit);
  j["right_fit"] = to_json(es.right_fit);
  j["left_interval_speeds"] = vec(es.left_interval_speeds);
  j["right_interval_speeds"] = vec(es.right_interval_speeds);
  return j;
}

Json to_json(const Jump& jp) {
  return Json{{"position", jp.position},   {"interface", jp.interface},   {"u_plus", jp.u_plus},
              {"u_minus", jp.u_minus},     {"orientation", jp.orientation}, {"layer_lo", jp.layer_lo},
              {"layer_hi", jp.layer_hi}};
}

Json to_json(const JumpTrack& jt) {
  Json j;
  j["t"] = vec(jt.t);
  j["position"] = vec(jt.position);
  j["u_plus"] = vec(jt.u_plus);
  j["u_minus"] = vec(jt.u_minus);
  j["edge_flux"] = vec(jt.edge_flux);
  j["phi_plus"] = vec(jt.phi_plus);
  j["fit"] = to_json(jt.fit);
  j["persisted"] = jt.persisted;
  return j;
}

Json to_json(const Check& c) {
  Json j{{"name", c.name},
         {"pass", c.pass},
         {"measured", num(c.measured)},
         {"expected", num(c.expected)},
         {"tolerance", num(c.tolerance)}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

Json to_json(const FrontReport& rep) {
  Json j;
  j["model"] = rep.model_id;
  j["edges"] = to_json(rep.edges);
  Json jumps = Json::array();
  for (const auto& snap : rep.jumps) {
    Json a = Json::array();
    for (const auto& jp : snap) a.push_back(to_json(jp));
    jumps.push_back(a);
  }
  j["jumps"] = jumps;
  j["tracked"] = to_json(rep.tracked);
  j["predicted_edge_speed"] = num(rep.predicted_edge_speed);
  j["predicted_jump_speed"] = num(rep.predicted_jump_speed);
  Json checks = Json::array();
  for (const auto& c : rep.checks) checks.push_back(to_json(c));
  j["checks"] = checks;
  j["all_pass"] = rep.all_pass();
  return j;
}

Json to_json(const ProfileSpec& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  if (p.is_super()) {
    j["beta"] = p.beta;
    j["a"] = p.a;
    j["b"] = p.b;
    j["theta_speed"] = p.theta_speed;
  } else {
    j["A"] = p.A;
    j["R"] = p.R;
    j["c"] = p.c;
    j["theta"] = p.theta;
    j["gamma0"] = p.gamma0;
    j["center"] = p.center;
    j["infimum"] = num(p.infimum);
    j["worst_lambda"] = p.worst_lambda;
    j["worst_time"] = p.worst_time;
  }
  j["T"] = num(p.T);
  return j;
}

Json to_json(const OrderingReport& rep) {
  Json j;
  j["profile"] = rep.profile;
  j["initial_metric"] = rep.initial_metric;
  j["tol"] = rep.tol;
  Json v = Json::array();
  for (const auto& x : rep.verdicts) v.push_back(Json{{"t", x.t}, {"metric", x.metric}, {"bound", x.bound}, {"pass", x.pass}});
  j["verdicts"] = v;
  j["all_pass"] = rep.all_pass();
  return j;
}

Json to_json(const ContractionReport& rep) {
  return Json{{"t", vec(rep.t)},         {"forward", vec(rep.forward)},
              {"backward", vec(rep.backward)}, {"tol", rep.tol},
              {"forward_pass", rep.forward_pass}, {"backward_pass", rep.backward_pass}};
}

Json to_json(const Grid1D& g) { return Json{{"x_min", g.x_min}, {"x_max", g.x_max}, {"n_cells", g.n_cells}, {"dx", g.dx()}}; }

Json to_json(const SolverConfig& cfg) {
  return Json{{"cfl", cfg.cfl},
              {"u_floor_rel", cfg.u_floor_rel},
              {"end_time", cfg.end_time},
              {"snapshot_times", vec(cfg.snapshot_times)},
              {"averaging", to_string(cfg.averaging)}};
}

Json trajectory_metadata(const Trajectory& tr) {
  Json j;
  j["model"] = tr.model_id;
  j["grid"] = to_json(tr.grid);
  j["solver"] = to_json(tr.cfg);
  j["u0_max"] = tr.u0_max;
  j["mass0"] = tr.mass0;
  j["steps"] = tr.steps;
  j["dt"] = Json{{"min", tr.dt.min}, {"max", tr.dt.max}, {"mean", tr.dt.count ? tr.dt.sum / tr.dt.count : 0.0}, {"count", tr.dt.count}};
  j["max_mass_drift"] = tr.max_mass_drift;
  j["clipped_mass"] = tr.clipped_mass;
  j["max_step_clip"] = tr.max_step_clip;
  Json snaps = Json::array();
  for (const auto& s : tr.snapshots) snaps.push_back(Json{{"t_requested", s.t_requested}, {"t", s.t}, {"mass", s.mass}});
  j["snapshots"] = snaps;
  return j;
}

void write_cost_csv(std::ostream& os, const CostTable& table) {
  const size_t d = table.rows.empty() ? 1 : table.rows.front().v.size();
  if (d == 1) {
    os << "v";
  } else {
    for (size_t i = 0; i < d; ++i) os << (i ? "," : "") << "v" << i + 1;
  }
  os << ",k,classification,pbar,residual,closed_form\n";
  for (const auto& r : table.rows) {
    for (size_t i = 0; i < r.v.size(); ++i) os << (i ? "," : "") << fmt17(r.v[i]);
    os << ',' << (r.classification == CostClass::Infinite ? std::string("infinite") : fmt17(r.k));
    os << ',' << to_string(r.classification);
    os << ',' << fmt17(r.pbar) << ',' << fmt17(r.residual) << ',';
    if (r.closed_form) os << fmt17(*r.closed_form);
    os << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,x,u\n";
  const Vec xs = tr.grid.centers();
  for (const auto& s : tr.snapshots) {
    const std::string ts = fmt17(s.t);
    for (size_t i = 0; i < s.u.size(); ++i) os << ts << ',' << fmt17(xs[i]) << ',' << fmt17(s.u[i]) << '\n';
  }
}

}  // namespace saturex
