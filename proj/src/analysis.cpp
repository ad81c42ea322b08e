#include "saturex/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "saturex/errors.hpp"

namespace saturex {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double median(Vec v) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_of(const Vec& u) {
  double m = 0.0;
  for (double x : u) m = std::max(m, x);
  return m;
}

}  // namespace

LineFit least_squares(const Vec& t, const Vec& y) {
  LineFit f;
  double mt = 0, my = 0;
  int n = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) continue;
    mt += t[i];
    my += y[i];
    ++n;
  }
  f.n = n;
  if (n < 2) return f;
  mt /= n;
  my /= n;
  double stt = 0, sty = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) continue;
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
  }
  if (stt == 0.0) return f;
  f.slope = sty / stt;
  f.intercept = my - f.slope * mt;
  double ss = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(y[i])) continue;
    const double e = y[i] - (f.intercept + f.slope * t[i]);
    ss += e * e;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

// ---------------------------------------------------------------- support

double edge_threshold(const Trajectory& tr, double rel) { return rel * tr.u0_max; }

EdgeSeries track_support(const Trajectory& tr, double threshold) {
  if (!(threshold > 0.0)) throw AnalysisError("support threshold must be positive");
  EdgeSeries es;
  es.threshold = threshold;
  const Grid1D& g = tr.grid;
  const double dx = g.dx();
  const int n = g.n_cells;
  for (const Snapshot& s : tr.snapshots) {
    const Vec& u = s.u;
    int i = 0;
    while (i < n && !(u[static_cast<size_t>(i)] > threshold)) ++i;
    es.t.push_back(s.t);
    if (i == n) {
      es.left.push_back(kNaN);
      es.right.push_back(kNaN);
      continue;
    }
    int j = n - 1;
    while (!(u[static_cast<size_t>(j)] > threshold)) --j;
    if (i == 0 || j == n - 1)
      throw AnalysisError("support reaches the domain boundary at t = " + num(s.t) + "; enlarge the domain");
    const double ui = u[static_cast<size_t>(i)], ul = u[static_cast<size_t>(i - 1)];
    es.left.push_back(g.center(i) - (ui - threshold) / (ui - ul) * dx);
    const double uj = u[static_cast<size_t>(j)], ur = u[static_cast<size_t>(j + 1)];
    es.right.push_back(g.center(j) + (uj - threshold) / (uj - ur) * dx);
  }
  const size_t m = es.t.size();
  for (size_t k = 1; k < m; ++k) {
    const double dt = es.t[k] - es.t[k - 1];
    es.right_interval_speeds.push_back(dt > 0 ? (es.right[k] - es.right[k - 1]) / dt : kNaN);
    es.left_interval_speeds.push_back(dt > 0 ? -(es.left[k] - es.left[k - 1]) / dt : kNaN);
  }
  if (m >= 2) {
    const size_t cnt = std::max<size_t>(2, (m + 1) / 2);
    const size_t k0 = m - cnt;
    const Vec tt(es.t.begin() + static_cast<long>(k0), es.t.end());
    const Vec rr(es.right.begin() + static_cast<long>(k0), es.right.end());
    Vec ll(es.left.begin() + static_cast<long>(k0), es.left.end());
    es.right_fit = least_squares(tt, rr);
    for (double& x : ll) x = -x;
    es.left_fit = least_squares(tt, ll);
  }
  return es;
}

// ---------------------------------------------------------------- jumps

std::vector<Jump> detect_jumps(const Vec& u, const Grid1D& grid, const JumpParams& prm) {
  if (prm.plateau_width < 2) throw AnalysisError("plateau_width must be >= 2");
  if (prm.span < 1) throw AnalysisError("jump stencil span must be >= 1");
  if (prm.skip < 0) throw AnalysisError("jump skip must be >= 0");
  std::vector<Jump> out;
  const int n = static_cast<int>(u.size());
  const double umax = max_of(u);
  if (n < 2 || umax <= 0.0) return out;
  const double thr = prm.threshold * umax;
  const int s = prm.span;
  auto at = [&](int i) { return u[static_cast<size_t>(std::clamp(i, 0, n - 1))]; };
  std::vector<int> sign(static_cast<size_t>(n - 1), 0);
  for (int k = 0; k + 1 < n; ++k) {
    const double d = at(k + s) - at(k + 1 - s);
    if (std::abs(d) > thr) sign[static_cast<size_t>(k)] = d > 0 ? 1 : -1;
  }
  int k = 0;
  while (k + 1 < n) {
    if (sign[static_cast<size_t>(k)] == 0) {
      ++k;
      continue;
    }
    const int sg = sign[static_cast<size_t>(k)];
    int k1 = k;
    while (k1 + 2 < n && sign[static_cast<size_t>(k1 + 1)] == sg) ++k1;
    int kstar = k;
    double best = -1;
    for (int q = k; q <= k1; ++q) {
      const double d = std::abs(at(q + 1) - at(q));
      if (d > best) {
        best = d;
        kstar = q;
      }
    }
    int cl = std::min(k + s - 1, kstar);
    int cr = std::max(k1 - s + 2, kstar + 1);
    Vec left, right;
    for (int i = cl - prm.skip - prm.plateau_width + 1; i <= cl - prm.skip; ++i)
      if (i >= 0 && i < n) left.push_back(u[static_cast<size_t>(i)]);
    for (int i = cr + prm.skip; i <= cr + prm.skip + prm.plateau_width - 1; ++i)
      if (i >= 0 && i < n) right.push_back(u[static_cast<size_t>(i)]);
    if (!left.empty() && !right.empty()) {
      const double ml = median(left), mr = median(right);
      if (ml != mr) {
        Jump j;
        j.interface = kstar;
        j.position = grid.x_min + (kstar + 1) * grid.dx();
        j.u_plus = std::max(ml, mr);
        j.u_minus = std::max(0.0, std::min(ml, mr));
        j.orientation = ml > mr ? 1 : -1;
        j.layer_lo = cl;
        j.layer_hi = cr;
        if (j.u_plus > j.u_minus) out.push_back(j);
      }
    }
    k = k1 + 1;
  }
  return out;
}

JumpTrack track_jump(const Trajectory& tr, const ModelSpec& model, const JumpParams& prm, JumpPick pick,
                     double t_from, double t_to, double fit_fraction, double interior_floor) {
  JumpTrack jt;
  const double dx = tr.grid.dx();
  const double floor = tr.cfg.u_floor_rel * tr.u0_max;
  bool last_found = false;
  for (const Snapshot& s : tr.snapshots) {
    if (s.t < t_from || s.t > t_to) continue;
    const auto jumps = detect_jumps(s.u, tr.grid, prm);
    const double umax = max_of(s.u);
    const Jump* chosen = nullptr;
    for (const Jump& j : jumps) {
      switch (pick) {
        case JumpPick::Rightmost:
          if (j.orientation == 1) chosen = &j;
          break;
        case JumpPick::Leftmost:
          if (!chosen && j.orientation == -1) chosen = &j;
          break;
        case JumpPick::RightmostInterior:
          if (j.orientation == 1 && j.u_minus > interior_floor * umax) chosen = &j;
          break;
      }
    }
    last_found = chosen != nullptr;
    if (!chosen) continue;
    jt.t.push_back(s.t);
    jt.position.push_back(chosen->position);
    jt.u_plus.push_back(chosen->u_plus);
    jt.u_minus.push_back(chosen->u_minus);
    const size_t k = static_cast<size_t>(chosen->interface);
    jt.edge_flux.push_back(interface_flux(model, s.u[k], s.u[k + 1], dx, tr.cfg, floor));
    jt.phi_plus.push_back(model.phi.value(chosen->u_plus));
  }
  jt.persisted = last_found;
  const size_t m = jt.t.size();
  if (m >= 2) {
    const size_t cnt = std::max<size_t>(2, static_cast<size_t>(std::ceil(fit_fraction * static_cast<double>(m))));
    const size_t k0 = m - std::min(cnt, m);
    jt.fit = least_squares(Vec(jt.t.begin() + static_cast<long>(k0), jt.t.end()),
                           Vec(jt.position.begin() + static_cast<long>(k0), jt.position.end()));
  }
  return jt;
}

// ---------------------------------------------------------------- Rankine-Hugoniot

double rh_speed(const PhiFamily& phi, double u_plus, double u_minus) {
  if (!(u_minus >= 0.0) || !(u_plus > u_minus))
    throw AnalysisError("rh_speed needs u_plus > u_minus >= 0, got (" + num(u_plus) + ", " + num(u_minus) + ")");
  if (phi.kind() == PhiKind::LinearSpeed) return phi.speed();
  return (phi.value(u_plus) - phi.value(u_minus)) / (u_plus - u_minus);
}

double admissible_minus(const PhiFamily& phi, double u_plus, double v) {
  if (!(u_plus > 0.0)) throw AnalysisError("admissible_minus needs u_plus > 0");
  const PhiReport rep = check_phi(phi, u_plus);
  if (!rep.strictly_convex) throw AnalysisError("admissible_minus needs a strictly convex phi; '" + phi.id() + "' is not");
  const double fp = phi.value(u_plus);
  const double lo_v = fp / u_plus, hi_v = phi.derivative(u_plus);
  if (!(v >= lo_v && v < hi_v))
    throw AnalysisError("speed " + num(v) + " outside the admissible interval [" + num(lo_v) + ", " + num(hi_v) + ")");
  if (v == lo_v) return 0.0;
  auto q = [&](double x) { return (fp - phi.value(x)) / (u_plus - x); };
  double lo = 0.0, hi = u_plus;
  for (int it = 0; it < 300 && hi - lo > 1e-17 * u_plus; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid >= u_plus) break;
    if (q(mid) < v)
      lo = mid;
    else
      hi = mid;
  }
  const double x = 0.5 * (lo + hi);
  const double res = std::abs(q(x) - v);
  if (res > 1e-10 * std::max(1.0, std::abs(v)))
    throw AnalysisError("admissible_minus bisection residual " + num(res) + " above 1e-10");
  return x;
}

// ---------------------------------------------------------------- profiles

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::SuperIndicator:
      return "super_indicator";
    case ProfileKind::SubSemicircle:
      return "sub_semicircle";
    case ProfileKind::SubThetaPower:
      return "sub_theta_power";
  }
  return "unknown";
}

double ProfileSpec::eval(double t, double x) const {
  switch (kind) {
    case ProfileKind::SuperIndicator: {
      const double lo = a - theta_speed * t, hi = b + theta_speed * t;
      return (x > lo && x < hi) ? beta : 0.0;
    }
    case ProfileKind::SubSemicircle: {
      const double Rt = radius(t), y = x - center;
      if (std::abs(y) >= Rt) return 0.0;
      return std::exp(-A * t) * std::sqrt((Rt - y) * (Rt + y));
    }
    case ProfileKind::SubThetaPower: {
      const double Rt = radius(t), y = x - center;
      if (std::abs(y) >= Rt) return 0.0;
      return std::exp(-A * t) * (std::pow((Rt - y) * (Rt + y), theta) + gamma0);
    }
  }
  return 0.0;
}

Vec ProfileSpec::sample(double t, const Grid1D& grid) const {
  Vec w(static_cast<size_t>(grid.n_cells));
  for (int i = 0; i < grid.n_cells; ++i) w[static_cast<size_t>(i)] = eval(t, grid.center(i));
  return w;
}

ProfileSpec super_indicator(const ModelSpec& model, double beta, double a, double b, double T) {
  if (!(beta > 0.0)) throw AnalysisError("super_indicator needs beta > 0");
  if (!(b > a)) throw AnalysisError("super_indicator needs an interval a < b");
  ProfileSpec p;
  p.kind = ProfileKind::SuperIndicator;
  p.beta = beta;
  p.a = a;
  p.b = b;
  p.T = T;
  p.theta_speed = max_phi_prime(model.phi, beta);
  return p;
}

std::vector<std::pair<double, double>> lambda_grid() {
  std::vector<std::pair<double, double>> g;
  g.emplace_back(0.0, 1.0);
  const int n1 = 99, n2 = 100;
  const double a = std::log10(1e-3), b = std::log10(0.9);
  for (int i = 0; i < n1; ++i) {
    const double lam = std::pow(10.0, a + (b - a) * i / (n1 - 1));
    g.emplace_back(lam, 1.0 - lam);
  }
  for (int i = 0; i < n2; ++i) {
    const double delta = std::pow(10.0, -1.0 - 5.0 * (i + 1) / n2);
    g.emplace_back(1.0 - delta, delta);
  }
  return g;
}

double sub_inequality_rhs(const ModelSpec& model, double R_t, double c, double theta, double gamma0, double lambda,
                          double delta) {
  const double s = model.s, L = model.L;
  const double w = R_t * R_t * delta * (2.0 - delta);
  const double x = lambda * R_t;
  const double P = std::pow(w, theta) + gamma0;
  const double Px = -2.0 * theta * x * std::pow(w, theta - 1.0);
  const double Pxx = std::pow(w, theta - 2.0) * (2.0 * theta * (2.0 * theta - 1.0) * x * x - 2.0 * theta * R_t * R_t);
  const double rho = L * Px / P;
  const double flux = s * (Px * model.psi.value(rho) + L * model.psi.derivative(rho) * (Pxx - Px * Px / P));
  return (flux - 2.0 * theta * c * R_t * std::pow(w, theta - 1.0)) / P;
}

namespace {

void search_A(const ModelSpec& model, ProfileSpec& p) {
  if (!std::isfinite(p.T) || p.T < 0.0) throw AnalysisError("sub-solution needs a finite validity window T >= 0");
  const auto grid = lambda_grid();
  double inf = std::numeric_limits<double>::infinity();
  const int nt = p.T > 0.0 ? 16 : 0;
  for (int j = 0; j <= nt; ++j) {
    const double t = nt ? p.T * j / nt : 0.0;
    const double Rt = p.radius(t);
    Vec q(grid.size());
    size_t arg = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
      q[i] = sub_inequality_rhs(model, Rt, p.c, p.theta, p.gamma0, grid[i].first, grid[i].second);
      if (!std::isfinite(q[i]))
        throw AnalysisError("sub-solution inequality is not finite at lambda = " + num(grid[i].first));
      if (q[i] < q[arg]) arg = i;
    }
    // 20 lambda points per decade of 1 - lambda near the edge; divergence when the
    // drop over the last decade does not shrink
    const size_t n = q.size();
    const double d1 = q[n - 21] - q[n - 1], d0 = q[n - 41] - q[n - 21];
    if (arg + 3 >= n && d1 > 1e-6 * (1.0 + std::abs(q[n - 1])) && d1 > 0.5 * d0)
      throw AnalysisError("infimum of the sub-solution inequality diverges towards lambda = 1 (last lambda " +
                          num(grid[n - 1].first) + ", value " + num(q[n - 1]) + ")");
    if (q[arg] < inf) {
      inf = q[arg];
      p.worst_lambda = grid[arg].first;
      p.worst_time = t;
    }
  }
  p.infimum = inf;
  p.A = 1.1 * std::max(0.0, -inf);
}

}  // namespace

ProfileSpec sub_semicircle(const ModelSpec& model, double R, double c, double T, double center) {
  if (model.dimension != 1) throw AnalysisError("sub-solution profiles are one-dimensional");
  if (!(R > 0.0)) throw AnalysisError("sub_semicircle needs R > 0");
  const double s = model.s;
  if (!(c > 0.0) || c > s * (1.0 + 1e-12)) throw AnalysisError("sub_semicircle needs 0 < c <= s = " + num(s));
  if (c >= s * (1.0 - 1e-12)) {
    const AssumptionReport rep = check_assumptions(model);
    if (!rep.allows_c_equal_s())
      throw AnalysisError("c = s needs d(r) = O(1/r) and psi'(r) = O(1/r^2); fitted exponents " +
                          num(rep.d_fit.exponent) + " and " + num(rep.dpsi_fit.exponent));
    c = s;
  }
  ProfileSpec p;
  p.kind = ProfileKind::SubSemicircle;
  p.R = R;
  p.c = c;
  p.theta = 0.5;
  p.gamma0 = 0.0;
  p.center = center;
  p.T = T;
  search_A(model, p);
  return p;
}

ProfileSpec sub_theta_power(const ModelSpec& model, double R, double c, double theta, double gamma0, double T,
                            double center) {
  if (model.dimension != 1) throw AnalysisError("sub-solution profiles are one-dimensional");
  if (!(R > 0.0)) throw AnalysisError("sub_theta_power needs R > 0");
  if (!(theta > 0.0 && theta < 1.0)) throw AnalysisError("sub_theta_power needs theta in (0,1)");
  if (!(gamma0 > 0.0)) throw AnalysisError("sub_theta_power needs gamma0 > 0");
  const double s = model.s;
  if (!(c > 0.0) || c > s * (1.0 + 1e-12)) throw AnalysisError("sub_theta_power needs 0 < c <= s = " + num(s));
  const bool at_s = c >= s * (1.0 - 1e-12);
  const AssumptionReport rep = check_assumptions(model);
  std::string why;
  if (!rep.theta_condition(theta, at_s, &why)) throw AnalysisError("theta-power sub-solution rejected: " + why);
  ProfileSpec p;
  p.kind = ProfileKind::SubThetaPower;
  p.R = R;
  p.c = at_s ? s : c;
  p.theta = theta;
  p.gamma0 = gamma0;
  p.center = center;
  p.T = T;
  search_A(model, p);
  return p;
}

Trajectory sample_profile(const ProfileSpec& p, const Grid1D& grid, const Vec& times) {
  Trajectory tr;
  tr.model_id = to_string(p.kind);
  tr.grid = grid;
  tr.u0 = p.sample(0.0, grid);
  tr.u0_max = max_of(tr.u0);
  double m = 0;
  for (double x : tr.u0) m += x;
  tr.mass0 = m * grid.dx();
  tr.cfg.end_time = times.empty() ? 0.0 : *std::max_element(times.begin(), times.end());
  tr.cfg.snapshot_times = times;
  for (double t : times) {
    Snapshot s;
    s.t_requested = s.t = t;
    s.u = p.sample(t, grid);
    double mm = 0;
    for (double x : s.u) mm += x;
    s.mass = mm * grid.dx();
    tr.snapshots.push_back(std::move(s));
  }
  return tr;
}

bool OrderingReport::all_pass() const {
  for (const auto& v : verdicts)
    if (!v.pass) return false;
  return true;
}

OrderingReport verify_profile_ordering(const Trajectory& tr, const ProfileSpec& profile, double tol) {
  OrderingReport rep;
  rep.profile = to_string(profile.kind);
  rep.tol = tol;
  const double dx = tr.grid.dx();
  auto metric = [&](const Vec& u, double t) {
    const Vec w = profile.sample(t, tr.grid);
    return profile.is_super() ? positive_part_l1(u, w, dx) : positive_part_l1(w, u, dx);
  };
  rep.initial_metric = metric(tr.u0, 0.0);
  if (rep.initial_metric > tol)
    throw AnalysisError("initial ordering violated for " + rep.profile + ": metric " + num(rep.initial_metric) +
                        " exceeds tolerance " + num(tol));
  for (const Snapshot& s : tr.snapshots) {
    OrderingVerdict v;
    v.t = s.t;
    v.metric = metric(s.u, s.t);
    v.bound = rep.initial_metric + tol;
    v.pass = v.metric <= v.bound;
    rep.verdicts.push_back(v);
  }
  return rep;
}

ContractionReport l1_contraction(const Trajectory& a, const Trajectory& b, double tol) {
  if (a.grid.n_cells != b.grid.n_cells || a.grid.x_min != b.grid.x_min || a.grid.x_max != b.grid.x_max)
    throw AnalysisError("contraction needs trajectories on the same grid");
  if (a.snapshots.size() != b.snapshots.size())
    throw AnalysisError("contraction needs the same number of snapshots");
  ContractionReport rep;
  rep.tol = tol;
  const double dx = a.grid.dx();
  const double dt_slack = 1.01 * std::max(a.dt.max, b.dt.max) + 1e-12;
  rep.t.push_back(0.0);
  rep.forward.push_back(positive_part_l1(a.u0, b.u0, dx));
  rep.backward.push_back(positive_part_l1(b.u0, a.u0, dx));
  for (size_t k = 0; k < a.snapshots.size(); ++k) {
    const Snapshot &sa = a.snapshots[k], &sb = b.snapshots[k];
    if (std::abs(sa.t - sb.t) > dt_slack)
      throw AnalysisError("snapshot times differ: " + num(sa.t) + " vs " + num(sb.t));
    rep.t.push_back(sa.t);
    rep.forward.push_back(positive_part_l1(sa.u, sb.u, dx));
    rep.backward.push_back(positive_part_l1(sb.u, sa.u, dx));
  }
  auto nonincreasing = [&](const Vec& m) {
    double best = m[0];
    for (size_t k = 1; k < m.size(); ++k) {
      if (m[k] > best + tol) return false;
      best = std::min(best, m[k]);
    }
    return true;
  };
  rep.forward_pass = nonincreasing(rep.forward);
  rep.backward_pass = nonincreasing(rep.backward);
  return rep;
}

bool FrontReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

}  // namespace saturex
