#include "saturex/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "saturex/errors.hpp"

namespace saturex {

std::string to_string(Averaging a) { return a == Averaging::Arithmetic ? "arithmetic" : "upwind-min"; }

Averaging parse_averaging(const std::string& s) {
  if (s == "arithmetic") return Averaging::Arithmetic;
  if (s == "upwind-min") return Averaging::UpwindMin;
  throw ConfigError("unknown interface averaging '" + s + "' (arithmetic | upwind-min)");
}

Grid1D::Grid1D(double x_min_, double x_max_, int n_cells_) : x_min(x_min_), x_max(x_max_), n_cells(n_cells_) {
  validate();
}

Vec Grid1D::centers() const {
  Vec c(static_cast<size_t>(n_cells));
  for (int i = 0; i < n_cells; ++i) c[static_cast<size_t>(i)] = center(i);
  return c;
}

void Grid1D::validate() const {
  if (n_cells < 8) throw SolverError("grid needs at least 8 cells");
  if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max))
    throw SolverError("grid needs x_min < x_max");
}

void SolverConfig::validate() const {
  if (!(cfl > 0.0 && cfl <= 0.9)) throw SolverError("cfl must lie in (0, 0.9]");
  if (!(u_floor_rel > 0.0 && u_floor_rel < 1.0)) throw SolverError("u_floor must lie in (0, 1)");
  if (!(end_time >= 0.0) || !std::isfinite(end_time)) throw SolverError("end_time must be finite and >= 0");
  for (double t : snapshot_times)
    if (!(t >= 0.0 && t <= end_time)) throw SolverError("snapshot time " + std::to_string(t) + " outside [0, end_time]");
}

void DtStats::add(double dt) {
  if (count == 0) {
    min = max = dt;
  } else {
    min = std::min(min, dt);
    max = std::max(max, dt);
  }
  sum += dt;
  ++count;
}

double SolverState::mass() const {
  double m = 0.0;
  for (double x : u) m += x;
  return m * grid.dx();
}

SolverState make_state(const Grid1D& grid, const Vec& u0, const SolverConfig& cfg) {
  grid.validate();
  if (static_cast<int>(u0.size()) != grid.n_cells)
    throw SolverError("initial datum has " + std::to_string(u0.size()) + " cells, grid has " +
                      std::to_string(grid.n_cells));
  SolverState st;
  st.grid = grid;
  st.u = u0;
  for (size_t i = 0; i < u0.size(); ++i) {
    if (!std::isfinite(u0[i]) || u0[i] < 0.0)
      throw SolverError("initial datum must be finite and non-negative (cell " + std::to_string(i) + ")");
    st.u0_max = std::max(st.u0_max, u0[i]);
  }
  st.mass0 = st.mass();
  st.u_floor = cfg.u_floor_rel * st.u0_max;
  return st;
}

double max_phi_prime(const PhiFamily& phi, double beta) {
  if (!(beta > 0.0)) return phi.derivative(0.0);
  if (phi.kind() == PhiKind::LinearSpeed) return phi.speed();
  const int n = 64;
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double v = phi.derivative(beta * i / n);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = beta * std::max(0, best - 1) / n, b = beta * std::min(n, best + 1) / n;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = phi.derivative(c), fd = phi.derivative(d);
  for (int it = 0; it < 100 && b - a > 1e-14 * beta; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = phi.derivative(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = phi.derivative(d);
    }
  }
  return std::max({best_v, fc, fd, phi.derivative(0.0), phi.derivative(beta)});
}

double max_phi_ratio(const PhiFamily& phi, double beta) {
  if (!(beta > 0.0)) return phi.derivative(0.0);
  double best = phi.derivative(0.0);
  for (int i = 1; i <= 64; ++i) {
    const double z = beta * i / 64.0;
    best = std::max(best, phi.value(z) / z);
  }
  return best;
}

double propagation_speed(const ModelSpec& model, double u_max) {
  return std::max(max_phi_prime(model.phi, u_max), max_phi_ratio(model.phi, u_max));
}

namespace {

double max_dpsi(const PsiFamily& psi, double r_cap) {
  double best = std::abs(psi.derivative(0.0));
  for (double r : SampleGrid::standard().all_positive()) {
    if (r > r_cap) break;
    best = std::max(best, std::abs(psi.derivative(r)));
  }
  return best;
}

struct PsiRhe {
  double operator()(double r) const {
    r = std::clamp(r, -1e150, 1e150);
    return r / std::sqrt(1.0 + r * r);
  }
};

struct PsiAny {
  const PsiFamily* f;
  double operator()(double r) const { return f->value(r); }
};

struct PhiLin {
  double s;
  double operator()(double z) const { return s * z; }
};

struct PhiSq {
  double c;
  double operator()(double z) const { return c * z * z; }
};

struct PhiAny {
  const PhiFamily* f;
  double operator()(double z) const { return f->value(z); }
};

template <class Psi, class Phi>
inline double flux_kernel(const Psi& psi, const Phi& phi, double Ldx, double ul, double ur, double floor,
                          bool upwind) {
  if (!upwind) {
    const double ub = 0.5 * (ul + ur);
    if (ub < floor) return 0.0;
    return phi(ub) * psi(Ldx * (ur - ul) / ub);
  }
  const double hi = std::max(ul, ur), lo = std::max(std::min(ul, ur), floor);
  if (hi < floor) return 0.0;
  return phi(hi) * psi(Ldx * (ur - ul) / lo);
}

// Active window [lo, hi]: outside it every cell is exactly zero.
struct Window {
  int lo = 0;
  int hi = -1;
};

Window find_window(const Vec& u) {
  Window w;
  const int n = static_cast<int>(u.size());
  int i = 0;
  while (i < n && u[static_cast<size_t>(i)] == 0.0) ++i;
  if (i == n) return w;
  w.lo = i;
  int j = n - 1;
  while (u[static_cast<size_t>(j)] == 0.0) --j;
  w.hi = j;
  return w;
}

template <class Psi, class Phi>
void advance(const Psi& psi, const Phi& phi, bool upwind, double L, double dt, SolverState& st, Vec& F,
             Window& w) {
  Vec& u = st.u;
  const int n = static_cast<int>(u.size());
  if (w.hi < w.lo) return;
  const double dx = st.grid.dx();
  const double Ldx = L / dx;
  const double lam = dt / dx;
  const double floor = st.u_floor;
  const int a = std::max(w.lo - 1, 0), b = std::min(w.hi + 1, n - 1);
  // F[k] is the flux through the interface between cells k and k+1
  for (int k = a; k < b; ++k) F[static_cast<size_t>(k)] = flux_kernel(psi, phi, Ldx, u[k], u[k + 1], floor, upwind);
  double clipped = 0.0;
  double prev = 0.0;
  for (int k = a; k <= b; ++k) {
    const double fr = k < b ? F[static_cast<size_t>(k)] : 0.0;
    double v = u[static_cast<size_t>(k)] + lam * (fr - prev);
    prev = fr;
    if (v < 0.0) {
      clipped -= v;
      v = 0.0;
    }
    u[static_cast<size_t>(k)] = v;
  }
  double m = 0.0;
  for (int k = a; k <= b; ++k) m += u[static_cast<size_t>(k)];
  if (!std::isfinite(m)) {
    int bad = a;
    while (bad <= b && std::isfinite(u[static_cast<size_t>(bad)])) ++bad;
    throw SolverError("non-finite cell value at step " + std::to_string(st.step_count + 1) + ", t = " +
                      std::to_string(st.t + dt) + ", cell " + std::to_string(bad));
  }
  clipped *= dx;
  st.clipped_mass += clipped;
  st.max_step_clip = std::max(st.max_step_clip, clipped);
  int lo = a, hi = b;
  while (lo <= hi && u[static_cast<size_t>(lo)] == 0.0) ++lo;
  while (hi >= lo && u[static_cast<size_t>(hi)] == 0.0) --hi;
  if (lo > hi) {
    w = Window{};
  } else {
    w.lo = lo;
    w.hi = hi;
  }
  st.t += dt;
  ++st.step_count;
  st.dt_history.add(dt);
}

template <class Fn>
void dispatch(const ModelSpec& model, Fn&& fn) {
  const bool rhe = model.psi.kind() == PsiKind::RelativisticP && model.psi.parameter() == 2.0;
  const PsiAny any{&model.psi};
  auto with_phi = [&](auto psi) {
    if (model.phi.kind() == PhiKind::LinearSpeed)
      fn(psi, PhiLin{model.phi.speed()});
    else if (model.phi.kind() == PhiKind::Power && model.phi.m() == 2.0)
      fn(psi, PhiSq{model.phi.scale()});
    else
      fn(psi, PhiAny{&model.phi});
  };
  if (rhe)
    with_phi(PsiRhe{});
  else
    with_phi(any);
}

}  // namespace

double interface_flux(const ModelSpec& model, double uL, double uR, double dx, const SolverConfig& cfg,
                      double u_floor) {
  if (!(dx > 0.0)) throw SolverError("interface_flux needs dx > 0");
  if (uL < 0.0 || uR < 0.0) throw SolverError("interface_flux needs non-negative states");
  const double floor = std::max(u_floor, std::numeric_limits<double>::min());
  return flux_kernel(PsiAny{&model.psi}, PhiAny{&model.phi}, model.L / dx, uL, uR, floor,
                     cfg.averaging == Averaging::UpwindMin);
}

double stable_dt(const ModelSpec& model, const SolverState& state, const SolverConfig& cfg) {
  const double dx = state.grid.dx();
  double u_max = 0.0;
  for (double x : state.u) u_max = std::max(u_max, x);
  if (u_max == 0.0) return cfg.cfl * dx;
  const double theta = max_phi_prime(model.phi, u_max);
  const double q = max_phi_ratio(model.phi, u_max);
  const double r_cap = cfg.averaging == Averaging::Arithmetic ? 2.0 * model.L / dx
                                                              : std::numeric_limits<double>::infinity();
  const double v_diff = 2.0 * max_dpsi(model.psi, r_cap) * model.L * q / dx;
  const double v_max = std::max({theta, q, v_diff});
  if (!(v_max > 0.0)) return cfg.cfl * dx;
  return cfg.cfl * dx / v_max;
}

SolverState step(const ModelSpec& model, SolverState state, const SolverConfig& cfg) {
  const double dt = stable_dt(model, state, cfg);
  Vec F(state.u.size(), 0.0);
  Window w = find_window(state.u);
  const bool up = cfg.averaging == Averaging::UpwindMin;
  if (w.hi < w.lo) {
    state.t += dt;
    ++state.step_count;
    state.dt_history.add(dt);
    return state;
  }
  dispatch(model, [&](auto psi, auto phi) { advance(psi, phi, up, model.L, dt, state, F, w); });
  return state;
}

double positive_part_l1(const Vec& a, const Vec& b, double dx) {
  if (a.size() != b.size()) throw AnalysisError("positive_part_l1 needs equal lengths");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += std::max(0.0, a[i] - b[i]);
  return s * dx;
}

Trajectory run(const ModelSpec& model, const Grid1D& grid, const Vec& u0, const SolverConfig& cfg) {
  model.validate();
  cfg.validate();
  SolverState st = make_state(grid, u0, cfg);

  const Window w0 = find_window(st.u);
  if (w0.hi >= w0.lo) {
    const double need = propagation_speed(model, st.u0_max) * cfg.end_time;
    const double left = grid.x_min + w0.lo * grid.dx();
    const double right = grid.x_min + (w0.hi + 1) * grid.dx();
    if (left - grid.x_min < need || grid.x_max - right < need)
      throw SolverError("support margin violated: the run needs the domain to cover [" + std::to_string(left - need) +
                        ", " + std::to_string(right + need) + "]");
  }

  Trajectory tr;
  tr.model_id = model.id();
  tr.grid = grid;
  tr.cfg = cfg;
  tr.u0 = u0;
  tr.u0_max = st.u0_max;
  tr.mass0 = st.mass0;

  Vec times = cfg.snapshot_times;
  std::sort(times.begin(), times.end());

  // ||u(t)||_inf <= ||u0||_inf, so the initial bound is valid for the whole run
  const double dt = stable_dt(model, st, cfg);
  Vec F(st.u.size(), 0.0);
  Window w = w0;
  const bool up = cfg.averaging == Averaging::UpwindMin;
  size_t next = 0;
  auto record = [&]() {
    while (next < times.size() && st.t >= times[next]) {
      Snapshot s;
      s.t_requested = times[next];
      s.t = st.t;
      s.u = st.u;
      s.mass = st.mass();
      if (st.mass0 > 0.0) tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(s.mass - st.mass0) / st.mass0);
      tr.snapshots.push_back(std::move(s));
      ++next;
    }
  };
  dispatch(model, [&](auto psi, auto phi) {
    record();
    while (st.t < cfg.end_time) {
      if (w.hi < w.lo) {
        st.t += dt;
        ++st.step_count;
        st.dt_history.add(dt);
      } else {
        advance(psi, phi, up, model.L, dt, st, F, w);
      }
      record();
    }
  });
  tr.steps = st.step_count;
  tr.dt = st.dt_history;
  tr.clipped_mass = st.clipped_mass;
  tr.max_step_clip = st.max_step_clip;
  if (st.mass0 > 0.0) tr.max_mass_drift = std::max(tr.max_mass_drift, std::abs(st.mass() - st.mass0) / st.mass0);
  return tr;
}

}  // namespace saturex
