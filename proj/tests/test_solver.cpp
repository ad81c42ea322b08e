#include <cmath>
#include <random>

#include "doctest.h"
#include "saturex/errors.hpp"
#include "saturex/solver.hpp"

using namespace saturex;

namespace {

ModelSpec rhe(double s = 1.0) { return ModelSpec::template_model(PsiFamily::rhe(), s); }
ModelSpec rhe_sq() { return ModelSpec(PsiFamily::rhe(), PhiFamily::power(2.0, 1.0)); }

Vec box(const Grid1D& g, double a, double b, double h) {
  Vec u(static_cast<size_t>(g.n_cells), 0.0);
  for (int i = 0; i < g.n_cells; ++i) {
    const double x0 = g.x_min + i * g.dx(), x1 = x0 + g.dx();
    u[static_cast<size_t>(i)] = h * std::max(0.0, std::min(x1, b) - std::max(x0, a)) / g.dx();
  }
  return u;
}

double l1(const Vec& a, const Vec& b, double dx) { return positive_part_l1(a, b, dx) + positive_part_l1(b, a, dx); }

}  // namespace

TEST_CASE("interface flux") {
  SolverConfig cfg;
  CHECK(interface_flux(rhe(), 1.0, 1.0, 1e-3, cfg) == 0.0);
  CHECK(interface_flux(rhe(), 0.0, 0.0, 1e-3, cfg) == 0.0);
  const double ratio = -1.0 / (1e-3 * 0.5);
  CHECK(interface_flux(rhe(), 1.0, 0.0, 1e-3, cfg) == doctest::Approx(0.5 * ratio / std::sqrt(1.0 + ratio * ratio)).epsilon(1e-14));
  CHECK(interface_flux(rhe(), 0.0, 1.0, 1e-3, cfg) == doctest::Approx(-0.5 * ratio / std::sqrt(1.0 + ratio * ratio)).epsilon(1e-14));
  // below the floor the flux vanishes
  CHECK(interface_flux(rhe(), 1e-40, 0.0, 1e-3, cfg, 1e-30) == 0.0);
  SolverConfig up;
  up.averaging = Averaging::UpwindMin;
  CHECK(std::abs(interface_flux(rhe(), 1.0, 0.0, 1e-3, up, 1e-30)) <= 1.0);
  CHECK_THROWS_AS(interface_flux(rhe(), -1.0, 0.0, 1e-3, cfg), SolverError);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ud(0.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    const double a = ud(rng), b = ud(rng);
    CHECK(std::abs(interface_flux(rhe(), a, b, 1e-2, cfg)) <= 0.5 * (a + b) * (1 + 1e-15));
  }
}

TEST_CASE("propagation bounds and time step") {
  CHECK(max_phi_prime(PhiFamily::linear_speed(1.0), 1.0) == doctest::Approx(1.0));
  CHECK(max_phi_prime(PhiFamily::power(2.0), 1.0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(max_phi_prime(PhiFamily::power(3.0), 0.5) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(max_phi_ratio(PhiFamily::power(2.0), 1.0) == doctest::Approx(1.0).epsilon(1e-9));

  const Grid1D g(-1.0, 1.0, 200);
  SolverConfig cfg;
  cfg.cfl = 0.4;
  const SolverState st = make_state(g, box(g, -0.5, 0.5, 1.0), cfg);
  CHECK(stable_dt(rhe(), st, cfg) <= 0.4 * 1e-2);
  CHECK(stable_dt(rhe(), st, cfg) > 0.0);
  const SolverState z = make_state(g, Vec(200, 0.0), cfg);
  CHECK(stable_dt(rhe(), z, cfg) == doctest::Approx(0.4 * 1e-2));
}

TEST_CASE("single steps") {
  const Grid1D g(-1.0, 1.0, 64);
  SolverConfig cfg;
  SolverState c = make_state(g, Vec(64, 0.7), cfg);
  const SolverState c1 = step(rhe(), c, cfg);
  for (double v : c1.u) CHECK(v == 0.7);

  const SolverState b = make_state(g, box(g, -0.3, 0.3, 1.0), cfg);
  const SolverState b1 = step(rhe(), b, cfg);
  CHECK(std::abs(b1.mass() - b.mass()) <= 1e-14 * b.mass());
  for (double v : b1.u) CHECK(v >= 0.0);
}

TEST_CASE("mirror symmetry is preserved") {
  const Grid1D g(-3.0, 3.0, 128);
  Vec u0(128);
  for (int i = 0; i < 128; ++i) {
    const double x = g.center(i);
    u0[static_cast<size_t>(i)] = std::abs(x) < 0.6 ? 1.0 + 0.5 * std::cos(3 * x) : 0.0;
  }
  SolverConfig cfg;
  cfg.end_time = 0.5;
  cfg.snapshot_times = {0.5};
  for (const ModelSpec& m : {rhe(), rhe_sq()}) {
    const Trajectory tr = run(m, g, u0, cfg);
    const Vec& u = tr.snapshots.back().u;
    for (int i = 0; i < 64; ++i) CHECK(u[static_cast<size_t>(i)] == doctest::Approx(u[static_cast<size_t>(127 - i)]).epsilon(1e-12));
  }
}

TEST_CASE("runs") {
  const Grid1D g(-2.0, 2.0, 256);
  SolverConfig cfg;
  cfg.end_time = 0.5;
  cfg.snapshot_times = {0.1, 0.25, 0.5};

  SUBCASE("zero datum stays zero") {
    const Trajectory tr = run(rhe(), g, Vec(256, 0.0), cfg);
    REQUIRE(tr.snapshots.size() == 3);
    for (const auto& s : tr.snapshots)
      for (double v : s.u) CHECK(v == 0.0);
  }
  SUBCASE("snapshots land on the first step at or after the request") {
    const Trajectory tr = run(rhe(), g, box(g, -0.5, 0.5, 1.0), cfg);
    REQUIRE(tr.snapshots.size() == 3);
    for (const auto& s : tr.snapshots) {
      CHECK(s.t >= s.t_requested);
      CHECK(s.t - s.t_requested < tr.dt.max * (1 + 1e-9));
    }
  }
  SUBCASE("margin violation refuses to start") {
    SolverConfig long_run = cfg;
    long_run.end_time = 3.0;
    long_run.snapshot_times = {3.0};
    CHECK_THROWS_AS(run(rhe(), g, box(g, -0.5, 0.5, 1.0), long_run), SolverError);
  }
  SUBCASE("negative data are rejected") {
    Vec u = box(g, -0.5, 0.5, 1.0);
    u[10] = -1e-3;
    CHECK_THROWS_AS(run(rhe(), g, u, cfg), SolverError);
  }
  SUBCASE("ordered data stay ordered in L1") {
    const Vec a = box(g, -0.5, 0.5, 1.0), b = box(g, -0.6, 0.6, 1.2);
    const Trajectory ta = run(rhe(), g, a, cfg), tb = run(rhe(), g, b, cfg);
    const double tol = 10 * g.dx() * 1.2;
    const double init = positive_part_l1(a, b, g.dx());
    for (size_t k = 0; k < ta.snapshots.size(); ++k)
      CHECK(positive_part_l1(ta.snapshots[k].u, tb.snapshots[k].u, g.dx()) <= init + tol);
  }
}

// ------------------------------------------------------------------ properties

TEST_CASE("property: conservation over 10^4 steps and positivity") {
  const Grid1D g(-2.0, 2.0, 400);
  SolverConfig cfg;
  for (const ModelSpec& m : {rhe(), rhe_sq(), ModelSpec::template_model(PsiFamily::wilson())}) {
    SolverState st = make_state(g, box(g, -0.4, 0.4, 1.0), cfg);
    for (int k = 0; k < 10000; ++k) st = step(m, std::move(st), cfg);
    CHECK(std::abs(st.mass() - st.mass0) < 1e-12 * st.mass0);
    double mn = 0;
    for (double v : st.u) mn = std::min(mn, v);
    CHECK(mn >= 0.0);
    CHECK(st.clipped_mass <= 1e-14 * st.mass0 * 10000);
  }
}

TEST_CASE("property: support edge advance per snapshot interval") {
  const Grid1D g(-3.0, 3.0, 600);
  SolverConfig cfg;
  cfg.end_time = 1.0;
  for (int k = 1; k <= 10; ++k) cfg.snapshot_times.push_back(0.1 * k);
  const Trajectory tr = run(rhe(), g, box(g, -0.5, 0.5, 1.0), cfg);
  const double thr = 1e-8;
  auto right_edge = [&](const Vec& u) {
    int j = g.n_cells - 1;
    while (j > 0 && !(u[static_cast<size_t>(j)] > thr)) --j;
    return g.x_min + (j + 1) * g.dx();
  };
  const double vmax = propagation_speed(rhe(), 1.0);
  double prev_t = 0.0, prev_x = right_edge(tr.u0);
  for (const auto& s : tr.snapshots) {
    const double x = right_edge(s.u), dt = s.t - prev_t;
    CHECK(x - prev_x <= (vmax + 2 * g.dx() / tr.dt.min) * dt);
    if (s.t_requested > 0.45) CHECK(x - prev_x <= 1.0 * dt + 10 * g.dx());
    prev_t = s.t;
    prev_x = x;
  }
}

TEST_CASE("property: grid refinement reduces the L1 error") {
  // reference on 2048 cells, errors of coarser runs after cell-averaging the reference
  const double T = 0.2;
  SolverConfig cfg;
  cfg.end_time = T;
  cfg.snapshot_times = {T};
  auto solve = [&](int n) {
    const Grid1D g(-1.0, 1.0, n);
    return run(rhe(), g, box(g, -0.25, 0.25, 1.0), cfg).snapshots.back().u;
  };
  const int nref = 2048;
  const Vec ref = solve(nref);
  auto err = [&](int n) {
    const Vec u = solve(n);
    const int r = nref / n;
    Vec avg(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < nref; ++i) avg[static_cast<size_t>(i / r)] += ref[static_cast<size_t>(i)] / r;
    return l1(u, avg, 2.0 / n);
  };
  const double e1 = err(128), e2 = err(256), e3 = err(512);
  CHECK(e1 / e2 >= 1.5);
  CHECK(e2 / e3 >= 1.5);
}
