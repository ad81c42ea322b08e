#include <cmath>
#include <random>

#include "doctest.h"
#include "saturex/analysis.hpp"
#include "saturex/errors.hpp"

using namespace saturex;

namespace {

ModelSpec model_of(const std::string& id, double s = 1.0) { return ModelSpec::template_model(parse_psi(id), s); }

Trajectory static_trajectory(const Grid1D& g, const Vec& u) {
  Trajectory tr;
  tr.grid = g;
  tr.u0 = u;
  for (double v : u) tr.u0_max = std::max(tr.u0_max, v);
  Snapshot s;
  s.u = u;
  tr.snapshots.push_back(s);
  return tr;
}

Vec staircase(const Grid1D& g, double hi, double lo) {
  Vec u(static_cast<size_t>(g.n_cells), 0.0);
  for (int i = 0; i < g.n_cells; ++i) {
    const double x = g.center(i);
    u[static_cast<size_t>(i)] = (x > -0.5 && x < 0.0) ? hi : (x >= 0.0 && x < 0.5) ? lo : 0.0;
  }
  return u;
}

// W_t - (phi(W) psi(L W_x / W))_x by central differences of the profile itself
double sub_residual(const ModelSpec& m, const ProfileSpec& p, double t, double x) {
  const double h = 1e-5 * p.radius(t), k = 1e-6;
  auto W = [&](double tt, double xx) { return p.eval(tt, xx); };
  auto flux = [&](double xx) {
    const double w = W(t, xx);
    const double wx = (W(t, xx + h) - W(t, xx - h)) / (2 * h);
    return m.phi.value(w) * m.psi.value(m.L * wx / w);
  };
  const double wt = (W(t + k, x) - W(t - k, x)) / (2 * k);
  return wt - (flux(x + h) - flux(x - h)) / (2 * h);
}

}  // namespace

TEST_CASE("least squares") {
  const LineFit f = least_squares({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual < 1e-12);
  CHECK(std::isnan(least_squares({1}, {1}).slope));
}

TEST_CASE("support edges of a static box") {
  const Grid1D g(-2.0, 2.0, 400);
  Vec u(400, 0.0);
  for (int i = 0; i < 400; ++i)
    if (std::abs(g.center(i)) < 0.5) u[static_cast<size_t>(i)] = 1.0;
  const EdgeSeries es = track_support(static_trajectory(g, u), 1e-8);
  CHECK(std::abs(es.right[0] - 0.5) <= g.dx());
  CHECK(std::abs(es.left[0] + 0.5) <= g.dx());
}

TEST_CASE("support touching the boundary is an error") {
  const Grid1D g(-1.0, 1.0, 100);
  Vec u(100, 0.0);
  u[99] = 1.0;
  CHECK_THROWS_AS(track_support(static_trajectory(g, u), 1e-8), AnalysisError);
  CHECK_THROWS_AS(track_support(static_trajectory(g, u), 0.0), AnalysisError);
}

TEST_CASE("support of an exact sub-solution profile moves at c") {
  const ModelSpec m = model_of("rhe");
  const ProfileSpec p = sub_semicircle(m, 0.5, 0.9, 1.0);
  const Grid1D g(-3.0, 3.0, 6000);
  Vec times;
  for (int k = 0; k <= 10; ++k) times.push_back(0.1 * k);
  const Trajectory tr = sample_profile(p, g, times);
  const EdgeSeries es = track_support(tr, 1e-8);
  CHECK(es.right_fit.slope == doctest::Approx(0.9).epsilon(1e-3 / 0.9));
  CHECK(es.left_fit.slope == doctest::Approx(0.9).epsilon(1e-3 / 0.9));
}

TEST_CASE("jump detection") {
  const Grid1D g(-1.0, 1.0, 400);
  SUBCASE("smooth gaussian has no jumps") {
    Vec u(400);
    for (int i = 0; i < 400; ++i) u[static_cast<size_t>(i)] = std::exp(-g.center(i) * g.center(i) / (2 * 0.1 * 0.1));
    CHECK(detect_jumps(u, g).empty());
  }
  SUBCASE("box gives one jump per side") {
    Vec u(400, 0.0);
    for (int i = 0; i < 400; ++i)
      if (std::abs(g.center(i)) < 0.5) u[static_cast<size_t>(i)] = 1.0;
    const auto js = detect_jumps(u, g);
    REQUIRE(js.size() == 2);
    CHECK(js[0].orientation == -1);
    CHECK(js[1].orientation == 1);
    for (const auto& j : js) {
      CHECK(j.u_plus == 1.0);
      CHECK(j.u_minus == 0.0);
      CHECK(std::abs(std::abs(j.position) - 0.5) < 1e-12);
    }
  }
  SUBCASE("staircase traces are recovered exactly") {
    const auto js = detect_jumps(staircase(g, 1.0, 0.4), g);
    REQUIRE(js.size() == 3);
    CHECK(js[1].u_plus == 1.0);
    CHECK(js[1].u_minus == 0.4);
    CHECK(js[2].u_plus == 0.4);
    CHECK(js[2].u_minus == 0.0);
  }
  SUBCASE("a wider stencil merges a smeared layer") {
    Vec u(400, 0.0);
    for (int i = 0; i < 400; ++i) {
      const double x = g.center(i);
      u[static_cast<size_t>(i)] = x < 0.0 ? 1.0 : x < 0.05 ? 1.0 - (x / 0.05) : 0.0;
    }
    JumpParams prm;
    prm.span = 8;
    prm.skip = 2;
    const auto js = detect_jumps(u, g, prm);
    REQUIRE(js.size() == 1);
    CHECK(js[0].u_plus == 1.0);
    CHECK(js[0].u_minus == 0.0);
    CHECK(detect_jumps(u, g).empty());
  }
  CHECK_THROWS_AS(detect_jumps(Vec(400, 0.0), g, JumpParams{0.2, 1, 2, 1}), AnalysisError);
}

TEST_CASE("Rankine-Hugoniot speeds") {
  CHECK(rh_speed(PhiFamily::linear_speed(1.0), 0.7, 0.2) == 1.0);
  CHECK(rh_speed(PhiFamily::power(2.0), 1.0, 0.0) == doctest::Approx(1.0));
  CHECK(rh_speed(PhiFamily::power(2.0), 1.0, 0.5) == doctest::Approx((1.0 - 0.25) / 0.5));
  CHECK_THROWS_AS(rh_speed(PhiFamily::power(2.0), 0.5, 0.5), AnalysisError);
  CHECK(admissible_minus(PhiFamily::power(2.0), 1.0, 1.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(admissible_minus(PhiFamily::power(2.0), 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(admissible_minus(PhiFamily::power(2.0), 1.0, 2.0), AnalysisError);
  CHECK_THROWS_AS(admissible_minus(PhiFamily::power(2.0), 1.0, 0.5), AnalysisError);
  CHECK_THROWS_AS(admissible_minus(PhiFamily::linear_speed(1.0), 1.0, 1.0), AnalysisError);
}

TEST_CASE("property: linear speed gives s for every gap") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ud(0.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    double a = ud(rng), b = ud(rng);
    if (a == b) continue;
    if (a < b) std::swap(a, b);
    CHECK(rh_speed(PhiFamily::linear_speed(2.5), a, b) == 2.5);
  }
}

TEST_CASE("property: admissible_minus and rh_speed round-trip") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (double m : {1.5, 2.0, 3.0}) {
    const PhiFamily phi = PhiFamily::power(m, 0.7);
    for (int k = 0; k < 300; ++k) {
      const double up = 0.05 + 3 * ud(rng);
      const double lo = phi.value(up) / up, hi = phi.derivative(up);
      const double v = lo + (hi - lo) * ud(rng) * 0.999;
      const double um = admissible_minus(phi, up, v);
      CHECK(um >= 0.0);
      CHECK(um < up);
      if (um > 0.0) CHECK(std::abs(rh_speed(phi, up, um) - v) <= 1e-9);
    }
  }
}

TEST_CASE("super-solution indicator") {
  CHECK(super_indicator(model_of("rhe"), 1.0, -0.5, 0.5).theta_speed == doctest::Approx(1.0));
  const ModelSpec sq(PsiFamily::rhe(), PhiFamily::power(2.0));
  CHECK(super_indicator(sq, 1.0, -0.5, 0.5).theta_speed == doctest::Approx(2.0).epsilon(1e-9));
  const ModelSpec cube(PsiFamily::rhe(), PhiFamily::power(3.0));
  CHECK(super_indicator(cube, 0.5, -0.5, 0.5).theta_speed == doctest::Approx(0.75).epsilon(1e-9));
  const ProfileSpec p = super_indicator(sq, 1.0, -0.5, 0.5);
  CHECK(p.eval(0.5, 1.4) == 1.0);
  CHECK(p.eval(0.5, 1.6) == 0.0);
}

TEST_CASE("sub-solution profiles") {
  const ModelSpec m = model_of("rhe");
  SUBCASE("semicircle") {
    const ProfileSpec p = sub_semicircle(m, 1.0, 0.9, 2.0);
    CHECK(p.A > 0.0);
    CHECK(std::isfinite(p.A));
    for (double x : {-0.9, -0.3, 0.0, 0.5}) CHECK(p.eval(0.0, x) == doctest::Approx(std::sqrt(1 - x * x)));
    for (double t : {0.0, 0.7, 2.0}) {
      CHECK(p.eval(t, p.radius(t)) == 0.0);
      CHECK(p.eval(t, -p.radius(t)) == 0.0);
    }
  }
  SUBCASE("c = s is accepted for rhe") {
    CHECK(std::isfinite(sub_semicircle(m, 0.5, 1.0, 1.0).A));
    CHECK_THROWS_AS(sub_semicircle(m, 0.5, 1.1, 1.0), AnalysisError);
  }
  SUBCASE("theta power") {
    const ProfileSpec p = sub_theta_power(m, 0.5, 1.0, 0.5, 0.1, 1.0);
    CHECK(std::isfinite(p.A));
    CHECK(p.eval(0.0, 0.0) == doctest::Approx(std::pow(0.5, 2 * 0.5) + 0.1));
    CHECK(p.eval(0.3, p.radius(0.3) * (1 - 1e-12)) == doctest::Approx(0.1 * std::exp(-p.A * 0.3)).epsilon(1e-5));
    CHECK_THROWS_AS(sub_theta_power(model_of("wilson"), 0.5, 1.0, 0.5, 0.1, 1.0), AnalysisError);
    CHECK_THROWS_AS(sub_theta_power(m, 0.5, 1.0, 1.5, 0.1, 1.0), AnalysisError);
    CHECK_THROWS_AS(sub_theta_power(m, 0.5, 1.0, 0.5, 0.0, 1.0), AnalysisError);
  }
  SUBCASE("linear psi makes the infimum diverge") {
    CHECK_THROWS_AS(sub_semicircle(model_of("linear"), 0.5, 0.9, 1.0), AnalysisError);
  }
  SUBCASE("every model allowing c = s gets a finite A") {
    for (const char* id : {"rhe", "wilson", "larsen:p=4", "coth", "tanh:gamma=1"}) {
      const ModelSpec mm = model_of(id);
      if (!check_assumptions(mm).allows_c_equal_s()) continue;
      CHECK_MESSAGE(std::isfinite(sub_semicircle(mm, 0.5, 1.0, 1.0).A), id);
    }
  }
}

TEST_CASE("property: the found A makes the profile a sub-solution pointwise") {
  for (const char* id : {"rhe", "larsen:p=4", "coth", "tanh:gamma=1"}) {
    const ModelSpec m = model_of(id);
    std::vector<ProfileSpec> profiles{sub_semicircle(m, 0.5, 0.9, 1.0)};
    if (check_assumptions(m).theta_condition(0.5, false)) profiles.push_back(sub_theta_power(m, 0.5, 0.9, 0.5, 0.1, 1.0));
    for (const ProfileSpec& p : profiles) {
      for (double t : {0.0 + 1e-3, 0.5, 1.0}) {
        for (double lam : {0.0, 0.2, 0.5, 0.8, 0.95, 0.99}) {
          const double x = lam * p.radius(t);
          const double res = sub_residual(m, p, t, x);
          const double scale = p.A * p.eval(t, x) + 1.0;
          CHECK_MESSAGE(res <= 1e-4 * scale, id << " " << to_string(p.kind) << " t=" << t << " lambda=" << lam);
        }
      }
    }
  }
}

TEST_CASE("profile ordering and contraction reports") {
  const ModelSpec m = model_of("rhe");
  const Grid1D g(-3.0, 3.0, 600);
  Vec u0(600, 0.0);
  for (int i = 0; i < 600; ++i)
    if (std::abs(g.center(i)) < 0.5) u0[static_cast<size_t>(i)] = 1.0;
  SolverConfig cfg;
  cfg.end_time = 1.0;
  cfg.snapshot_times = {0.25, 0.5, 0.75, 1.0};
  const Trajectory tr = run(m, g, u0, cfg);
  const double tol = 10 * g.dx();

  const ProfileSpec sup = super_indicator(m, 1.0, -0.5, 0.5, 1.0);
  const OrderingReport rs = verify_profile_ordering(tr, sup, tol);
  CHECK(rs.initial_metric <= 1e-15);
  CHECK(rs.all_pass());

  const ProfileSpec sub = sub_semicircle(m, 0.5, 0.9, 1.0);
  const OrderingReport rb = verify_profile_ordering(tr, sub, tol);
  CHECK(rb.all_pass());

  const ProfileSpec tall = sub_semicircle(m, 1.0, 0.9, 1.0);
  CHECK_THROWS_AS(verify_profile_ordering(tr, tall, tol), AnalysisError);

  const ContractionReport c = l1_contraction(tr, tr, tol);
  CHECK(c.forward_pass);
  CHECK(c.backward_pass);
  for (double v : c.forward) CHECK(v == 0.0);
}
