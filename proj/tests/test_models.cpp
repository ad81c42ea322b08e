#include <cmath>
#include <random>

#include "doctest.h"
#include "saturex/errors.hpp"
#include "saturex/models.hpp"

using namespace saturex;

namespace {

ModelSpec model_of(const std::string& id, int dim = 1) { return ModelSpec::template_model(parse_psi(id), 1.0, 1.0, dim); }

const char* const kCatalog[] = {"rhe", "wilson", "larsen:p=1.5", "larsen:p=4", "coth", "tanh:gamma=1", "tanh:gamma=0.3"};

// rhe in d dimensions written out directly: r (1 + |r|^2)^{-1/2}
Vec rhe_direct(const Vec& r) {
  double n2 = 0;
  for (double x : r) n2 += x * x;
  Vec out = r;
  for (double& x : out) x /= std::sqrt(1.0 + n2);
  return out;
}

}  // namespace

TEST_CASE("psi evaluations at reference points") {
  CHECK(eval_psi(model_of("rhe"), {0.0})[0] == 0.0);
  CHECK(eval_psi(model_of("rhe"), {1.0})[0] == doctest::Approx(1.0 / std::sqrt(1.0 + 1.0)).epsilon(1e-15));
  CHECK(eval_psi(model_of("wilson"), {1.0})[0] == doctest::Approx(1.0 / (1.0 + 1.0)).epsilon(1e-15));
  const double r = 1e-6;
  const double series = r / 3.0 - r * r * r / 45.0;
  CHECK(std::abs(eval_psi(model_of("coth"), {r})[0] - series) < 1e-20);
  CHECK(eval_psi(model_of("tanh:gamma=2"), {1.0})[0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  CHECK(eval_psi(model_of("larsen:p=4"), {2.0})[0] == doctest::Approx(2.0 / std::pow(17.0, 0.25)).epsilon(1e-14));
  CHECK(eval_psi(model_of("linear"), {7.5})[0] == 7.5);
}

TEST_CASE("psi vanishes at the origin for every kind") {
  for (const char* id : kCatalog) CHECK(eval_psi(model_of(id), {0.0})[0] == 0.0);
  CHECK(eval_psi(model_of("linear"), {0.0})[0] == 0.0);
}

TEST_CASE("rhe saturates without cancellation") {
  const PsiFamily p = PsiFamily::rhe();
  for (double r : {1.0, 1e3, 1e6, 1e9, 1e100}) {
    const double q = std::sqrt(1.0 + r * r);
    CHECK(p.value(r) <= 1.0);
    CHECK(p.gap(r) == doctest::Approx(1.0 / (q * (q + r))).epsilon(1e-12));
  }
}

TEST_CASE("Jacobian of psi") {
  CHECK(eval_dpsi(model_of("rhe"), {0.0})[0][0] == doctest::Approx(1.0));

  SUBCASE("rhe in two dimensions at (3,4) against finite differences") {
    const ModelSpec m = model_of("rhe", 2);
    const Vec r{3.0, 4.0};
    const Mat J = eval_dpsi(m, r);
    const double h = 1e-5;
    for (int j = 0; j < 2; ++j) {
      Vec rp = r, rm = r;
      rp[static_cast<size_t>(j)] += h;
      rm[static_cast<size_t>(j)] -= h;
      const Vec fp = rhe_direct(rp), fm = rhe_direct(rm);
      for (int i = 0; i < 2; ++i)
        CHECK(J[static_cast<size_t>(i)][static_cast<size_t>(j)] ==
              doctest::Approx((fp[static_cast<size_t>(i)] - fm[static_cast<size_t>(i)]) / (2 * h)).epsilon(1e-8));
    }
    CHECK(J[0][1] == doctest::Approx(J[1][0]).epsilon(1e-14));
    // eigenvalues g(5) and g(5) + 5 g'(5), with g from the same finite-difference oracle
    const double g5 = 1.0 / std::sqrt(26.0);
    const double dg5 = (1.0 / std::sqrt(1.0 + (5 + h) * (5 + h)) - 1.0 / std::sqrt(1.0 + (5 - h) * (5 - h))) / (2 * h);
    const double tr = J[0][0] + J[1][1], det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    const double disc = std::sqrt(tr * tr / 4 - det);
    CHECK(tr / 2 + disc == doctest::Approx(g5).epsilon(1e-8));
    CHECK(tr / 2 - disc == doctest::Approx(g5 + 5 * dg5).epsilon(1e-7));
  }

  SUBCASE("origin gives g(0) times the identity") {
    for (const char* id : {"rhe", "coth", "larsen:p=4"}) {
      const ModelSpec m = model_of(id, 3);
      const Mat J = eval_dpsi(m, {0.0, 0.0, 0.0});
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          CHECK(J[static_cast<size_t>(i)][static_cast<size_t>(j)] == doctest::Approx(i == j ? m.psi.g(0.0) : 0.0));
    }
  }
}

TEST_CASE("dimension mismatch is an error") {
  CHECK_THROWS_AS(eval_psi(model_of("rhe", 2), {1.0}), ModelError);
  CHECK_THROWS_AS(eval_dpsi(model_of("rhe", 1), {1.0, 2.0}), ModelError);
}

TEST_CASE("catalog ids") {
  CHECK(parse_psi("rhe").parameter() == 2.0);
  CHECK(parse_psi("wilson").parameter() == 1.0);
  CHECK(parse_psi("larsen:p=3").parameter() == 3.0);
  CHECK(parse_psi("tanh:gamma=0.5").parameter() == 0.5);
  CHECK(parse_psi("coth").kind() == PsiKind::LevermoreCoth);
  CHECK(parse_psi("linear").kind() == PsiKind::Linear);
  CHECK_THROWS_AS(parse_psi("nosuch"), ModelError);
  CHECK_THROWS_AS(parse_psi("larsen:p=0.5"), ModelError);
  CHECK_THROWS_AS(parse_psi("tanh:gamma=-1"), ModelError);
  CHECK(parse_phi("linear", 2.0).value(3.0) == 6.0);
  CHECK(parse_phi("power:m=2", 1.0).value(3.0) == 9.0);
  CHECK_THROWS_AS(parse_phi("cubic", 1.0), ModelError);
  CHECK_THROWS_AS(ModelSpec::template_model(PsiFamily::rhe(), -1.0), ModelError);
  CHECK_THROWS_AS(ModelSpec::template_model(PsiFamily::rhe(), 1.0, 0.0), ModelError);
}

TEST_CASE("a custom psi without a radial profile cannot go beyond one dimension") {
  CustomPsi c;
  c.psi = [](double r) { return std::tanh(r); };
  CHECK_NOTHROW(ModelSpec(PsiFamily::custom(c), PhiFamily::linear_speed(1.0), 1.0, 1));
  CHECK_THROWS_AS(ModelSpec(PsiFamily::custom(c), PhiFamily::linear_speed(1.0), 1.0, 2), ModelError);
}

TEST_CASE("custom psi derivative falls back to central differences") {
  CustomPsi c;
  c.psi = [](double r) { return std::tanh(r); };
  const PsiFamily p = PsiFamily::custom(c);
  for (double r : {0.0, 0.3, -2.0, 5.0}) CHECK(p.derivative(r) == doctest::Approx(1.0 / std::pow(std::cosh(r), 2)).epsilon(1e-8));
}

TEST_CASE("assumption classification of the catalog") {
  SUBCASE("rhe passes with tail exponents 2 and 3") {
    const AssumptionReport r = check_assumptions(model_of("rhe"));
    CHECK(r.assumptions_pass());
    CHECK(r.persistence_holds());
    CHECK(r.d_fit.exponent == doctest::Approx(2.0).epsilon(0.01));
    CHECK(r.dpsi_fit.exponent == doctest::Approx(3.0).epsilon(0.01));
    CHECK(r.d_fit.residual < 0.1);
    for (const auto& it : r.items) {
      if (it.item == "psd_jacobian") {
        CHECK(it.verdict == Verdict::NotApplicable);
      } else {
        CHECK_MESSAGE(it.verdict == Verdict::Pass, it.item);
      }
    }
  }
  SUBCASE("linear fails saturation") {
    const AssumptionReport r = check_assumptions(model_of("linear"));
    CHECK(r.verdict("saturation") == Verdict::Fail);
    CHECK_FALSE(r.assumptions_pass());
  }
  SUBCASE("wilson passes the assumptions but not the persistence decay") {
    const AssumptionReport r = check_assumptions(model_of("wilson"));
    CHECK(r.assumptions_pass());
    CHECK_FALSE(r.persistence_holds());
    CHECK(r.verdict("persistence_dpsi_decay") == Verdict::Fail);
    CHECK(r.dpsi_fit.exponent == doctest::Approx(2.0).epsilon(0.01));
  }
  SUBCASE("relativistic family passes for several p") {
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      const AssumptionReport r = check_assumptions(ModelSpec::template_model(PsiFamily::relativistic(p)));
      CHECK_MESSAGE(r.assumptions_pass(), "p = " << p);
      CHECK(r.persistence_holds() == (p > 1.0));
      CHECK(r.d_fit.exponent == doctest::Approx(p).epsilon(0.01));
    }
  }
  SUBCASE("coth satisfies the assumptions but not persistence") {
    const AssumptionReport r = check_assumptions(model_of("coth"));
    CHECK(r.assumptions_pass());
    CHECK_FALSE(r.persistence_holds());
  }
  SUBCASE("tanh decays faster than any power") {
    const AssumptionReport r = check_assumptions(model_of("tanh:gamma=1"));
    CHECK(r.assumptions_pass());
    CHECK(r.persistence_holds());
    CHECK(r.dpsi_fit.super_polynomial);
  }
  SUBCASE("every verdict carries a worst point and residual") {
    for (const char* id : kCatalog) {
      const AssumptionReport r = check_assumptions(model_of(id));
      for (const auto& it : r.items) {
        CHECK(std::isfinite(it.worst_point));
        CHECK(std::isfinite(it.residual));
      }
    }
  }
  SUBCASE("isotropy and PSD checks in two dimensions") {
    for (const char* id : {"rhe", "larsen:p=4", "coth"}) {
      const AssumptionReport r = check_assumptions(model_of(id, 2));
      CHECK_MESSAGE(r.verdict("psd_jacobian") == Verdict::Pass, id);
      CHECK_MESSAGE(r.verdict("isotropy_rg_ratio") == Verdict::Pass, id);
      CHECK_MESSAGE(r.verdict("isotropy_rg_limit") == Verdict::Pass, id);
    }
  }
}

TEST_CASE("non-finite evaluations are indeterminate, not a crash") {
  CustomPsi c;
  c.psi = [](double r) { return r > 1e3 ? std::numeric_limits<double>::quiet_NaN() : std::tanh(r); };
  const AssumptionReport r = check_assumptions(ModelSpec(PsiFamily::custom(c), PhiFamily::linear_speed(1.0)));
  CHECK(r.verdict("saturation") == Verdict::Indeterminate);
}

TEST_CASE("phi checks") {
  SUBCASE("linear speed") {
    const PhiReport r = check_phi(PhiFamily::linear_speed(1.0), 1.0);
    CHECK(r.pass());
    CHECK(r.phi_prime0 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.convex);
  }
  SUBCASE("square") {
    const PhiReport r = check_phi(PhiFamily::power(2.0), 1.0);
    CHECK(r.pass());
    CHECK(std::abs(r.phi_prime0) < 1e-6);
    CHECK(r.convex);
    CHECK(r.strictly_convex);
  }
  SUBCASE("square root has no finite slope at zero") {
    CustomPhi c;
    c.phi = [](double z) { return std::sqrt(std::abs(z)); };
    const PhiReport r = check_phi(PhiFamily::custom(c), 1.0);
    CHECK(r.at("finite_derivative_at_0").verdict == Verdict::Fail);
    CHECK_FALSE(r.pass());
  }
}

// ------------------------------------------------------------------ properties

TEST_CASE("property: oddness, flux bound and Lemma monotonicity on the sample grid") {
  const SampleGrid g = SampleGrid::standard();
  const Vec rs = g.all_positive();
  for (const char* id : kCatalog) {
    const PsiFamily p = parse_psi(id);
    double worst_odd = 0, worst_bound = 0;
    for (double r : rs) {
      worst_odd = std::max(worst_odd, std::abs(p.value(-r) + p.value(r)));
      worst_bound = std::max(worst_bound, std::abs(p.value(r) * r) - std::abs(r));
    }
    CHECK_MESSAGE(worst_odd <= 1e-12, id);
    CHECK_MESSAGE(worst_bound <= 1e-12, id);
  }
  for (const char* id : {"rhe", "wilson", "larsen:p=4", "coth"}) {
    const ModelSpec m = model_of(id, 2);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd(0.0, 5.0);
    for (int k = 0; k < 50; ++k) {
      const Vec r{nd(rng), nd(rng)};
      double prev = -1.0;
      for (int i = 1; i <= 100; ++i) {
        const double t = i / 100.0;
        const Vec q = eval_psi(m, {t * r[0], t * r[1]});
        const double v = q[0] * r[0] + q[1] * r[1];
        CHECK(v >= prev - 1e-10);
        prev = v;
      }
    }
  }
}

TEST_CASE("property: Jacobian agrees with central differences at second order") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-4.0, 4.0);
  for (const char* id : kCatalog) {
    const ModelSpec m = model_of(id, 2);
    if (!m.psi.has_radial()) continue;
    for (int k = 0; k < 20; ++k) {
      const Vec r{ud(rng), ud(rng)};
      const Mat J = eval_dpsi(m, r);
      auto err = [&](double h) {
        double e = 0;
        for (int j = 0; j < 2; ++j) {
          Vec rp = r, rm = r;
          rp[static_cast<size_t>(j)] += h;
          rm[static_cast<size_t>(j)] -= h;
          const Vec fp = eval_psi(m, rp), fm = eval_psi(m, rm);
          for (int i = 0; i < 2; ++i)
            e = std::max(e, std::abs((fp[static_cast<size_t>(i)] - fm[static_cast<size_t>(i)]) / (2 * h) -
                                     J[static_cast<size_t>(i)][static_cast<size_t>(j)]));
        }
        return e;
      };
      const double e1 = err(2e-2), e2 = err(1e-2);
      if (e1 < 1e-11) continue;
      CHECK_MESSAGE(std::log2(e1 / e2) >= 1.9, id << " at (" << r[0] << ", " << r[1] << ")");
    }
  }
}
