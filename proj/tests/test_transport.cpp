#include <cmath>

#include "doctest.h"
#include "saturex/lagrangian.hpp"
#include "saturex/transport.hpp"

using namespace saturex;

namespace {

ModelSpec model_of(const std::string& id, double s = 1.0, int dim = 1) {
  return ModelSpec::template_model(parse_psi(id), s, 1.0, dim);
}

const char* const kCatalog[] = {"rhe", "wilson", "larsen:p=4", "coth", "tanh:gamma=1"};

// sup over p >= 0 of p|v| - k*(p sign v), golden section on the concave objective
double sup_oracle(const ModelSpec& m, double v) {
  const double sg = v < 0.0 ? -1.0 : 1.0;
  auto g = [&](double p) { return sg * p * v - kstar(m, {sg * p}); };
  double hi = 1.0;
  while (g(2.0 * hi) > g(hi) && hi < 1e9) hi *= 2.0;
  double a = 0.0, b = 2.0 * hi;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a), f1 = g(x1), f2 = g(x2);
  for (int it = 0; it < 200 && b - a > 1e-13 * b; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = g(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace

TEST_CASE("kstar along rays") {
  const ModelSpec m = model_of("rhe");
  CHECK(kstar(m, {0.0}) == 0.0);
  CHECK(kstar(m, {1.0}) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
  CHECK(kstar(m, {1e3}) == doctest::Approx(std::sqrt(1e6 + 1.0) - 1.0).epsilon(1e-12));
  CHECK(kstar(model_of("rhe", 2.0), {1.0}) == doctest::Approx(2.0 * (std::sqrt(2.0) - 1.0)).epsilon(1e-12));
}

TEST_CASE("conjugate at reference velocities") {
  const ModelSpec m = model_of("rhe");
  const ConjugateResult r0 = conjugate(m, {0.0});
  CHECK(r0.value == 0.0);
  CHECK(r0.classification == CostClass::FiniteInterior);

  const ConjugateResult r6 = conjugate(m, {0.6});
  CHECK(r6.classification == CostClass::FiniteInterior);
  CHECK(r6.value == doctest::Approx(1.0 - std::sqrt(1.0 - 0.36)).epsilon(1e-9));

  CHECK(conjugate(m, {1.1}).classification == CostClass::Infinite);
  CHECK(conjugate(m, {-1.1}).classification == CostClass::Infinite);

  // p/(1+p) = 1/2 at p = 1; kstar(1) = 1 - ln 2
  const ConjugateResult w = conjugate(model_of("wilson"), {0.5});
  CHECK(w.pbar == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(w.value == doctest::Approx(std::log(2.0) - 0.5).epsilon(1e-9));
}

TEST_CASE("boundary value") {
  // int_0^inf 1 - l/sqrt(1+l^2) dl: antiderivative l - sqrt(1+l^2) + 1 tends to 1
  const BoundaryValue b = boundary_value(model_of("rhe"), {1.0});
  CHECK(b.classification == CostClass::FiniteBoundary);
  CHECK(std::abs(b.value - 1.0) < 1e-4);
  CHECK(boundary_value(model_of("rhe", 2.0), {-1.0}).value == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(boundary_value(model_of("wilson"), {1.0}).classification == CostClass::Infinite);
  CHECK(boundary_value(model_of("coth"), {1.0}).classification == CostClass::Infinite);
  // p = 4: int_0^inf 1 - l (1+l^4)^{-1/4} dl, checked against a fine midpoint sum plus its 1/(12 l^3) tail
  double ref = 0.0;
  const double h = 1e-3, top = 200.0;
  for (double l = h / 2; l < top; l += h) ref += (1.0 - l / std::pow(1.0 + std::pow(l, 4), 0.25)) * h;
  ref += 1.0 / (12.0 * top * top * top);
  CHECK(boundary_value(model_of("larsen:p=4"), {1.0}).value == doctest::Approx(ref).epsilon(1e-5));
  const Vec d{0.6, 0.8};
  CHECK(boundary_value(model_of("rhe", 1.0, 2), d).value == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("velocity on the boundary band uses the boundary value") {
  const ConjugateResult r = conjugate(model_of("rhe"), {1.0});
  CHECK(r.classification == CostClass::FiniteBoundary);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("cost table") {
  const ModelSpec m = model_of("rhe");
  std::vector<Vec> vs;
  for (double v : {0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9}) vs.push_back({v});
  const CostTable t = cost_table(m, vs);
  REQUIRE(t.rows.size() == vs.size());
  for (const auto& r : t.rows) {
    REQUIRE(r.closed_form.has_value());
    CHECK(std::abs(r.k - (1.0 - std::sqrt(1.0 - r.v[0] * r.v[0]))) < 1e-6);
    CHECK(*r.closed_form == doctest::Approx(1.0 - std::sqrt(1.0 - r.v[0] * r.v[0])));
  }
  const CostTable z = cost_table(model_of("coth"), {{0.0}});
  CHECK(z.rows[0].k == 0.0);
  const CostTable far = cost_table(model_of("rhe", 2.0), {{2.5}, {-2.5}});
  for (const auto& r : far.rows) CHECK(r.classification == CostClass::Infinite);
  CHECK_FALSE(cost_table(model_of("wilson"), {{0.5}}).rows[0].closed_form.has_value());
}

TEST_CASE("rhe closed form scales with s") {
  const ModelSpec m = model_of("rhe", 2.0);
  const ConjugateResult r = conjugate(m, {1.2});
  CHECK(r.value == doctest::Approx(2.0 * (1.0 - std::sqrt(1.0 - 0.36))).epsilon(1e-9));
  CHECK(*closed_form_cost(m, {1.2}) == doctest::Approx(2.0 * (1.0 - std::sqrt(1.0 - 0.36))));
}

// ------------------------------------------------------------------ properties

TEST_CASE("property: Fenchel-Young, bisection residual, symmetry, convexity and domain dichotomy") {
  for (const char* id : kCatalog) {
    for (double s : {1.0, 2.5}) {
      const ModelSpec m = model_of(id, s);
      Vec ks;
      const int n = 81;
      for (int i = 0; i < n; ++i) {
        const double v = s * (-0.98 + 1.96 * i / (n - 1));
        const ConjugateResult r = conjugate(m, {v});
        REQUIRE(r.classification == CostClass::FiniteInterior);
        const double p = std::copysign(r.pbar, v);
        const double fy = std::abs(p * v - r.value - kstar(m, {p}));
        CHECK_MESSAGE(fy <= 1e-8 * std::max(1.0, std::abs(p * v)), std::string(id) << " v = " << v);
        CHECK(std::abs(m.psi.value(p) - v / s) < 1e-10);
        if (i % 8 == 0) CHECK_MESSAGE(std::abs(sup_oracle(m, v) - r.value) <= 1e-8 * std::max(1.0, std::abs(p * v)), std::string(id) << " v = " << v);
        CHECK(r.value >= 0.0);
        CHECK(r.value == doctest::Approx(conjugate(m, {-v}).value).epsilon(1e-12));
        ks.push_back(r.value);
      }
      for (int i = 1; i + 1 < n; ++i) CHECK(ks[static_cast<size_t>(i - 1)] - 2 * ks[static_cast<size_t>(i)] + ks[static_cast<size_t>(i + 1)] >= -1e-8);
      for (double f : {1.0 + 1e-6, 1.01, 1.5, 10.0}) {
        const CostClass c = conjugate(m, {f * s}).classification;
        CHECK_MESSAGE(c != CostClass::FiniteInterior, std::string(id) << " v/s = " << f);
        CHECK_MESSAGE(c != CostClass::FiniteBoundary, std::string(id) << " v/s = " << f);
      }
    }
  }
}

TEST_CASE("non-isotropic custom models refuse in two dimensions") {
  CustomPsi c;
  c.psi = [](double r) { return std::tanh(r); };
  CHECK_THROWS(conjugate(ModelSpec(PsiFamily::custom(c), PhiFamily::linear_speed(1.0), 1.0, 1), {0.1, 0.2}));
}
