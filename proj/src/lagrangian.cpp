#include "saturex/lagrangian.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>

#include "saturex/errors.hpp"

namespace saturex {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 15>;

// Bisects until the Kronrod-Gauss difference of each piece is below its share of `tol`.
void refine(const ScalarFn& f, double a, double b, double tol, int depth, QuadResult& out) {
  double err = 0.0;
  const double v = GK::integrate(f, a, b, 0, 0.0, &err);
  if (err <= tol || err <= 1e-14 * std::abs(v) || depth >= 40) {
    out.value += v;
    out.error += err;
    return;
  }
  const double m = 0.5 * (a + b);
  refine(f, a, m, 0.5 * tol, depth + 1, out);
  refine(f, m, b, 0.5 * tol, depth + 1, out);
}

}  // namespace

QuadResult integrate(const ScalarFn& f, double a, double b, double abs_tol) {
  QuadResult out;
  if (a == b) return out;
  if (!(b > a)) throw QuadratureError("integration interval is reversed", 0.0);
  std::vector<double> cuts{a};
  if (b - a > 1.0) {
    double x = a + 1.0;
    while (x < b && b - x > 0.5 * (x - a)) {
      cuts.push_back(x);
      x = a + (x - a) * 10.0;
    }
  }
  cuts.push_back(b);
  const double share = 1e-2 * abs_tol / static_cast<double>(cuts.size() - 1);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) refine(f, cuts[i], cuts[i + 1], share, 0, out);
  if (!std::isfinite(out.value) || out.error > abs_tol * std::max(1.0, std::abs(out.value))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "quadrature did not converge on [%.9g, %.9g], error estimate %.3g", a, b, out.error);
    throw QuadratureError(buf, out.error);
  }
  return out;
}

Vec unit_direction(const Vec& r, double* norm) {
  double n = 0.0;
  for (double x : r) n += x * x;
  n = std::sqrt(n);
  if (norm) *norm = n;
  Vec e(r.size(), 0.0);
  if (n == 0.0) {
    if (!e.empty()) e[0] = 1.0;
    return e;
  }
  for (size_t i = 0; i < r.size(); ++i) e[i] = r[i] / n;
  return e;
}

double radial_psi(const ModelSpec& model, const Vec& e, double lambda) {
  if (model.dimension == 1) {
    const double sg = e[0] < 0.0 ? -1.0 : 1.0;
    return sg * model.psi.value(sg * lambda);
  }
  if (lambda == 0.0) return 0.0;
  return lambda * model.psi.g(lambda);
}

FluxObjects::FluxObjects(ModelSpec model, double quad_tol, std::optional<double> c0)
    : model_(std::move(model)), quad_tol_(quad_tol) {
  model_.validate();
  if (!(quad_tol_ > 0.0)) throw ModelError("quadrature tolerance must be positive");
  if (c0) growth_ = growth_constants(*c0);
}

QuadResult FluxObjects::potential_radial(const Vec& e, double rho) const {
  if (rho == 0.0) return {};
  return integrate([&](double lam) { return radial_psi(model_, e, lam); }, 0.0, rho, quad_tol_);
}

double FluxObjects::potential(const Vec& r) const {
  if (static_cast<int>(r.size()) != model_.dimension)
    throw ModelError("potential argument has dimension " + std::to_string(r.size()));
  double rho = 0.0;
  const Vec e = unit_direction(r, &rho);
  if (std::isinf(rho)) return rho;
  return potential_radial(e, rho).value;
}

Vec FluxObjects::flux_a(double z, const Vec& xi) const {
  if (static_cast<int>(xi.size()) != model_.dimension)
    throw ModelError("flux argument has dimension " + std::to_string(xi.size()));
  const double az = std::abs(z);
  if (az < z_floor) return Vec(xi.size(), 0.0);
  Vec r(xi.size());
  for (size_t i = 0; i < xi.size(); ++i) r[i] = xi[i] / az;
  Vec out = eval_psi(model_, r);
  const double ph = model_.phi.value(z);
  for (double& x : out) x *= ph;
  return out;
}

std::pair<double, double> FluxObjects::h_and_recession(double z, const Vec& xi) const {
  const Vec a = flux_a(z, xi);
  double h = 0.0, n = 0.0;
  for (size_t i = 0; i < xi.size(); ++i) {
    h += a[i] * xi[i];
    n += xi[i] * xi[i];
  }
  return {h, model_.phi.value(z) * std::sqrt(n)};
}

double FluxObjects::lagrangian(double z, const Vec& xi) const {
  const double az = std::abs(z);
  if (az < z_floor) return 0.0;
  Vec r(xi.size());
  for (size_t i = 0; i < xi.size(); ++i) r[i] = xi[i] / az;
  return az * model_.phi.value(z) * potential(r);
}

GrowthConstants FluxObjects::growth_constants(double c0) const {
  if (!(c0 > 0.0 && c0 < 1.0)) throw ModelError("growth constant c0 must lie in (0,1)");
  Vec e(static_cast<size_t>(model_.dimension), 0.0);
  e[0] = 1.0;
  const SampleGrid grid = SampleGrid::standard();
  const Vec& pts = grid.log_points;
  // last grid index below the threshold; everything after it must stay above
  long below = -1;
  for (size_t i = 0; i < pts.size(); ++i)
    if (radial_psi(model_, e, pts[i]) < c0) below = static_cast<long>(i);
  if (below == static_cast<long>(pts.size()) - 1)
    throw ModelError("growth threshold r~ not found: psi stays below c0 up to r = " + std::to_string(pts.back()));
  double lo = below < 0 ? 0.0 : pts[static_cast<size_t>(below)];
  double hi = pts[static_cast<size_t>(below + 1)];
  while (hi - lo > 1e-8 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (radial_psi(model_, e, mid) >= c0)
      hi = mid;
    else
      lo = mid;
  }
  GrowthConstants gc;
  gc.c0 = c0;
  gc.C0 = c0;
  gc.r_tilde = hi;
  gc.D0 = c0 * hi;
  return gc;
}

GrowthCheck FluxObjects::verify_growth(const GrowthConstants& gc, int n_samples, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> expo(-3.0, 3.0);
  std::normal_distribution<double> nd;
  GrowthCheck out;
  out.samples = n_samples;
  out.worst_margin = std::numeric_limits<double>::infinity();
  const size_t d = static_cast<size_t>(model_.dimension);
  for (int k = 0; k < n_samples; ++k) {
    const double z = std::pow(10.0, expo(rng) / 1.5);
    Vec xi(d);
    double n2 = 0.0;
    const double mag = std::pow(10.0, expo(rng));
    for (auto& x : xi) {
      x = nd(rng);
      n2 += x * x;
    }
    for (auto& x : xi) x *= mag / std::sqrt(n2);
    const double ph = model_.phi.value(z);
    const double f = lagrangian(z, xi);
    const double lower = gc.C0 * ph * mag - gc.D0 * z * ph;
    const double margin = (f - lower) / std::max(1.0, ph * (mag + z));
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_z = z;
      out.worst_xi = xi;
    }
  }
  out.holds = out.worst_margin >= -1e-12;
  return out;
}

}  // namespace saturex
