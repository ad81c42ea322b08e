#include "saturex/transport.hpp"

#include <cmath>
#include <limits>

#include "saturex/errors.hpp"
#include "saturex/lagrangian.hpp"

namespace saturex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double radial_gap(const ModelSpec& model, const Vec& e, double lambda) {
  if (model.psi.kind() != PsiKind::Custom) return model.psi.gap(lambda);
  return 1.0 - radial_psi(model, e, lambda);
}

void require_ray_search(const ModelSpec& model) {
  if (model.dimension > 1 && !model.psi.has_radial())
    throw ModelError("conjugate along rays needs an isotropic psi in dimension > 1");
}

}  // namespace

std::string to_string(CostClass c) {
  switch (c) {
    case CostClass::FiniteInterior:
      return "finite-interior";
    case CostClass::FiniteBoundary:
      return "finite-boundary";
    case CostClass::Infinite:
      return "infinite";
    case CostClass::Indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

double kstar(const ModelSpec& model, const Vec& r, const TransportParams& prm) {
  const FluxObjects fo(model, prm.quad_tol);
  return model.s * fo.potential(r);
}

BoundaryValue boundary_value(const ModelSpec& model, const Vec& direction, const TransportParams& prm) {
  require_ray_search(model);
  if (static_cast<int>(direction.size()) != model.dimension)
    throw ModelError("direction has dimension " + std::to_string(direction.size()));
  double n = 0.0;
  const Vec e = unit_direction(direction, &n);
  if (n == 0.0) throw ModelError("boundary direction must be non-zero");
  BoundaryValue out;
  const SampleGrid grid = SampleGrid::standard();
  const double R = grid.log_max;
  auto gap = [&](double lam) { return radial_gap(model, e, lam); };
  out.body = integrate(gap, 0.0, R, prm.quad_tol).value;
  const TailFit fit = fit_tail(gap, grid.log_points, prm.fit_tol);
  out.tail_exponent = fit.exponent;
  out.tail_residual = fit.residual;
  if (!fit.reported) {
    out.classification = CostClass::Indeterminate;
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.diagnostic = "tail fit of 1 - psi over the last decade is inconclusive";
    return out;
  }
  if (fit.super_polynomial) {
    out.tail = 0.0;
  } else if (fit.exponent <= prm.nonintegrable_exponent) {
    out.classification = CostClass::Infinite;
    out.value = kInf;
    out.diagnostic = "1 - psi decays like r^-" + std::to_string(fit.exponent) + ": not integrable";
    return out;
  } else {
    out.tail = fit.prefactor * std::pow(R, 1.0 - fit.exponent) / (fit.exponent - 1.0);
  }
  out.classification = CostClass::FiniteBoundary;
  out.value = model.s * (out.body + out.tail);
  return out;
}

ConjugateResult conjugate(const ModelSpec& model, const Vec& v, const TransportParams& prm) {
  require_ray_search(model);
  if (static_cast<int>(v.size()) != model.dimension)
    throw ModelError("velocity has dimension " + std::to_string(v.size()));
  ConjugateResult out;
  double speed = 0.0;
  const Vec e = unit_direction(v, &speed);
  const double s = model.s;
  if (speed == 0.0) return out;
  const FluxObjects fo(model, prm.quad_tol);

  if (std::abs(speed - s) <= prm.boundary_band * s) {
    const BoundaryValue bv = boundary_value(model, e, prm);
    out.value = bv.value;
    out.classification = bv.classification == CostClass::FiniteBoundary ? CostClass::FiniteBoundary : bv.classification;
    out.pbar = kInf;
    out.diagnostic = bv.diagnostic.empty() ? "boundary value" : bv.diagnostic;
    return out;
  }

  if (speed > s) {
    const double cap = prm.divergence_cap_factor * s * std::max(1.0, speed);
    double gamma = 0.0, lam = 1.0;
    for (; lam <= prm.p_max * (1.0 + 1e-12); lam *= 10.0) {
      gamma = lam * speed - s * fo.potential_radial(e, lam).value;
      if (gamma > cap) break;
    }
    out.value = kInf;
    out.classification = CostClass::Infinite;
    out.pbar = std::min(lam, prm.p_max);
    out.residual = gamma;
    out.diagnostic = gamma > cap ? "Gamma exceeded divergence cap" : "Gamma grows linearly but stayed below cap up to p_max";
    return out;
  }

  const double tau = speed / s;
  double lo = 0.0, hi = 1.0;
  while (radial_psi(model, e, hi) < tau) {
    lo = hi;
    hi *= 2.0;
    if (hi > prm.p_max) {
      const BoundaryValue bv = boundary_value(model, e, prm);
      out.value = bv.value;
      out.classification = bv.classification;
      out.pbar = kInf;
      out.diagnostic = "bracket failure: psi below |v|/s up to p_max; reclassified at the boundary";
      return out;
    }
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (radial_psi(model, e, mid) < tau)
      lo = mid;
    else
      hi = mid;
  }
  const double p = 0.5 * (lo + hi);
  out.pbar = p;
  out.residual = std::abs(radial_psi(model, e, p) - tau);
  out.value = p * speed - s * fo.potential_radial(e, p).value;
  out.classification = CostClass::FiniteInterior;
  return out;
}

std::optional<double> closed_form_cost(const ModelSpec& model, const Vec& v) {
  if (model.psi.kind() != PsiKind::RelativisticP || model.psi.parameter() != 2.0) return std::nullopt;
  if (model.phi.kind() != PhiKind::LinearSpeed) return std::nullopt;
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  const double s = model.s;
  if (n > s) return kInf;
  const double t = n / s;
  return s * (t * t) / (1.0 + std::sqrt((1.0 - t) * (1.0 + t)));
}

CostTable cost_table(const ModelSpec& model, const std::vector<Vec>& velocities, const TransportParams& prm) {
  CostTable t;
  t.model_id = model.id();
  t.s = model.s;
  t.rows.reserve(velocities.size());
  for (const Vec& v : velocities) {
    const ConjugateResult c = conjugate(model, v, prm);
    CostRow row;
    row.v = v;
    row.k = c.value;
    row.classification = c.classification;
    row.pbar = c.pbar;
    row.residual = c.residual;
    row.diagnostic = c.diagnostic;
    row.closed_form = closed_form_cost(model, v);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace saturex
