#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "saturex/models.hpp"

namespace saturex {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b], split into decades for long intervals.
// Throws QuadratureError when the error estimate exceeds abs_tol * max(1, |I|).
QuadResult integrate(const ScalarFn& f, double a, double b, double abs_tol = 1e-10);

// e . psi(lambda e) for a unit direction e.
double radial_psi(const ModelSpec& model, const Vec& e, double lambda);
Vec unit_direction(const Vec& r, double* norm);

struct GrowthConstants {
  double c0 = 0.0;
  double C0 = 0.0;
  double D0 = 0.0;
  double r_tilde = 0.0;
};

struct GrowthCheck {
  int samples = 0;
  double worst_margin = 0.0;
  double worst_z = 0.0;
  Vec worst_xi;
  bool holds = false;
};

class FluxObjects {
 public:
  explicit FluxObjects(ModelSpec model, double quad_tol = 1e-10, std::optional<double> c0 = std::nullopt);

  const ModelSpec& model() const { return model_; }
  double quad_tol() const { return quad_tol_; }
  const std::optional<GrowthConstants>& cached_growth() const { return growth_; }

  // Phi(r) = int_0^1 psi(t r) . r dt
  double potential(const Vec& r) const;
  QuadResult potential_radial(const Vec& e, double rho) const;

  Vec flux_a(double z, const Vec& xi) const;
  // (h, h0) with h = a . xi, h0 = phi(z)|xi|
  std::pair<double, double> h_and_recession(double z, const Vec& xi) const;
  // f(z, xi) = |z| phi(z) Phi(xi/|z|)
  double lagrangian(double z, const Vec& xi) const;

  GrowthConstants growth_constants(double c0) const;
  GrowthCheck verify_growth(const GrowthConstants& gc, int n_samples, std::uint64_t seed) const;

  static constexpr double z_floor = 1e-30;

 private:
  ModelSpec model_;
  double quad_tol_;
  std::optional<GrowthConstants> growth_;
};

}  // namespace saturex
