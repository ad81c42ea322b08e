#pragma once

#include <optional>
#include <string>
#include <vector>

#include "saturex/models.hpp"

namespace saturex {

enum class CostClass { FiniteInterior, FiniteBoundary, Infinite, Indeterminate };
std::string to_string(CostClass c);

struct TransportParams {
  double divergence_cap_factor = 1e6;
  double p_max = 1e12;
  double boundary_band = 1e-9;
  double quad_tol = 1e-10;
  double nonintegrable_exponent = 1.0 + 1e-3;
  double fit_tol = 0.1;
};

struct ConjugateResult {
  double value = 0.0;
  CostClass classification = CostClass::FiniteInterior;
  double pbar = 0.0;
  double residual = 0.0;
  std::string diagnostic;
};

struct BoundaryValue {
  double value = 0.0;
  CostClass classification = CostClass::FiniteBoundary;
  double body = 0.0;
  double tail = 0.0;
  double tail_exponent = 0.0;
  double tail_residual = 0.0;
  std::string diagnostic;
};

// k*(r) = s Phi(r)
double kstar(const ModelSpec& model, const Vec& r, const TransportParams& prm = {});
ConjugateResult conjugate(const ModelSpec& model, const Vec& v, const TransportParams& prm = {});
BoundaryValue boundary_value(const ModelSpec& model, const Vec& direction, const TransportParams& prm = {});

struct CostRow {
  Vec v;
  double k = 0.0;
  CostClass classification = CostClass::FiniteInterior;
  double pbar = 0.0;
  double residual = 0.0;
  std::optional<double> closed_form;
  std::string diagnostic;
};

struct CostTable {
  std::string model_id;
  double s = 1.0;
  std::vector<CostRow> rows;
};

// Closed form for the relativistic p = 2 template: s (1 - sqrt(1 - |v|^2/s^2)).
std::optional<double> closed_form_cost(const ModelSpec& model, const Vec& v);

CostTable cost_table(const ModelSpec& model, const std::vector<Vec>& velocities, const TransportParams& prm = {});

}  // namespace saturex
