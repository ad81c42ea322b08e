#pragma once

#include <string>
#include <vector>

#include "saturex/models.hpp"

namespace saturex {

enum class Averaging { Arithmetic, UpwindMin };
std::string to_string(Averaging a);
Averaging parse_averaging(const std::string& s);

struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_cells = 8;

  Grid1D() = default;
  Grid1D(double x_min, double x_max, int n_cells);
  double dx() const { return (x_max - x_min) / n_cells; }
  double center(int i) const { return x_min + (i + 0.5) * dx(); }
  Vec centers() const;
  void validate() const;
};

struct SolverConfig {
  double cfl = 0.4;
  // relative to ||u0||_inf
  double u_floor_rel = 1e-30;
  double end_time = 1.0;
  Vec snapshot_times;
  Averaging averaging = Averaging::Arithmetic;

  void validate() const;
};

struct DtStats {
  double min = 0.0;
  double max = 0.0;
  double sum = 0.0;
  long count = 0;
  void add(double dt);
};

struct SolverState {
  Grid1D grid;
  Vec u;
  double t = 0.0;
  double mass0 = 0.0;
  double u0_max = 0.0;
  double u_floor = 0.0;
  long step_count = 0;
  DtStats dt_history;
  double clipped_mass = 0.0;
  double max_step_clip = 0.0;

  double mass() const;
};

SolverState make_state(const Grid1D& grid, const Vec& u0, const SolverConfig& cfg);

// max of phi' on [0, beta]: coarse scan, golden-section refinement, endpoint checks
double max_phi_prime(const PhiFamily& phi, double beta);
// sup of phi(z)/z on (0, beta]
double max_phi_ratio(const PhiFamily& phi, double beta);
// physical propagation bound max(theta, sup phi(z)/z)
double propagation_speed(const ModelSpec& model, double u_max);

double interface_flux(const ModelSpec& model, double uL, double uR, double dx, const SolverConfig& cfg,
                      double u_floor = 0.0);
double stable_dt(const ModelSpec& model, const SolverState& state, const SolverConfig& cfg);
SolverState step(const ModelSpec& model, SolverState state, const SolverConfig& cfg);

struct Snapshot {
  double t_requested = 0.0;
  double t = 0.0;
  double mass = 0.0;
  Vec u;
};

struct Trajectory {
  std::string model_id;
  Grid1D grid;
  SolverConfig cfg;
  Vec u0;
  double u0_max = 0.0;
  double mass0 = 0.0;
  std::vector<Snapshot> snapshots;
  long steps = 0;
  DtStats dt;
  double clipped_mass = 0.0;
  double max_step_clip = 0.0;
  double max_mass_drift = 0.0;
};

Trajectory run(const ModelSpec& model, const Grid1D& grid, const Vec& u0, const SolverConfig& cfg);

// sum_i (a_i - b_i)^+ dx
double positive_part_l1(const Vec& a, const Vec& b, double dx);

}  // namespace saturex
