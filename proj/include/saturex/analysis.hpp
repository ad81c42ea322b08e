#pragma once

#include <limits>
#include <string>
#include <vector>

#include "saturex/models.hpp"
#include "saturex/solver.hpp"

namespace saturex {

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = 0.0;
  double residual = 0.0;
  int n = 0;
};
LineFit least_squares(const Vec& t, const Vec& y);

// ---------------------------------------------------------------- support

struct EdgeSeries {
  double threshold = 0.0;
  Vec t;
  Vec left;
  Vec right;
  LineFit left_fit;
  LineFit right_fit;
  // (right[k] - right[k-1]) / (t[k] - t[k-1])
  Vec right_interval_speeds;
  Vec left_interval_speeds;
};

// Outermost threshold crossings per snapshot, linearly interpolated between
// cell centers; speeds fitted over the last half of the snapshots.
EdgeSeries track_support(const Trajectory& tr, double threshold);
double edge_threshold(const Trajectory& tr, double rel = 1e-8);

// ---------------------------------------------------------------- jumps

struct JumpParams {
  double threshold = 0.2;
  int plateau_width = 8;
  int skip = 2;
  // half-width of the difference stencil; 1 compares neighbouring cells
  int span = 1;
};

struct Jump {
  double position = 0.0;
  int interface = 0;
  double u_plus = 0.0;
  double u_minus = 0.0;
  // +1 when the high side is on the left (a front facing +x)
  int orientation = 1;
  int layer_lo = 0;
  int layer_hi = 0;
};

std::vector<Jump> detect_jumps(const Vec& u, const Grid1D& grid, const JumpParams& prm = {});

enum class JumpPick { Rightmost, Leftmost, RightmostInterior };

struct JumpTrack {
  Vec t;
  Vec position;
  Vec u_plus;
  Vec u_minus;
  Vec edge_flux;
  Vec phi_plus;
  LineFit fit;
  // a jump was found at the last snapshot of the window
  bool persisted = false;
};

// Follows one jump across snapshots with t in [t_from, t_to]; the speed is a
// least-squares fit over the last `fit_fraction` of the detections.
// RightmostInterior keeps jumps with orientation +1 and u_minus above
// `interior_floor` * max u.
JumpTrack track_jump(const Trajectory& tr, const ModelSpec& model, const JumpParams& prm, JumpPick pick,
                     double t_from = 0.0, double t_to = std::numeric_limits<double>::infinity(),
                     double fit_fraction = 0.6, double interior_floor = 0.05);

// ---------------------------------------------------------------- Rankine-Hugoniot

double rh_speed(const PhiFamily& phi, double u_plus, double u_minus);
double admissible_minus(const PhiFamily& phi, double u_plus, double v);

// ---------------------------------------------------------------- profiles

enum class ProfileKind { SuperIndicator, SubSemicircle, SubThetaPower };
std::string to_string(ProfileKind k);

struct ProfileSpec {
  ProfileKind kind = ProfileKind::SuperIndicator;
  // super indicator
  double beta = 0.0;
  double a = 0.0;
  double b = 0.0;
  double theta_speed = 0.0;
  // sub-solutions
  double A = 0.0;
  double R = 0.0;
  double c = 0.0;
  double theta = 0.5;
  double gamma0 = 0.0;
  double center = 0.0;
  // validity window [0, T]
  double T = std::numeric_limits<double>::infinity();
  // diagnostics of the A search
  double infimum = 0.0;
  double worst_lambda = 0.0;
  double worst_time = 0.0;

  bool is_super() const { return kind == ProfileKind::SuperIndicator; }
  double radius(double t) const { return R + c * t; }
  double eval(double t, double x) const;
  Vec sample(double t, const Grid1D& grid) const;
};

ProfileSpec super_indicator(const ModelSpec& model, double beta, double a, double b,
                            double T = std::numeric_limits<double>::infinity());
ProfileSpec sub_semicircle(const ModelSpec& model, double R, double c, double T, double center = 0.0);
ProfileSpec sub_theta_power(const ModelSpec& model, double R, double c, double theta, double gamma0, double T,
                            double center = 0.0);

// Right-hand side of the sub-solution inequality at x = lambda R(t), divided by W.
double sub_inequality_rhs(const ModelSpec& model, double R_t, double c, double theta, double gamma0, double lambda,
                          double delta);
// lambda grid in [0, 1) refined towards 1: pairs (lambda, 1 - lambda)
std::vector<std::pair<double, double>> lambda_grid();

// Builds a trajectory whose snapshots are exact profile samples.
Trajectory sample_profile(const ProfileSpec& p, const Grid1D& grid, const Vec& times);

struct OrderingVerdict {
  double t = 0.0;
  double metric = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct OrderingReport {
  std::string profile;
  double initial_metric = 0.0;
  double tol = 0.0;
  std::vector<OrderingVerdict> verdicts;
  bool all_pass() const;
};

// sub: ||(W - u)^+||_1, super: ||(u - W)^+||_1, each bounded by the t = 0 value + tol.
OrderingReport verify_profile_ordering(const Trajectory& tr, const ProfileSpec& profile, double tol);

struct ContractionReport {
  Vec t;
  // ||(u - v)^+||_1 with t = 0 first
  Vec forward;
  Vec backward;
  double tol = 0.0;
  bool forward_pass = false;
  bool backward_pass = false;
};

ContractionReport l1_contraction(const Trajectory& a, const Trajectory& b, double tol);

// ---------------------------------------------------------------- report

struct Check {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct FrontReport {
  std::string model_id;
  EdgeSeries edges;
  std::vector<std::vector<Jump>> jumps;
  JumpTrack tracked;
  double predicted_edge_speed = 0.0;
  double predicted_jump_speed = std::numeric_limits<double>::quiet_NaN();
  std::vector<Check> checks;
  bool all_pass() const;
};

}  // namespace saturex
