#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "saturex/models.hpp"
#include "saturex/solver.hpp"

namespace saturex {

// Raw [section] -> key -> value text, as read from an INI-style file.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

RawConfig read_raw_config(const std::string& path);
RawConfig parse_raw_config(const std::string& text);

enum class DatumKind { Box, Semicircle, Gaussian, Staircase, Samples };
std::string to_string(DatumKind k);

struct DatumSpec {
  DatumKind kind = DatumKind::Box;
  double center = 0.0;
  // box
  double half_width = 0.5;
  double height = 1.0;
  // semicircle
  double radius = 0.5;
  // gaussian, truncated at cutoff * sigma
  double sigma = 0.1;
  double cutoff = 6.0;
  // staircase: high on [left, step), low on [step, right)
  double left = -0.5;
  double step = 0.0;
  double right = 0.5;
  double high = 1.0;
  double low = 0.5;
  // samples: one value per cell
  Vec samples;

  // Cell averages on `grid`; box and staircase averages are exact.
  Vec cell_averages(const Grid1D& grid) const;
  // Same datum with its support widened by `factor` about its center.
  DatumSpec widened(double factor) const;
};

enum class SubProfile { None, Semicircle, ThetaPower };

struct VerifySpec {
  bool support = true;
  double edge_threshold_rel = 1e-8;
  // defaults to s for the linear template, otherwise only the bound is checked
  std::optional<double> edge_speed;
  double edge_speed_tol = 0.05;
  double edge_slack_cells = 10.0;

  bool jump = false;
  std::string jump_pick = "rightmost";
  double jump_t_from = 0.0;
  double jump_t_to = std::numeric_limits<double>::infinity();
  double jump_min_gap = 0.1;
  // relative tolerance on the measured jump speed
  double jump_speed_tol = 0.07;
  std::optional<double> jump_speed;
  double jump_threshold = 0.2;
  int jump_plateau = 8;
  int jump_skip = 2;
  int jump_span = 1;
  double jump_fit_fraction = 0.6;

  bool super = false;

  SubProfile sub = SubProfile::None;
  double sub_R = 0.5;
  double sub_c = 0.9;
  double sub_theta = 0.5;
  double sub_gamma0 = 0.1;
  double sub_center = 0.0;

  bool contraction = false;
  double contraction_widen = 1.1;

  // ordering / contraction tolerance in units of dx * ||u0||_inf
  double tol_cells = 10.0;
};

struct SweepAxis {
  std::string section;
  std::string key;
  std::vector<std::string> values;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::string mode = "verify";
};

struct ExperimentConfig {
  std::string id = "experiment";
  std::uint64_t seed = 1;
  std::string psi = "rhe";
  std::string phi = "linear";
  double s = 1.0;
  double L = 1.0;
  Grid1D grid{-4.0, 4.0, 1024};
  DatumSpec datum;
  SolverConfig solver;
  VerifySpec verify;
  std::string output_dir = ".";
  SweepSpec sweep;
  RawConfig raw;

  ModelSpec model() const;
  Vec initial_datum() const { return datum.cell_averages(grid); }
};

// Throws ConfigError naming the offending [section] key.
ExperimentConfig config_from_raw(const RawConfig& raw);
ExperimentConfig load_config(const std::string& path);

// "a:b:step" or "v1,v2,..."; `field` names the source in error messages.
Vec parse_number_list(const std::string& text, const std::string& field);

}  // namespace saturex
