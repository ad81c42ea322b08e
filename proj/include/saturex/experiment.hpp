#pragma once

#include <optional>
#include <string>
#include <vector>

#include "saturex/analysis.hpp"
#include "saturex/config.hpp"
#include "saturex/serialize.hpp"

namespace saturex {

struct ProfileOrdering {
  ProfileSpec profile;
  OrderingReport report;
};

struct VerifyResult {
  std::string id;
  Trajectory trajectory;
  FrontReport front;
  std::vector<ProfileOrdering> orderings;
  std::optional<ContractionReport> contraction;
  // front checks followed by ordering and contraction checks
  std::vector<Check> checks;
  bool all_pass() const;
};

Trajectory simulate_experiment(const ExperimentConfig& cfg);
VerifyResult verify_experiment(const ExperimentConfig& cfg);
Json to_json(const VerifyResult& r);

// Writes <dir>/<id>_trajectory.csv and <dir>/<id>_meta.json; returns the CSV path.
std::string write_simulation(const ExperimentConfig& cfg, const Trajectory& tr);
// Writes <dir>/<id>_report.json; returns its path.
std::string write_verification(const ExperimentConfig& cfg, const VerifyResult& r);

// One child config per point of the cartesian product of the sweep axes. Axes
// are sorted by name and the last one varies fastest; child ids are <id>_<index>.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);

struct SweepOutcome {
  std::string id;
  std::vector<std::string> values;
  // 0 pass, 1 verification failure, 2 config error
  int status = 0;
  std::string message;
};

// Runs the children on up to `threads` workers; results keep the expansion order.
std::vector<SweepOutcome> run_sweep(const ExperimentConfig& cfg, int threads);
// SATUREX_THREADS if set and positive, otherwise the hardware concurrency
int sweep_threads();

}  // namespace saturex
