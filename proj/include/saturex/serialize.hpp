#pragma once

#include <iosfwd>
#include <string>

#include "json.hpp"
#include "saturex/analysis.hpp"
#include "saturex/lagrangian.hpp"
#include "saturex/models.hpp"
#include "saturex/solver.hpp"
#include "saturex/transport.hpp"

namespace saturex {

using Json = nlohmann::ordered_json;

// 17 significant digits; non-finite values print as "infinite", "-infinite", "nan".
std::string fmt17(double x);
// finite numbers as numbers, +inf as "infinite", nan as null
Json num(double x);

Json to_json(const TailFit& f);
Json to_json(const AssumptionItem& it);
Json to_json(const AssumptionReport& rep);
Json to_json(const PhiReport& rep);
Json to_json(const GrowthConstants& gc);
Json to_json(const GrowthCheck& gc);
Json to_json(const BoundaryValue& bv);
Json to_json(const CostTable& table);
Json to_json(const LineFit& f);
Json to_json(const EdgeSeries& es);
Json to_json(const Jump& j);
Json to_json(const JumpTrack& jt);
Json to_json(const Check& c);
Json to_json(const FrontReport& rep);
Json to_json(const ProfileSpec& p);
Json to_json(const OrderingReport& rep);
Json to_json(const ContractionReport& rep);
Json to_json(const Grid1D& g);
Json to_json(const SolverConfig& cfg);
// run metadata: model, grid, solver config, mass drift, dt statistics
Json trajectory_metadata(const Trajectory& tr);

// v,k,classification,pbar,residual,closed_form (one velocity component per column for d > 1)
void write_cost_csv(std::ostream& os, const CostTable& table);
// t,x,u with one block per snapshot
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);

}  // namespace saturex
