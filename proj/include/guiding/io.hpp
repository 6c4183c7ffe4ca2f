#pragma once

#include "guiding/dynnet.hpp"
#include "guiding/hjb.hpp"
#include "guiding/sdesim.hpp"

#include <json.hpp>

#include <string>

namespace guiding::io {

using json = nlohmann::json;

// Topology JSON: {"num_users": U, "edges": [[i, j, w], ...]} with edges in
// canonical (source, target) order for bit-stable round trips.
json topology_to_json(const NetworkTopology& topology);
NetworkTopology topology_from_json(const json& j, bool allow_self_loops = false);

// EventLog CSV: header `t,user`, times printed with 9 fixed decimals.
std::string event_log_to_csv(const EventLog& log);
EventLog event_log_from_csv(const std::string& csv, double t0, double t1);

// Trajectory CSV: long format `t,user,x,u`.
std::string trajectory_to_csv(const Trajectory& traj);

json cost_breakdown_to_json(const CostBreakdown& cost);
json monte_carlo_cost_to_json(const MonteCarloCost& mc);

// ValueCoefficients JSON: {"kind", "grid": {t0, t1, steps}, "v0": [...],
// "v1": [[...]], "v11": lower-triangle rows per grid point (LSOG only)}.
json value_coefficients_to_json(const ValueCoefficients& coeffs);
ValueCoefficients value_coefficients_from_json(const json& j);

// LinkEvents CSV: `t,source,target`.
std::string link_events_to_csv(const LinkEvents& events);
LinkEvents link_events_from_csv(const std::string& csv, double t0, double t1);

json gamma_fit_to_json(const GammaFit& fit);

void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// Fixed-point 9-decimal text used for CSV time columns.
std::string format_time(double t);

// Shortest round-trip text for state/control/cost values.
std::string format_value(double v);

} // namespace guiding::io
