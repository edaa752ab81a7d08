#pragma once

// Carbon-offset investment planning as a small integer program.
//
//   max_offset:  maximise sum(x_i)  s.t.  sum(x_i * c_i) <= J,
//                ceil(J * X_i / c_i) <= x_i <= floor(J / c_i)
//   min_cost:    minimise sum(x_i * c_i)  s.t.  sum(x_i) >= target
//
// x_i are whole offset units (1 MTCO2e, or 1/granularity MTCO2e), costs and
// budget are integer minor currency units. Both modes break ties
// deterministically: best objective, then lower cost (or higher offset),
// then the lexicographically smallest allocation in project order.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netzero/datastore.hpp"

namespace netzero {

struct ForecastBundle;

enum class OffsetMode { max_offset, min_cost };
const char* to_string(OffsetMode m);
OffsetMode parse_offset_mode(std::string_view s);

struct OffsetProject {
  std::string name;          // wind, solar, biomass, energy_efficiency, agroforestry or custom
  Minor unit_cost = 0;       // per MTCO2e
  double min_share = 0.0;    // fraction of the budget, budget mode only
  bool enabled = true;
};

struct OffsetInstance {
  std::vector<OffsetProject> projects;
  OffsetMode mode = OffsetMode::max_offset;
  std::optional<Minor> budget;           // max_offset
  std::optional<double> target_offset;   // min_cost, MTCO2e
  std::int64_t granularity = 1;          // allocation units per MTCO2e
  std::vector<std::string> annotations;  // carried through, no numeric role

  /// Throws Error(invalid_argument) for malformed input (non-positive cost,
  /// missing budget/target, negative share). Contradictory but well-formed
  /// instances are reported as infeasible plans instead.
  void validate() const;
};

struct OffsetAllocation {
  std::string project;
  std::int64_t units = 0;
  Minor cost = 0;
};

struct OffsetPlan {
  OffsetMode mode = OffsetMode::max_offset;
  bool feasible = false;
  std::vector<OffsetAllocation> allocations;  // one per instance project, disabled ones at 0
  std::int64_t total_units = 0;
  double total_offset = 0.0;  // MTCO2e
  Minor total_cost = 0;
  std::vector<std::string> violations;
  std::uint64_t nodes_explored = 0;
};

OffsetPlan solve_max_offset(const OffsetInstance& instance);
OffsetPlan solve_min_cost(const OffsetInstance& instance);
OffsetPlan solve(const OffsetInstance& instance);

/// Per-project unit bounds in budget mode, {P_min, P_max}.
std::pair<std::int64_t, std::int64_t> unit_bounds(const OffsetProject& p, Minor budget, std::int64_t granularity);

/// Sum over months of max(0, forecast - planned green) * factor / 1000, in
/// MTCO2e. Throws Error(invalid_argument) when the lengths differ.
double emissions_liability(std::span<const ForecastBundle> horizon, std::span<const double> planned_green_kwh,
                           double emission_factor);

}  // namespace netzero
