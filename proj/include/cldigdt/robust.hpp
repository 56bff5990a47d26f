#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cldigdt/ambiguity.hpp"
#include "cldigdt/dispatch.hpp"
#include "cldigdt/milp.hpp"
#include "cldigdt/network.hpp"
#include "cldigdt/uset.hpp"

namespace cldigdt {

struct BudgetSpec {
  double lambda0 = 0.0;  // deterministic optimum on the same case/forecast
  double sigma = 0.0;    // acceptable budget excess fraction

  double budget() const { return (1.0 + sigma) * lambda0; }
  /// Numerical slack granted on the budget row.
  double slack() const { return 1e-6 * std::abs(lambda0); }
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IgdtResult {
  double delta_star = 0.0;
  FirstStageSchedule schedule;
  double worst_case_cost = 0.0;
  double first_stage_cost = 0.0;
  SolveStatus status = SolveStatus::Error;
};

struct RobustOptions {
  int pla_segments = 50;
  bool enforce_corners = false;  // also pin the low-load / high-PV corner
  SolveParams solve;
};

/// Classic envelope-bound benchmark: one MILP maximizing the shared
/// deviation delta with the recourse stage pinned at loads (1+delta) x
/// forecast and PV (1-delta) x forecast, subject to the cost budget.
IgdtResult solve_igdt(const NetworkCase& net, const Scenario& forecast, const BudgetSpec& budget,
                      const RobustOptions& options = {});

struct ClDigdtIteration {
  int itr = 0;
  double incumbent_alpha = 0.0;
  double lb = 0.0;
  double ub = 0.0;
  double worst_case_cost = 0.0;
};

struct ClDigdtResult {
  double alpha_star = 0.0;
  double lb = 0.0, ub = 0.0;
  double sigma = 0.0, budget = 0.0, lambda0 = 0.0;
  double worst_case_cost = 0.0;
  double first_stage_cost = 0.0;
  std::vector<ClDigdtIteration> trace;
  FirstStageSchedule schedule;
  ConfidenceSet set_at_alpha;  // enveloped set certified at alpha_star
  SolveStatus status = SolveStatus::Error;
};

struct ClDigdtOptions {
  double epsilon = 1e-4;  // bracket accuracy, >= 1e-6
  int pla_segments = 50;
  bool enforce_corners = false;
  SolveParams solve;
  std::optional<std::string> cache_path;  // offline set cache, reused if present
};

/// Grid-and-refine search for the largest budget-feasible confidence level.
/// Each iteration tabulates confidence sets at eleven candidate levels
/// offline, embeds them behind selection binaries and solves one MILP
/// maximizing alpha; the chosen sub-interval brackets the optimum and is
/// split tenfold until its width reaches epsilon.
ClDigdtResult solve_cl_digdt(const NetworkCase& net, const std::vector<SourceBand>& bands,
                             const Scenario& forecast, const BudgetSpec& budget,
                             const ClDigdtOptions& options = {});

struct AlphaChoiceHandles {
  std::vector<VarRef> u;                  // selection binaries, one per grid level
  std::vector<double> level_alpha;        // the grid levels (interval lower ends)
  LinExpr alpha;                          // sum of the boxed alpha_m parts
  std::vector<VarRef> xi_load, xi_pv;     // per set entry; invalid when other kind
  std::vector<double> big_m;              // per entry
};

/// Selection binaries u_m with sum 1, alpha boxed into the chosen
/// sub-interval, and per-entry scenario variables tied to the chosen set by
/// big-M rows: boxed inside [lo_m, hi_m] and pinned to the cost-extreme end
/// (loads at hi_m, PV at lo_m). big_m = 0 picks each entry's grid spread
/// plus a 10% margin.
AlphaChoiceHandles embed_alpha_choice(MilpModel& model, const AlphaGrid& grid,
                                      double big_m = 0.0);

}  // namespace cldigdt
