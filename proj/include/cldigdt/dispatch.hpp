#pragma once

#include <string>
#include <vector>

#include "cldigdt/milp.hpp"
#include "cldigdt/network.hpp"
#include "cldigdt/uset.hpp"

namespace cldigdt {

struct FirstStageSchedule {
  std::vector<std::vector<double>> dg_power;      // [dg][t] kW
  std::vector<std::vector<double>> ess_charge;    // [ess][t] kW
  std::vector<std::vector<double>> ess_discharge; // [ess][t] kW
  std::vector<std::vector<double>> ess_energy;    // [ess][t] kWh, end of step
  std::vector<std::vector<int>> ess_mode;         // [ess][t], 1 = charging
  std::vector<double> purchased;                  // [t] kW
  std::vector<std::vector<double>> line_flow;     // [line][t] kW
};

struct SecondStageDecision {
  std::vector<std::vector<double>> dg_recourse;   // [dg][t] kW, signed
  std::vector<std::vector<double>> dg_total;      // [dg][t] kW
  std::vector<std::vector<double>> dg_reactive;   // [dg][t] kvar
  std::vector<double> purchased;                  // [t] kW
  std::vector<std::vector<double>> flow_p;        // [line][t] kW
  std::vector<std::vector<double>> flow_q;        // [line][t] kvar
  std::vector<std::vector<double>> voltage_sq;    // [bus][t] pu^2
};

struct CostBreakdown {
  double first_stage = 0.0;
  double second_stage = 0.0;
  double total = 0.0;
};

struct RecourseResult {
  bool feasible = false;
  SecondStageDecision decision;  // meaningful iff feasible
  double cost = 0.0;             // second-stage cost, iff feasible
};

/// Handles to the first-stage variables of a model under assembly.
struct FirstStageVars {
  std::vector<std::vector<VarRef>> dg_power;
  std::vector<std::vector<VarRef>> ess_charge, ess_discharge, ess_energy;
  std::vector<std::vector<VarRef>> ess_mode;
  std::vector<VarRef> purchased;
  std::vector<std::vector<VarRef>> line_flow;
  LinExpr cost;  // Lambda_1
};

/// First-stage quantities as the second stage sees them: live variables when
/// stages are co-optimized, constants when a schedule is re-evaluated.
struct FirstStageView {
  std::vector<std::vector<LinExpr>> dg_power;
  std::vector<std::vector<LinExpr>> ess_charge, ess_discharge;
  std::vector<LinExpr> purchased;

  static FirstStageView of(const FirstStageVars& vars);
  static FirstStageView of(const FirstStageSchedule& schedule);
};

/// Uncertain inputs as expressions, so scenarios may be constants, affine in
/// a deviation variable, or big-M selected bounds.
struct ScenarioExpr {
  std::vector<std::vector<LinExpr>> pv;    // [bus][t]
  std::vector<std::vector<LinExpr>> load;  // [bus][t]

  static ScenarioExpr of(const NetworkCase& net, const Scenario& scenario);
};

struct SecondStageVars {
  std::vector<std::vector<VarRef>> dg_recourse, dg_total, dg_reactive;
  std::vector<VarRef> purchased;
  std::vector<std::vector<VarRef>> flow_p, flow_q, voltage;
  LinExpr cost;  // Lambda_2
};

/// Economic dispatch plan: Lambda_1 objective terms plus DG limits and ramps,
/// ESS dynamics with charge-mode binaries, nodal balance at the forecast and
/// line flow limits. The substation injection is the model's slack, free of
/// sign.
FirstStageVars build_first_stage(const NetworkCase& net, const Scenario& forecast,
                                 MilpModel& model);

/// Recourse stage at one scenario: DG recourse and reactive dispatch, ramp
/// limits on post-recourse output, P/Q nodal balance, lossy-DistFlow voltage
/// drops anchored at 1.0 pu^2 on the substation, flow and voltage limits.
SecondStageVars build_second_stage(const NetworkCase& net, const FirstStageView& first,
                                   const ScenarioExpr& scenario, MilpModel& model);

struct DeterministicSolution {
  FirstStageSchedule schedule;
  SecondStageDecision decision;
  CostBreakdown cost;
  SolveStatus status = SolveStatus::Error;
};

/// Jointly minimizes Lambda_1 + Lambda_2 with every uncertain input at its
/// forecast. The optimum is the budget base Lambda_0.
DeterministicSolution solve_deterministic(const NetworkCase& net, const Scenario& forecast,
                                          const SolveParams& params = {});

/// Solves the second stage with the first stage frozen. Infeasibility is a
/// result, not an error.
RecourseResult evaluate_recourse(const NetworkCase& net, const FirstStageSchedule& schedule,
                                 const Scenario& scenario, const SolveParams& params = {});

/// The cost-extreme scenario of a confidence set: loads at their upper
/// bounds, PV at its lower bounds; entries absent from the set keep the
/// forecast value.
Scenario worst_case_scenario(const NetworkCase& net, const ConfidenceSet& uset,
                             const Scenario& forecast);

FirstStageSchedule extract_schedule(const NetworkCase& net, const FirstStageVars& vars,
                                    const Solution& sol);
SecondStageDecision extract_decision(const NetworkCase& net, const SecondStageVars& vars,
                                     const Solution& sol);

std::string schedule_to_json(const NetworkCase& net, const FirstStageSchedule& schedule);
FirstStageSchedule schedule_from_json(const std::string& text);
std::string decision_to_json(const NetworkCase& net, const SecondStageDecision& decision);
/// CSV row "first_stage,second_stage,total".
std::string cost_to_csv(const CostBreakdown& cost);

}  // namespace cldigdt
