#pragma once

#include <map>
#include <string>
#include <vector>

#include "cldigdt/dispatch.hpp"
#include "cldigdt/ingest.hpp"
#include "cldigdt/network.hpp"
#include "cldigdt/robust.hpp"

namespace cldigdt {

struct ScenarioOutcome {
  bool feasible = false;
  double recourse_cost = 0.0;
};

struct MethodEvaluation {
  std::string method;
  double first_stage_cost = 0.0;             // c^T x at the frozen schedule
  std::vector<ScenarioOutcome> outcomes;     // one per scenario
  double reliability = 0.0;                  // feasible fraction, all scenarios
  double epb = 0.0;                          // defined iff epb_defined
  bool epb_defined = false;
};

struct EvaluationReport {
  std::vector<MethodEvaluation> methods;
  int num_scenarios = 0;
  int nf = 0;  // scenarios feasible under every method
};

/// Draw scenarios from the holdout days with +-5% multiplicative noise.
/// Deterministic in the seed; PV clipped to [0, pv_cap].
std::vector<Scenario> sample_oos_scenarios(const NetworkCase& net, const HistoryTable& holdout,
                                           int count, unsigned long seed);

/// First-stage cost of a frozen schedule under the case prices.
double first_stage_cost(const NetworkCase& net, const FirstStageSchedule& schedule);

/// Re-dispatches every method's schedule against every scenario. EPB per
/// method averages recourse costs over the common-feasible scenarios only.
EvaluationReport post_evaluate(const NetworkCase& net,
                               const std::map<std::string, FirstStageSchedule>& schedules,
                               const std::vector<Scenario>& scenarios,
                               const SolveParams& params = {});

struct SensitivityCurve {
  std::vector<double> sigma;
  std::vector<double> delta_star;  // NaN marks an infeasible run
  std::vector<double> alpha_star;
};

/// solve_igdt and solve_cl_digdt across ascending deviation factors, with the
/// offline set cache shared across the sweep.
SensitivityCurve sigma_sweep(const NetworkCase& net, const Scenario& forecast,
                             const std::vector<SourceBand>& bands,
                             const std::vector<double>& sigmas, double epsilon,
                             const ClDigdtOptions& options = {});

std::string report_to_csv(const EvaluationReport& report);          // per (method, scenario)
std::string report_summary_csv(const EvaluationReport& report);     // per method
std::string sensitivity_to_csv(const SensitivityCurve& curve);

}  // namespace cldigdt
