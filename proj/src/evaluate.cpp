#include "cldigdt/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cldigdt {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Scenario> sample_oos_scenarios(const NetworkCase& net, const HistoryTable& holdout,
                                           int count, unsigned long seed) {
  if (count < 1) throw std::invalid_argument("need at least one scenario");
  const std::vector<int> days = holdout.days();
  if (days.empty()) throw std::invalid_argument("holdout is empty");
  std::mt19937_64 rng(seed);
  std::vector<Scenario> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int day = days[static_cast<size_t>(uniform01(rng) * static_cast<double>(days.size())) %
                         days.size()];
    Scenario s = Scenario::zeros(net);
    for (const auto& [key, value] : holdout.day_slice(day)) {
      if (key.second >= net.time_steps) continue;
      const SourceId sid = parse_source_id(key.first);
      if (!net.has_bus(sid.bus)) continue;
      const size_t b = static_cast<size_t>(net.bus_pos(sid.bus));
      const size_t t = static_cast<size_t>(key.second);
      const double noise = 0.95 + 0.10 * uniform01(rng);
      const double v = value * noise;
      if (sid.kind == SourceId::Pv)
        s.pv[b][t] = std::clamp(v, 0.0, net.pv_cap);
      else
        s.load[b][t] = std::max(v, 0.0);
    }
    out.push_back(std::move(s));
  }
  return out;
}

double first_stage_cost(const NetworkCase& net, const FirstStageSchedule& schedule) {
  double cost = 0.0;
  for (int t = 0; t < net.time_steps; ++t) {
    const size_t ts = static_cast<size_t>(t);
    for (size_t g = 0; g < net.dgs.size(); ++g)
      cost += net.dgs[g].cost * schedule.dg_power[g][ts];
    cost += net.price_d[ts] * schedule.purchased[ts];
  }
  return cost;
}

EvaluationReport post_evaluate(const NetworkCase& net,
                               const std::map<std::string, FirstStageSchedule>& schedules,
                               const std::vector<Scenario>& scenarios,
                               const SolveParams& params) {
  EvaluationReport report;
  report.num_scenarios = static_cast<int>(scenarios.size());
  for (const auto& [name, schedule] : schedules) {
    MethodEvaluation me;
    me.method = name;
    me.first_stage_cost = first_stage_cost(net, schedule);
    int feasible = 0;
    for (const Scenario& sc : scenarios) {
      RecourseResult rr = evaluate_recourse(net, schedule, sc, params);
      me.outcomes.push_back({rr.feasible, rr.feasible ? rr.cost : 0.0});
      if (rr.feasible) ++feasible;
    }
    me.reliability = scenarios.empty()
                         ? 0.0
                         : static_cast<double>(feasible) / static_cast<double>(scenarios.size());
    report.methods.push_back(std::move(me));
  }

  std::vector<int> common;
  for (size_t s = 0; s < scenarios.size(); ++s) {
    bool all = true;
    for (const MethodEvaluation& me : report.methods) all = all && me.outcomes[s].feasible;
    if (all) common.push_back(static_cast<int>(s));
  }
  report.nf = static_cast<int>(common.size());
  for (MethodEvaluation& me : report.methods) {
    if (common.empty()) {
      me.epb_defined = false;
      continue;
    }
    double sum = 0.0;
    for (int s : common) sum += me.outcomes[static_cast<size_t>(s)].recourse_cost;
    me.epb = me.first_stage_cost + sum / static_cast<double>(common.size());
    me.epb_defined = true;
  }
  return report;
}

SensitivityCurve sigma_sweep(const NetworkCase& net, const Scenario& forecast,
                             const std::vector<SourceBand>& bands,
                             const std::vector<double>& sigmas, double epsilon,
                             const ClDigdtOptions& options) {
  for (size_t i = 0; i < sigmas.size(); ++i) {
    if (sigmas[i] < 0) throw std::invalid_argument("sigma must be nonnegative");
    if (i > 0 && sigmas[i] <= sigmas[i - 1])
      throw std::invalid_argument("sigma values must be ascending");
  }
  DeterministicSolution det = solve_deterministic(net, forecast, options.solve);
  if (det.status != SolveStatus::Optimal)
    throw std::runtime_error("deterministic base case infeasible");

  SensitivityCurve curve;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double sigma : sigmas) {
    BudgetSpec budget{det.cost.total, sigma};
    curve.sigma.push_back(sigma);

    RobustOptions igdt_opts;
    igdt_opts.pla_segments = options.pla_segments;
    igdt_opts.enforce_corners = options.enforce_corners;
    igdt_opts.solve = options.solve;
    IgdtResult igdt = solve_igdt(net, forecast, budget, igdt_opts);
    curve.delta_star.push_back(igdt.status == SolveStatus::Optimal ? igdt.delta_star : nan);

    ClDigdtOptions cl = options;
    cl.epsilon = epsilon;
    try {
      ClDigdtResult r = solve_cl_digdt(net, bands, forecast, budget, cl);
      curve.alpha_star.push_back(r.status == SolveStatus::Optimal ? r.alpha_star : nan);
    } catch (const BudgetError&) {
      curve.alpha_star.push_back(nan);
    }
  }
  return curve;
}

std::string report_to_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "method,scenario,feasible,recourse_cost\n";
  for (const MethodEvaluation& me : report.methods)
    for (size_t s = 0; s < me.outcomes.size(); ++s)
      os << me.method << "," << s << "," << (me.outcomes[s].feasible ? 1 : 0) << ","
         << (me.outcomes[s].feasible ? me.outcomes[s].recourse_cost : 0.0) << "\n";
  return os.str();
}

std::string report_summary_csv(const EvaluationReport& report) {
  std::ostringstream os;
  os.precision(10);
  os << "method,first_stage_cost,epb,reliability,nf\n";
  for (const MethodEvaluation& me : report.methods) {
    os << me.method << "," << me.first_stage_cost << ",";
    if (me.epb_defined)
      os << me.epb;
    else
      os << "undefined";
    os << "," << me.reliability << "," << report.nf << "\n";
  }
  return os.str();
}

std::string sensitivity_to_csv(const SensitivityCurve& curve) {
  std::ostringstream os;
  os.precision(10);
  os << "sigma,delta_star,alpha_star\n";
  for (size_t i = 0; i < curve.sigma.size(); ++i)
    os << curve.sigma[i] << "," << curve.delta_star[i] << "," << curve.alpha_star[i] << "\n";
  return os.str();
}

}  // namespace cldigdt
