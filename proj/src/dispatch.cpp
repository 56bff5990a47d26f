#include "cldigdt/dispatch.hpp"

#include <cmath>
#include <sstream>

#include "cldigdt/ingest.hpp"
#include "json.hpp"

namespace cldigdt {

using nlohmann::json;

FirstStageView FirstStageView::of(const FirstStageVars& vars) {
  FirstStageView v;
  auto lift = [](const std::vector<std::vector<VarRef>>& m) {
    std::vector<std::vector<LinExpr>> out(m.size());
    for (size_t i = 0; i < m.size(); ++i)
      for (VarRef r : m[i]) out[i].push_back(LinExpr(r));
    return out;
  };
  v.dg_power = lift(vars.dg_power);
  v.ess_charge = lift(vars.ess_charge);
  v.ess_discharge = lift(vars.ess_discharge);
  for (VarRef r : vars.purchased) v.purchased.push_back(LinExpr(r));
  return v;
}

FirstStageView FirstStageView::of(const FirstStageSchedule& schedule) {
  FirstStageView v;
  auto lift = [](const std::vector<std::vector<double>>& m) {
    std::vector<std::vector<LinExpr>> out(m.size());
    for (size_t i = 0; i < m.size(); ++i)
      for (double x : m[i]) out[i].push_back(LinExpr(x));
    return out;
  };
  v.dg_power = lift(schedule.dg_power);
  v.ess_charge = lift(schedule.ess_charge);
  v.ess_discharge = lift(schedule.ess_discharge);
  for (double x : schedule.purchased) v.purchased.push_back(LinExpr(x));
  return v;
}

ScenarioExpr ScenarioExpr::of(const NetworkCase& net, const Scenario& scenario) {
  ScenarioExpr s;
  const size_t nb = net.buses.size();
  const size_t T = static_cast<size_t>(net.time_steps);
  s.pv.resize(nb);
  s.load.resize(nb);
  for (size_t b = 0; b < nb; ++b)
    for (size_t t = 0; t < T; ++t) {
      s.pv[b].push_back(LinExpr(scenario.pv[b][t]));
      s.load[b].push_back(LinExpr(scenario.load[b][t]));
    }
  return s;
}

FirstStageVars build_first_stage(const NetworkCase& net, const Scenario& forecast,
                                 MilpModel& model) {
  const int T = net.time_steps;
  if (forecast.load.size() != net.buses.size() ||
      (T > 0 && static_cast<int>(forecast.load[0].size()) != T))
    throw std::invalid_argument("forecast dimensions do not match the case");

  FirstStageVars fs;
  for (size_t g = 0; g < net.dgs.size(); ++g) {
    const DgUnit& dg = net.dgs[g];
    fs.dg_power.emplace_back();
    for (int t = 0; t < T; ++t)
      fs.dg_power[g].push_back(model.add_var(
          dg.p_min, dg.p_max, "pG_" + std::to_string(g) + "_" + std::to_string(t)));
    for (int t = 1; t < T; ++t) {
      model.add(LinExpr(fs.dg_power[g][static_cast<size_t>(t)]) -
                    fs.dg_power[g][static_cast<size_t>(t - 1)],
                Relop::Le, LinExpr(dg.ramp_up));
      model.add(LinExpr(fs.dg_power[g][static_cast<size_t>(t - 1)]) -
                    fs.dg_power[g][static_cast<size_t>(t)],
                Relop::Le, LinExpr(dg.ramp_down));
    }
  }

  for (size_t e = 0; e < net.esss.size(); ++e) {
    const EssUnit& ess = net.esss[e];
    fs.ess_charge.emplace_back();
    fs.ess_discharge.emplace_back();
    fs.ess_energy.emplace_back();
    fs.ess_mode.emplace_back();
    const std::string tag = std::to_string(e);
    for (int t = 0; t < T; ++t) {
      const std::string ts = std::to_string(t);
      VarRef ch = model.add_var(0.0, ess.charge_max, "pBc_" + tag + "_" + ts);
      VarRef dis = model.add_var(0.0, ess.discharge_max, "pBd_" + tag + "_" + ts);
      VarRef en = model.add_var(ess.energy_min, ess.energy_max, "e_" + tag + "_" + ts);
      VarRef z = model.add_binary("z_" + tag + "_" + ts);
      fs.ess_charge[e].push_back(ch);
      fs.ess_discharge[e].push_back(dis);
      fs.ess_energy[e].push_back(en);
      fs.ess_mode[e].push_back(z);
      // Charging only in mode z = 1, discharging only in mode z = 0.
      model.add(LinExpr(ch), Relop::Le, z * ess.charge_max);
      model.add(LinExpr(ch), Relop::Ge, z * ess.charge_min);
      model.add(LinExpr(dis), Relop::Le, LinExpr(ess.discharge_max) - z * ess.discharge_max);
      model.add(LinExpr(dis), Relop::Ge, LinExpr(ess.discharge_min) - z * ess.discharge_min);
      LinExpr prev = t == 0 ? LinExpr(ess.initial_energy)
                            : LinExpr(fs.ess_energy[e][static_cast<size_t>(t - 1)]);
      model.add(LinExpr(en), Relop::Eq,
                prev + ch * (ess.efficiency * net.dt_hours) -
                    dis * (net.dt_hours / ess.efficiency));
    }
  }

  for (size_t l = 0; l < net.lines.size(); ++l) {
    fs.line_flow.emplace_back();
    for (int t = 0; t < T; ++t)
      fs.line_flow[l].push_back(model.add_var(-net.lines[l].p_max, net.lines[l].p_max,
                                              "p_l" + std::to_string(l) + "_" +
                                                  std::to_string(t)));
  }
  for (int t = 0; t < T; ++t)
    fs.purchased.push_back(model.add_var(-kInf, kInf, "pS_" + std::to_string(t)));

  // Nodal balance with net injections; the substation row defines pS.
  for (size_t b = 0; b < net.buses.size(); ++b) {
    const int bus_id = net.buses[b].id;
    for (int t = 0; t < T; ++t) {
      const size_t ts = static_cast<size_t>(t);
      LinExpr inj;
      for (size_t g = 0; g < net.dgs.size(); ++g)
        if (net.dgs[g].bus == bus_id) inj += fs.dg_power[g][ts];
      for (size_t e = 0; e < net.esss.size(); ++e)
        if (net.esss[e].bus == bus_id)
          inj += LinExpr(fs.ess_discharge[e][ts]) - fs.ess_charge[e][ts];
      inj += LinExpr(forecast.pv[b][ts]) - forecast.load[b][ts];
      LinExpr net_out;
      for (size_t l = 0; l < net.lines.size(); ++l) {
        if (net.lines[l].from == bus_id) net_out += fs.line_flow[l][ts];
        if (net.lines[l].to == bus_id) net_out -= fs.line_flow[l][ts];
      }
      if (bus_id == net.substation)
        model.add(net_out, Relop::Eq, LinExpr(fs.purchased[ts]) + inj,
                  "bal1_sub_" + std::to_string(t));
      else
        model.add(net_out, Relop::Eq, inj,
                  "bal1_" + std::to_string(bus_id) + "_" + std::to_string(t));
    }
  }

  for (int t = 0; t < T; ++t) {
    const size_t ts = static_cast<size_t>(t);
    for (size_t g = 0; g < net.dgs.size(); ++g)
      fs.cost += fs.dg_power[g][ts] * net.dgs[g].cost;
    fs.cost += fs.purchased[ts] * net.price_d[ts];
  }
  return fs;
}

SecondStageVars build_second_stage(const NetworkCase& net, const FirstStageView& first,
                                   const ScenarioExpr& scenario, MilpModel& model) {
  const int T = net.time_steps;
  if (scenario.load.size() != net.buses.size())
    throw std::invalid_argument("scenario dimensions do not match the case");

  SecondStageVars ss;
  for (size_t g = 0; g < net.dgs.size(); ++g) {
    const DgUnit& dg = net.dgs[g];
    ss.dg_recourse.emplace_back();
    ss.dg_total.emplace_back();
    ss.dg_reactive.emplace_back();
    const std::string tag = std::to_string(g);
    for (int t = 0; t < T; ++t) {
      const std::string ts = std::to_string(t);
      VarRef rec = model.add_var(dg.recourse_p_min, dg.recourse_p_max, "rG_" + tag + "_" + ts);
      VarRef tot = model.add_var(-kInf, kInf, "tG_" + tag + "_" + ts);
      VarRef q = model.add_var(dg.q_min, dg.q_max, "qG_" + tag + "_" + ts);
      ss.dg_recourse[g].push_back(rec);
      ss.dg_total[g].push_back(tot);
      ss.dg_reactive[g].push_back(q);
      model.add(LinExpr(tot), Relop::Eq,
                first.dg_power[g][static_cast<size_t>(t)] + rec,
                "tot_" + tag + "_" + ts);
    }
    for (int t = 1; t < T; ++t) {
      model.add(LinExpr(ss.dg_total[g][static_cast<size_t>(t)]) -
                    ss.dg_total[g][static_cast<size_t>(t - 1)],
                Relop::Le, LinExpr(dg.ramp_up));
      model.add(LinExpr(ss.dg_total[g][static_cast<size_t>(t - 1)]) -
                    ss.dg_total[g][static_cast<size_t>(t)],
                Relop::Le, LinExpr(dg.ramp_down));
    }
  }

  for (size_t l = 0; l < net.lines.size(); ++l) {
    ss.flow_p.emplace_back();
    ss.flow_q.emplace_back();
    const std::string tag = std::to_string(l);
    for (int t = 0; t < T; ++t) {
      ss.flow_p[l].push_back(model.add_var(-net.lines[l].p_max, net.lines[l].p_max,
                                           "p2_l" + tag + "_" + std::to_string(t)));
      ss.flow_q[l].push_back(model.add_var(-kInf, kInf, "q2_l" + tag + "_" + std::to_string(t)));
    }
  }
  for (size_t b = 0; b < net.buses.size(); ++b) {
    ss.voltage.emplace_back();
    const bool is_sub = net.buses[b].id == net.substation;
    for (int t = 0; t < T; ++t)
      ss.voltage[b].push_back(is_sub ? model.add_var(1.0, 1.0)
                                     : model.add_var(net.v_min_sq, net.v_max_sq));
  }
  for (int t = 0; t < T; ++t)
    ss.purchased.push_back(model.add_var(-kInf, kInf, "pS2_" + std::to_string(t)));

  for (size_t b = 0; b < net.buses.size(); ++b) {
    const int bus_id = net.buses[b].id;
    const bool is_sub = bus_id == net.substation;
    for (int t = 0; t < T; ++t) {
      const size_t ts = static_cast<size_t>(t);
      LinExpr inj_p, inj_q;
      for (size_t g = 0; g < net.dgs.size(); ++g)
        if (net.dgs[g].bus == bus_id) {
          inj_p += ss.dg_total[g][ts];
          inj_q += ss.dg_reactive[g][ts];
        }
      for (size_t e = 0; e < net.esss.size(); ++e)
        if (net.esss[e].bus == bus_id)
          inj_p += first.ess_discharge[e][ts] - first.ess_charge[e][ts];
      inj_p += scenario.pv[b][ts] - scenario.load[b][ts];
      // q^L = p^L tan(delta)
      inj_q -= scenario.load[b][ts] * std::tan(net.buses[b].pf_angle[ts]);

      LinExpr net_out_p, net_out_q;
      for (size_t l = 0; l < net.lines.size(); ++l) {
        const double sgn = net.lines[l].from == bus_id ? 1.0
                           : net.lines[l].to == bus_id ? -1.0
                                                       : 0.0;
        if (sgn != 0.0) {
          net_out_p += ss.flow_p[l][ts] * sgn;
          net_out_q += ss.flow_q[l][ts] * sgn;
        }
      }
      if (is_sub) {
        model.add(net_out_p, Relop::Eq, LinExpr(ss.purchased[ts]) + inj_p,
                  "bal2_sub_" + std::to_string(t));
        // Reactive slack at the root is unconstrained.
      } else {
        model.add(net_out_p, Relop::Eq, inj_p,
                  "bal2p_" + std::to_string(bus_id) + "_" + std::to_string(t));
        model.add(net_out_q, Relop::Eq, inj_q,
                  "bal2q_" + std::to_string(bus_id) + "_" + std::to_string(t));
      }
    }
  }

  // Lossy DistFlow voltage drops.
  for (size_t l = 0; l < net.lines.size(); ++l) {
    const Line& ln = net.lines[l];
    const size_t bf = static_cast<size_t>(net.bus_pos(ln.from));
    const size_t bt = static_cast<size_t>(net.bus_pos(ln.to));
    const double k = 1.0 / (1.0 - ln.loss_factor);
    for (int t = 0; t < T; ++t) {
      const size_t ts = static_cast<size_t>(t);
      model.add(LinExpr(ss.voltage[bf][ts]) - ss.voltage[bt][ts], Relop::Eq,
                ss.flow_p[l][ts] * (ln.r * k) + ss.flow_q[l][ts] * (ln.x * k),
                "vdrop_l" + std::to_string(l) + "_" + std::to_string(t));
    }
  }

  for (int t = 0; t < T; ++t) {
    const size_t ts = static_cast<size_t>(t);
    for (size_t g = 0; g < net.dgs.size(); ++g)
      ss.cost += ss.dg_recourse[g][ts] * net.dgs[g].recourse_cost;
    ss.cost += (LinExpr(ss.purchased[ts]) - first.purchased[ts]) * net.price_d_hat[ts];
  }
  return ss;
}

DeterministicSolution solve_deterministic(const NetworkCase& net, const Scenario& forecast,
                                          const SolveParams& params) {
  MilpModel model;
  FirstStageVars fs = build_first_stage(net, forecast, model);
  SecondStageVars ss = build_second_stage(net, FirstStageView::of(fs),
                                          ScenarioExpr::of(net, forecast), model);
  model.minimize(fs.cost + ss.cost);
  Solution sol = solve_checked(model, params);
  DeterministicSolution out;
  out.status = sol.status;
  if (sol.status != SolveStatus::Optimal) return out;
  out.schedule = extract_schedule(net, fs, sol);
  out.decision = extract_decision(net, ss, sol);
  out.cost.first_stage = sol.value(fs.cost);
  out.cost.second_stage = sol.value(ss.cost);
  out.cost.total = out.cost.first_stage + out.cost.second_stage;
  return out;
}

RecourseResult evaluate_recourse(const NetworkCase& net, const FirstStageSchedule& schedule,
                                 const Scenario& scenario, const SolveParams& params) {
  MilpModel model;
  SecondStageVars ss = build_second_stage(net, FirstStageView::of(schedule),
                                          ScenarioExpr::of(net, scenario), model);
  model.minimize(ss.cost);
  Solution sol = solve_checked(model, params);
  RecourseResult out;
  if (sol.status != SolveStatus::Optimal) return out;
  out.feasible = true;
  out.cost = sol.objective;
  out.decision = extract_decision(net, ss, sol);
  return out;
}

Scenario worst_case_scenario(const NetworkCase& net, const ConfidenceSet& uset,
                             const Scenario& forecast) {
  Scenario s = forecast;
  for (const EntryInterval& e : uset.entries) {
    const SourceId sid = parse_source_id(e.source);
    if (e.hour >= net.time_steps || !net.has_bus(sid.bus)) continue;
    const size_t b = static_cast<size_t>(net.bus_pos(sid.bus));
    const size_t t = static_cast<size_t>(e.hour);
    if (sid.kind == SourceId::Load)
      s.load[b][t] = e.hi;
    else
      s.pv[b][t] = std::max(0.0, e.lo);
  }
  return s;
}

namespace {

std::vector<std::vector<double>> grab(const std::vector<std::vector<VarRef>>& vars,
                                      const Solution& sol) {
  std::vector<std::vector<double>> out(vars.size());
  for (size_t i = 0; i < vars.size(); ++i)
    for (VarRef r : vars[i]) out[i].push_back(sol.value(r));
  return out;
}

}  // namespace

FirstStageSchedule extract_schedule(const NetworkCase& net, const FirstStageVars& vars,
                                    const Solution& sol) {
  (void)net;
  FirstStageSchedule s;
  s.dg_power = grab(vars.dg_power, sol);
  s.ess_charge = grab(vars.ess_charge, sol);
  s.ess_discharge = grab(vars.ess_discharge, sol);
  s.ess_energy = grab(vars.ess_energy, sol);
  for (const auto& row : vars.ess_mode) {
    s.ess_mode.emplace_back();
    for (VarRef r : row) s.ess_mode.back().push_back(static_cast<int>(std::lround(sol.value(r))));
  }
  for (VarRef r : vars.purchased) s.purchased.push_back(sol.value(r));
  s.line_flow = grab(vars.line_flow, sol);
  return s;
}

SecondStageDecision extract_decision(const NetworkCase& net, const SecondStageVars& vars,
                                     const Solution& sol) {
  (void)net;
  SecondStageDecision d;
  d.dg_recourse = grab(vars.dg_recourse, sol);
  d.dg_total = grab(vars.dg_total, sol);
  d.dg_reactive = grab(vars.dg_reactive, sol);
  for (VarRef r : vars.purchased) d.purchased.push_back(sol.value(r));
  d.flow_p = grab(vars.flow_p, sol);
  d.flow_q = grab(vars.flow_q, sol);
  d.voltage_sq = grab(vars.voltage, sol);
  return d;
}

namespace {

json keyed_rows(const std::vector<std::vector<double>>& m) {
  json out = json::object();
  for (size_t i = 0; i < m.size(); ++i) out[std::to_string(i + 1)] = m[i];
  return out;
}

}  // namespace

std::string schedule_to_json(const NetworkCase& net, const FirstStageSchedule& schedule) {
  json j;
  j["dg_power"] = keyed_rows(schedule.dg_power);
  j["ess_charge"] = keyed_rows(schedule.ess_charge);
  j["ess_discharge"] = keyed_rows(schedule.ess_discharge);
  j["ess_energy"] = keyed_rows(schedule.ess_energy);
  json mode = json::object();
  for (size_t i = 0; i < schedule.ess_mode.size(); ++i)
    mode[std::to_string(i + 1)] = schedule.ess_mode[i];
  j["ess_mode"] = mode;
  j["purchased"] = schedule.purchased;
  j["line_flow"] = keyed_rows(schedule.line_flow);
  json buses = json::array();
  for (const DgUnit& g : net.dgs) buses.push_back(g.bus);
  j["dg_bus"] = buses;
  return j.dump(2);
}

namespace {

std::vector<std::vector<double>> unkeyed_rows(const json& j) {
  std::vector<std::vector<double>> out(j.size());
  for (const auto& [key, arr] : j.items())
    out[static_cast<size_t>(std::stoul(key)) - 1] = arr.get<std::vector<double>>();
  return out;
}

}  // namespace

FirstStageSchedule schedule_from_json(const std::string& text) {
  json j = json::parse(text);
  FirstStageSchedule s;
  s.dg_power = unkeyed_rows(j.at("dg_power"));
  s.ess_charge = unkeyed_rows(j.at("ess_charge"));
  s.ess_discharge = unkeyed_rows(j.at("ess_discharge"));
  s.ess_energy = unkeyed_rows(j.at("ess_energy"));
  s.ess_mode.resize(j.at("ess_mode").size());
  for (const auto& [key, arr] : j.at("ess_mode").items())
    s.ess_mode[static_cast<size_t>(std::stoul(key)) - 1] = arr.get<std::vector<int>>();
  s.purchased = j.at("purchased").get<std::vector<double>>();
  s.line_flow = unkeyed_rows(j.at("line_flow"));
  return s;
}

std::string decision_to_json(const NetworkCase& net, const SecondStageDecision& decision) {
  (void)net;
  json j;
  j["dg_recourse"] = keyed_rows(decision.dg_recourse);
  j["dg_total"] = keyed_rows(decision.dg_total);
  j["dg_reactive"] = keyed_rows(decision.dg_reactive);
  j["purchased"] = decision.purchased;
  j["flow_p"] = keyed_rows(decision.flow_p);
  j["flow_q"] = keyed_rows(decision.flow_q);
  j["voltage_sq"] = keyed_rows(decision.voltage_sq);
  return j.dump(2);
}

std::string cost_to_csv(const CostBreakdown& cost) {
  std::ostringstream os;
  os.precision(10);
  os << "first_stage,second_stage,total\n"
     << cost.first_stage << "," << cost.second_stage << "," << cost.total << "\n";
  return os.str();
}

}  // namespace cldigdt
