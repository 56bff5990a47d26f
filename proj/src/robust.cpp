#include "cldigdt/robust.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "cldigdt/ingest.hpp"

namespace cldigdt {

namespace {

// Rows pinning a scenario variable to the per-level bound selected by u_m:
// box inside [lo_m, hi_m] plus a pin towards the cost-extreme end.
void add_selected_bound_rows(MilpModel& model, VarRef xi, const std::vector<VarRef>& u,
                             const std::vector<double>& lo, const std::vector<double>& hi,
                             double big_m, bool pin_to_upper, const std::string& tag) {
  for (size_t m = 0; m < u.size(); ++m) {
    LinExpr slack = (LinExpr(1.0) - u[m]) * big_m;
    model.add(LinExpr(xi) + slack, Relop::Ge, LinExpr(lo[m]), tag + "_lo" + std::to_string(m));
    model.add(LinExpr(xi) - slack, Relop::Le, LinExpr(hi[m]), tag + "_hi" + std::to_string(m));
    if (pin_to_upper)
      model.add(LinExpr(xi) + slack, Relop::Ge, LinExpr(hi[m]), tag + "_pin" + std::to_string(m));
    else
      model.add(LinExpr(xi) - slack, Relop::Le, LinExpr(lo[m]), tag + "_pin" + std::to_string(m));
  }
}

}  // namespace

AlphaChoiceHandles embed_alpha_choice(MilpModel& model, const AlphaGrid& grid, double big_m) {
  const size_t K = grid.alphas.size();
  if (K == 0) throw std::invalid_argument("empty alpha grid");
  if (grid.enveloped.size() != K) throw std::invalid_argument("grid sets not aligned");

  AlphaChoiceHandles h;
  h.level_alpha = grid.alphas;
  LinExpr sum_u;
  for (size_t m = 0; m < K; ++m) {
    h.u.push_back(model.add_binary("u" + std::to_string(m)));
    sum_u += h.u[m];
    // alpha_m boxed into [level_m, level_{m+1}] when selected; the last
    // level is a degenerate point.
    const double lo = grid.alphas[m];
    const double hi = m + 1 < K ? grid.alphas[m + 1] : grid.alphas[m];
    VarRef am = model.add_var(0.0, std::max(hi, 0.0), "alpha" + std::to_string(m));
    model.add(LinExpr(am), Relop::Le, h.u[m] * hi);
    model.add(LinExpr(am), Relop::Ge, h.u[m] * lo);
    h.alpha += am;
  }
  model.add(sum_u, Relop::Eq, LinExpr(1.0), "one_level");

  const size_t ne = grid.enveloped.front().entries.size();
  h.xi_load.assign(ne, VarRef{});
  h.xi_pv.assign(ne, VarRef{});
  h.big_m.assign(ne, 0.0);
  for (size_t e = 0; e < ne; ++e) {
    const EntryInterval& first = grid.enveloped.front().entries[e];
    const SourceId sid = parse_source_id(first.source);
    std::vector<double> lo(K), hi(K);
    double lo_min = kInf, hi_max = -kInf;
    for (size_t m = 0; m < K; ++m) {
      const EntryInterval& ee = grid.enveloped[m].entries[e];
      if (ee.source != first.source || ee.hour != first.hour)
        throw std::invalid_argument("grid sets not aligned on entries");
      lo[m] = ee.lo;
      hi[m] = ee.hi;
      lo_min = std::min(lo_min, ee.lo);
      hi_max = std::max(hi_max, ee.hi);
    }
    const double M = big_m > 0 ? big_m : 1.1 * (hi_max - lo_min) + 1e-6;
    h.big_m[e] = M;
    const std::string tag = first.source + "_h" + std::to_string(first.hour);
    VarRef xi = model.add_var(lo_min, hi_max, "xi_" + tag);
    add_selected_bound_rows(model, xi, h.u, lo, hi, M, sid.kind == SourceId::Load, tag);
    if (sid.kind == SourceId::Load)
      h.xi_load[e] = xi;
    else
      h.xi_pv[e] = xi;
  }
  return h;
}

namespace {

LinExpr total_cost(const FirstStageVars& fs, const SecondStageVars& ss) {
  return fs.cost + ss.cost;
}

void verify_budget_row(const Solution& sol, const LinExpr& cost, const BudgetSpec& budget) {
  const double spent = sol.value(cost);
  if (spent > budget.budget() + budget.slack() + 1e-6 * std::max(1.0, std::abs(budget.budget())))
    throw std::logic_error("budget row violated after solve");
}

}  // namespace

IgdtResult solve_igdt(const NetworkCase& net, const Scenario& forecast, const BudgetSpec& budget,
                      const RobustOptions& options) {
  MilpModel model;
  FirstStageVars fs = build_first_stage(net, forecast, model);
  VarRef delta = model.add_var(0.0, 1.0, "delta");

  ScenarioExpr sc;
  const size_t nb = net.buses.size();
  const size_t T = static_cast<size_t>(net.time_steps);
  sc.pv.resize(nb);
  sc.load.resize(nb);
  for (size_t b = 0; b < nb; ++b)
    for (size_t t = 0; t < T; ++t) {
      sc.load[b].push_back(LinExpr(forecast.load[b][t]) + delta * forecast.load[b][t]);
      sc.pv[b].push_back(LinExpr(forecast.pv[b][t]) - delta * forecast.pv[b][t]);
    }
  SecondStageVars ss = build_second_stage(net, FirstStageView::of(fs), sc, model);
  model.add(total_cost(fs, ss), Relop::Le, LinExpr(budget.budget() + budget.slack()), "budget");

  if (options.enforce_corners) {
    ScenarioExpr mirror;
    mirror.pv.resize(nb);
    mirror.load.resize(nb);
    for (size_t b = 0; b < nb; ++b)
      for (size_t t = 0; t < T; ++t) {
        mirror.load[b].push_back(LinExpr(forecast.load[b][t]) - delta * forecast.load[b][t]);
        mirror.pv[b].push_back(LinExpr(forecast.pv[b][t]) + delta * forecast.pv[b][t]);
      }
    build_second_stage(net, FirstStageView::of(fs), mirror, model);
  }

  model.maximize(LinExpr(delta));
  Solution sol = solve_checked(model, options.solve);
  IgdtResult out;
  out.status = sol.status;
  if (sol.status != SolveStatus::Optimal) return out;
  verify_budget_row(sol, total_cost(fs, ss), budget);
  out.delta_star = sol.value(delta);
  out.schedule = extract_schedule(net, fs, sol);
  out.worst_case_cost = sol.value(total_cost(fs, ss));
  out.first_stage_cost = sol.value(fs.cost);
  return out;
}

namespace {

constexpr long kMicro = 1000000;

long micro_of(double alpha) { return std::lround(alpha * kMicro); }

// Entrywise envelope at one level over every pooled set at or below it.
ConfidenceSet envelope_at(const std::map<long, ConfidenceSet>& pool, long level_micro) {
  auto it = pool.find(level_micro);
  if (it == pool.end()) throw std::logic_error("level not tabulated");
  ConfidenceSet env = it->second;
  env.alpha = static_cast<double>(level_micro) / kMicro;
  for (const auto& [micro, set] : pool) {
    if (micro > level_micro) break;
    for (size_t e = 0; e < env.entries.size(); ++e) {
      env.entries[e].lo = std::min(env.entries[e].lo, set.entries[e].lo);
      env.entries[e].hi = std::max(env.entries[e].hi, set.entries[e].hi);
    }
  }
  return env;
}

}  // namespace

ClDigdtResult solve_cl_digdt(const NetworkCase& net, const std::vector<SourceBand>& bands,
                             const Scenario& forecast, const BudgetSpec& budget,
                             const ClDigdtOptions& options) {
  if (!(options.epsilon > 0 && options.epsilon < 1))
    throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (options.epsilon < 1e-6 - 1e-15)
    throw std::invalid_argument("epsilon below the 1e-6 grid arithmetic resolution");

  // Anchors: at alpha = 0 the sets degenerate to the forecast, so the model
  // reduces to the deterministic one.
  std::map<std::pair<std::string, int>, double> anchors;
  for (const SourceBand& sb : bands) {
    const SourceId sid = parse_source_id(sb.source);
    if (!net.has_bus(sid.bus) || sb.hour >= net.time_steps) continue;
    const size_t b = static_cast<size_t>(net.bus_pos(sid.bus));
    const size_t t = static_cast<size_t>(sb.hour);
    anchors[{sb.source, sb.hour}] =
        sid.kind == SourceId::Load ? forecast.load[b][t] : forecast.pv[b][t];
  }
  UncertaintySetBuilder builder(bands, options.pla_segments, anchors);
  const double max_alpha = builder.max_alpha();

  SetCache cache;
  if (options.cache_path && std::filesystem::exists(*options.cache_path))
    cache = SetCache::load(*options.cache_path);

  std::map<long, ConfidenceSet> pool;
  auto ensure = [&](long micro) {
    if (pool.count(micro)) return;
    const double alpha = static_cast<double>(micro) / kMicro;
    if (cache.contains(alpha)) {
      const ConfidenceSet& cached = cache.get(alpha);
      bool aligned = cached.entries.size() == builder.num_entries();
      for (size_t e = 0; aligned && e < cached.entries.size(); ++e)
        aligned = cached.entries[e].source == builder.entry_keys()[e].first &&
                  cached.entries[e].hour == builder.entry_keys()[e].second;
      if (aligned) {
        pool[micro] = cached;
        return;
      }
    }
    ConfidenceSet set = builder.build(alpha);
    pool[micro] = set;
    cache.put(alpha, std::move(set));
  };

  ClDigdtResult out;
  out.sigma = budget.sigma;
  out.budget = budget.budget();
  out.lambda0 = budget.lambda0;

  const long eps_micro = std::max<long>(1, std::lround(options.epsilon * kMicro));
  long base = 0;
  long step = kMicro / 10;  // iteration 1 splits [0, 1] into tenths
  int itr = 0;
  while (true) {
    ++itr;
    std::vector<long> cand_micro;
    for (int m = 0; m <= 10; ++m) {
      const long c = base + step * m;
      if (static_cast<double>(c) / kMicro <= max_alpha + 1e-12) cand_micro.push_back(c);
    }
    if (cand_micro.empty()) throw std::logic_error("no attainable candidate level");
    for (long c : cand_micro) ensure(c);

    AlphaGrid grid;
    for (long c : cand_micro) {
      grid.alphas.push_back(static_cast<double>(c) / kMicro);
      grid.raw.push_back(pool.at(c));
      grid.enveloped.push_back(envelope_at(pool, c));
    }

    MilpModel model;
    FirstStageVars fs = build_first_stage(net, forecast, model);
    AlphaChoiceHandles h = embed_alpha_choice(model, grid);

    ScenarioExpr sc = ScenarioExpr::of(net, forecast);
    ScenarioExpr mirror = sc;
    const auto& keys = builder.entry_keys();
    for (size_t e = 0; e < keys.size(); ++e) {
      const SourceId sid = parse_source_id(keys[e].first);
      if (!net.has_bus(sid.bus) || keys[e].second >= net.time_steps) continue;
      const size_t b = static_cast<size_t>(net.bus_pos(sid.bus));
      const size_t t = static_cast<size_t>(keys[e].second);
      if (sid.kind == SourceId::Load)
        sc.load[b][t] = LinExpr(h.xi_load[e]);
      else
        sc.pv[b][t] = LinExpr(h.xi_pv[e]);
    }
    SecondStageVars ss = build_second_stage(net, FirstStageView::of(fs), sc, model);
    model.add(total_cost(fs, ss), Relop::Le, LinExpr(budget.budget() + budget.slack()),
              "budget");

    if (options.enforce_corners) {
      // The opposite corner (high PV, low load) is feasibility-checked with
      // its own recourse block, mirroring the pins.
      for (size_t e = 0; e < keys.size(); ++e) {
        const SourceId sid = parse_source_id(keys[e].first);
        if (!net.has_bus(sid.bus) || keys[e].second >= net.time_steps) continue;
        const size_t b = static_cast<size_t>(net.bus_pos(sid.bus));
        const size_t t = static_cast<size_t>(keys[e].second);
        std::vector<double> lo(grid.alphas.size()), hi(grid.alphas.size());
        double lo_min = kInf, hi_max = -kInf;
        for (size_t m = 0; m < grid.alphas.size(); ++m) {
          lo[m] = grid.enveloped[m].entries[e].lo;
          hi[m] = grid.enveloped[m].entries[e].hi;
          lo_min = std::min(lo_min, lo[m]);
          hi_max = std::max(hi_max, hi[m]);
        }
        VarRef xi = model.add_var(lo_min, hi_max);
        add_selected_bound_rows(model, xi, h.u, lo, hi, h.big_m[e],
                                sid.kind == SourceId::Pv, keys[e].first + "_mirror");
        if (sid.kind == SourceId::Load)
          mirror.load[b][t] = LinExpr(xi);
        else
          mirror.pv[b][t] = LinExpr(xi);
      }
      build_second_stage(net, FirstStageView::of(fs), mirror, model);
    }

    model.maximize(h.alpha);
    Solution sol = solve_checked(model, options.solve);
    if (sol.status != SolveStatus::Optimal) {
      if (itr == 1)
        throw BudgetError("budget infeasible at alpha = 0; sigma too small for this case");
      throw std::logic_error("refinement master became infeasible at iteration " +
                             std::to_string(itr));
    }

    size_t selected = cand_micro.size();
    for (size_t m = 0; m < h.u.size(); ++m)
      if (sol.value(h.u[m]) > 0.5) selected = m;
    if (selected >= cand_micro.size()) throw std::logic_error("no selection binary active");

    // A-posteriori big-M check: selected pins must hold exactly.
    const ConfidenceSet& chosen = grid.enveloped[selected];
    for (size_t e = 0; e < keys.size(); ++e) {
      const SourceId sid = parse_source_id(keys[e].first);
      const double want =
          sid.kind == SourceId::Load ? chosen.entries[e].hi : chosen.entries[e].lo;
      const double got =
          sol.value(sid.kind == SourceId::Load ? h.xi_load[e] : h.xi_pv[e]);
      if (std::abs(got - want) > 1e-4 * std::max(1.0, std::abs(want)))
        throw std::logic_error("big-M too small: scenario entry escaped its pinned bound");
    }

    const long lb = cand_micro[selected];
    const bool degenerate = lb == base + step * 10;  // the extra endpoint level
    const long ub = degenerate ? lb : lb + step;
    ClDigdtIteration rec;
    rec.itr = itr;
    rec.incumbent_alpha = static_cast<double>(lb) / kMicro;
    rec.lb = rec.incumbent_alpha;
    rec.ub = static_cast<double>(ub) / kMicro;
    rec.worst_case_cost = sol.value(total_cost(fs, ss));
    out.trace.push_back(rec);

    base = lb;
    const bool done = degenerate || step <= eps_micro;
    if (done) {
      verify_budget_row(sol, total_cost(fs, ss), budget);
      out.alpha_star = rec.lb;
      out.lb = rec.lb;
      out.ub = rec.ub;
      out.worst_case_cost = rec.worst_case_cost;
      out.first_stage_cost = sol.value(fs.cost);
      out.schedule = extract_schedule(net, fs, sol);
      out.set_at_alpha = envelope_at(pool, lb);
      out.status = SolveStatus::Optimal;
      break;
    }
    step /= 10;
  }

  if (options.cache_path) cache.save(*options.cache_path);
  return out;
}

}  // namespace cldigdt
