#include "cldigdt/uset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cldigdt {

using nlohmann::json;

double PlaApprox::eval(double x) const {
  const auto& bp = breakpoints;
  if (x <= bp.front()) return values.front();
  if (x >= bp.back()) return values.back();
  auto it = std::lower_bound(bp.begin(), bp.end(), x);
  size_t k = static_cast<size_t>(it - bp.begin());
  if (bp[k] == x) return values[k];
  --k;
  return slopes[k] * x + intercepts[k];
}

std::optional<double> PlaApprox::inverse_min(double y) const {
  if (y <= values.front()) return breakpoints.front();
  if (y > values.back() + 1e-15) return std::nullopt;
  auto it = std::lower_bound(values.begin(), values.end(), y);
  size_t k = static_cast<size_t>(it - values.begin());
  if (k >= values.size()) return breakpoints.back();
  if (values[k] == y || k == 0) return breakpoints[k];
  // values[k-1] < y < values[k], so the segment has positive slope.
  return breakpoints[k - 1] + (y - values[k - 1]) / slopes[k - 1];
}

PlaApprox pla_coefficients(const StepCdf& cdf, const std::vector<double>& breakpoints) {
  if (breakpoints.size() < 2) throw std::invalid_argument("need at least two breakpoints");
  for (size_t s = 1; s < breakpoints.size(); ++s)
    if (!(breakpoints[s] > breakpoints[s - 1]))
      throw std::invalid_argument("breakpoints must be strictly ascending");
  if (breakpoints.front() > cdf.grid.front() + 1e-12 ||
      breakpoints.back() < cdf.grid.back() - 1e-12)
    throw std::invalid_argument("breakpoints must span the CDF grid");

  PlaApprox pla;
  pla.breakpoints = breakpoints;
  pla.values.reserve(breakpoints.size());
  for (double o : breakpoints) pla.values.push_back(cdf.at(o));
  for (size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    const double w =
        (pla.values[s + 1] - pla.values[s]) / (breakpoints[s + 1] - breakpoints[s]);
    pla.slopes.push_back(w);
    pla.intercepts.push_back(-w * breakpoints[s] + pla.values[s]);
  }
  return pla;
}

double PlaPair::max_coverage() const {
  return upside.values.back() - downside.values.front();
}

PlaPair linearize_pair(const WorstCasePair& pair, int segments) {
  if (segments < 1) throw std::invalid_argument("need at least one segment");
  const double lo = pair.downside.grid.front();
  const double hi = pair.downside.grid.back();
  std::vector<double> bp(static_cast<size_t>(segments) + 1);
  for (int s = 0; s <= segments; ++s)
    bp[static_cast<size_t>(s)] = lo + (hi - lo) * static_cast<double>(s) / segments;
  bp.back() = hi;
  return PlaPair{pla_coefficients(pair.downside, bp), pla_coefficients(pair.upside, bp)};
}

namespace {

struct Candidate {
  double lo, hi;
};

std::vector<Candidate> scan_candidates(const PlaPair& pair, double alpha) {
  std::set<double> los(pair.downside.breakpoints.begin(), pair.downside.breakpoints.end());
  for (double v : pair.upside.values) {
    auto pre = pair.downside.inverse_min(v - alpha);
    if (pre) los.insert(*pre);
  }
  std::vector<Candidate> out;
  for (double lo : los) {
    const double need = alpha + pair.downside.eval(lo);
    auto hi = pair.upside.inverse_min(need);
    if (!hi) continue;
    out.push_back({lo, std::max(*hi, lo)});
  }
  return out;
}

}  // namespace

Interval shortest_interval_scan(const PlaPair& pair, double alpha, const TieBreakPolicy& tie) {
  if (alpha < 0 || alpha >= 1 + 1e-12) throw std::invalid_argument("alpha outside [0, 1)");
  if (alpha == 0.0) return {tie.mode, tie.mode};
  if (alpha > pair.max_coverage() + 1e-12)
    throw CoverageError("coverage " + std::to_string(alpha) +
                        " unattainable on the band span (max " +
                        std::to_string(pair.max_coverage()) + ")");
  auto cands = scan_candidates(pair, alpha);
  if (cands.empty()) throw CoverageError("no feasible interval found");
  double best = kInf;
  for (const auto& c : cands) best = std::min(best, c.hi - c.lo);
  const double tol = 1e-9 * std::max(1.0, pair.downside.breakpoints.back());
  std::vector<Candidate> ties;
  for (const auto& c : cands)
    if (c.hi - c.lo <= best + tol) ties.push_back(c);
  std::vector<Candidate> with_mode;
  for (const auto& c : ties)
    if (c.lo - tol <= tie.mode && tie.mode <= c.hi + tol) with_mode.push_back(c);
  const auto& pool = with_mode.empty() ? ties : with_mode;
  const auto* pick = &pool.front();
  for (const auto& c : pool)
    if (c.lo < pick->lo) pick = &c;
  return {pick->lo, pick->hi};
}

Interval shortest_interval(const PlaPair& pair, double alpha, const TieBreakPolicy& tie) {
  if (alpha == 0.0) return {tie.mode, tie.mode};
  Interval scan = shortest_interval_scan(pair, alpha, tie);

  // Independent route: segment-binary MILP over the PLA pair.
  const auto& bp = pair.downside.breakpoints;
  const size_t S = bp.size();
  MilpModel m;
  std::vector<VarRef> lo_s, hi_s, a_s, b_s;
  for (size_t s = 0; s + 1 < S; ++s) {
    lo_s.push_back(m.add_var(std::min(0.0, bp[s]), std::max(0.0, bp[s + 1])));
    hi_s.push_back(m.add_var(std::min(0.0, bp[s]), std::max(0.0, bp[s + 1])));
    a_s.push_back(m.add_binary());
    b_s.push_back(m.add_binary());
  }
  LinExpr sum_a, sum_b, lo, hi, f_lo, f_hi;
  for (size_t s = 0; s + 1 < S; ++s) {
    m.add(LinExpr(lo_s[s]), Relop::Ge, a_s[s] * bp[s]);
    m.add(LinExpr(lo_s[s]), Relop::Le, a_s[s] * bp[s + 1]);
    m.add(LinExpr(hi_s[s]), Relop::Ge, b_s[s] * bp[s]);
    m.add(LinExpr(hi_s[s]), Relop::Le, b_s[s] * bp[s + 1]);
    sum_a += a_s[s];
    sum_b += b_s[s];
    lo += lo_s[s];
    hi += hi_s[s];
    f_lo += lo_s[s] * pair.downside.slopes[s] + a_s[s] * pair.downside.intercepts[s];
    f_hi += hi_s[s] * pair.upside.slopes[s] + b_s[s] * pair.upside.intercepts[s];
  }
  m.add(sum_a, Relop::Eq, LinExpr(1.0));
  m.add(sum_b, Relop::Eq, LinExpr(1.0));
  m.add(f_hi - f_lo, Relop::Ge, LinExpr(alpha), "coverage");
  m.minimize(hi - lo);

  SolveParams params;
  params.mip_gap = 1e-9;
  params.warm_start.assign(static_cast<size_t>(m.num_vars()), 0.0);
  auto seg_of = [&bp](double x) {
    auto it = std::upper_bound(bp.begin(), bp.end(), x);
    size_t k = static_cast<size_t>(it - bp.begin());
    return std::min(k > 0 ? k - 1 : 0, bp.size() - 2);
  };
  const size_t sa = seg_of(scan.lo), sb = seg_of(scan.hi);
  params.warm_start[static_cast<size_t>(lo_s[sa].index)] = scan.lo;
  params.warm_start[static_cast<size_t>(a_s[sa].index)] = 1.0;
  params.warm_start[static_cast<size_t>(hi_s[sb].index)] = scan.hi;
  params.warm_start[static_cast<size_t>(b_s[sb].index)] = 1.0;

  Solution sol = solve_checked(m, params);
  if (sol.status != SolveStatus::Optimal)
    throw std::runtime_error("shortest-interval MILP did not solve to optimality: " +
                             to_string(sol.status));
  const double span = bp.back() - bp.front();
  if (std::abs(sol.objective - scan.width()) > 1e-5 * std::max(1.0, span))
    throw std::logic_error("shortest-interval routes disagree: MILP width " +
                           std::to_string(sol.objective) + " vs scan width " +
                           std::to_string(scan.width()));
  return scan;
}

UncertaintySetBuilder::UncertaintySetBuilder(
    const std::vector<SourceBand>& bands, int segments,
    std::map<std::pair<std::string, int>, double> zero_anchor) {
  for (const SourceBand& sb : bands) {
    Entry e;
    e.pla = linearize_pair(worst_case_cdfs(sb.band), segments);
    e.tie.mode = sb.mode;
    auto it = zero_anchor.find({sb.source, sb.hour});
    e.anchor = it != zero_anchor.end() ? it->second : sb.mode;
    entries_.push_back(std::move(e));
    keys_.emplace_back(sb.source, sb.hour);
  }
}

ConfidenceSet UncertaintySetBuilder::build(double alpha) const {
  ConfidenceSet set;
  set.alpha = alpha;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    Interval iv = alpha == 0.0 ? Interval{e.anchor, e.anchor}
                               : shortest_interval(e.pla, alpha, e.tie);
    set.entries.push_back({keys_[i].first, keys_[i].second, iv.lo, iv.hi});
  }
  return set;
}

double UncertaintySetBuilder::max_alpha() const {
  double m = 1.0;
  for (const Entry& e : entries_) m = std::min(m, e.pla.max_coverage());
  return m;
}

std::vector<ConfidenceSet> envelope_sets(const std::vector<double>& alphas,
                                         const std::vector<ConfidenceSet>& raw) {
  if (alphas.size() != raw.size()) throw std::invalid_argument("grid size mismatch");
  for (size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] > alphas[i - 1]))
      throw std::invalid_argument("alpha grid must be strictly ascending");
  std::vector<ConfidenceSet> out = raw;
  for (size_t i = 1; i < out.size(); ++i) {
    if (out[i].entries.size() != out[i - 1].entries.size())
      throw std::invalid_argument("sets not aligned");
    for (size_t e = 0; e < out[i].entries.size(); ++e) {
      out[i].entries[e].lo = std::min(out[i].entries[e].lo, out[i - 1].entries[e].lo);
      out[i].entries[e].hi = std::max(out[i].entries[e].hi, out[i - 1].entries[e].hi);
    }
  }
  return out;
}

AlphaGrid tabulate_alpha_grid(const UncertaintySetBuilder& builder,
                              const std::vector<double>& grid) {
  AlphaGrid out;
  out.alphas = grid;
  for (double a : grid) out.raw.push_back(builder.build(a));
  out.enveloped = envelope_sets(out.alphas, out.raw);
  return out;
}

std::string SetCache::alpha_key(double alpha) {
  long micro = std::lround(alpha * 1e6);
  std::ostringstream os;
  os << micro / 1000000 << ".";
  std::string frac = std::to_string(micro % 1000000);
  frac.insert(0, 6 - frac.size(), '0');
  while (frac.size() > 2 && frac.back() == '0') frac.pop_back();
  os << frac;
  return os.str();
}

bool SetCache::contains(double alpha) const {
  return by_micro_.count(std::lround(alpha * 1e6)) > 0;
}

const ConfidenceSet& SetCache::get(double alpha) const {
  auto it = by_micro_.find(std::lround(alpha * 1e6));
  if (it == by_micro_.end()) throw std::out_of_range("alpha not cached");
  return it->second;
}

void SetCache::put(double alpha, ConfidenceSet set) {
  by_micro_[std::lround(alpha * 1e6)] = std::move(set);
}

std::vector<double> SetCache::cached_alphas() const {
  std::vector<double> out;
  for (const auto& [micro, set] : by_micro_) out.push_back(static_cast<double>(micro) / 1e6);
  return out;
}

void SetCache::save(const std::string& path) const {
  json j = json::object();
  for (const auto& [micro, set] : by_micro_) {
    json arr = json::array();
    for (const EntryInterval& e : set.entries)
      arr.push_back({{"source", e.source}, {"hour", e.hour}, {"lo", e.lo}, {"hi", e.hi}});
    j[alpha_key(static_cast<double>(micro) / 1e6)] = arr;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

SetCache SetCache::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j = json::parse(in);
  SetCache cache;
  for (const auto& [key, arr] : j.items()) {
    ConfidenceSet set;
    set.alpha = std::stod(key);
    for (const json& e : arr)
      set.entries.push_back({e.at("source").get<std::string>(), e.at("hour").get<int>(),
                             e.at("lo").get<double>(), e.at("hi").get<double>()});
    cache.put(set.alpha, std::move(set));
  }
  return cache;
}

}  // namespace cldigdt
