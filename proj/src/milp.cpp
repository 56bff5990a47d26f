#include "cldigdt/milp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "Highs.h"

namespace cldigdt {

LinExpr& LinExpr::operator+=(const LinExpr& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  constant_ += other.constant_;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& other) {
  for (const auto& [idx, coef] : other.terms_) terms_.emplace_back(idx, -coef);
  constant_ -= other.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& [idx, coef] : terms_) coef *= s;
  constant_ *= s;
  return *this;
}

std::map<int, double> LinExpr::normalized() const {
  std::map<int, double> merged;
  for (const auto& [idx, coef] : terms_) merged[idx] += coef;
  for (auto it = merged.begin(); it != merged.end();) {
    if (it->second == 0.0)
      it = merged.erase(it);
    else
      ++it;
  }
  return merged;
}

double LinExpr::value_in(const std::vector<double>& x) const {
  double v = constant_;
  for (const auto& [idx, coef] : terms_) v += coef * x.at(static_cast<size_t>(idx));
  return v;
}

LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
LinExpr operator-(const LinExpr& a) { return LinExpr(0.0) - a; }
LinExpr operator*(LinExpr a, double s) { return a *= s; }
LinExpr operator*(double s, LinExpr a) { return a *= s; }
LinExpr operator*(VarRef v, double s) { return LinExpr(v) *= s; }
LinExpr operator*(double s, VarRef v) { return LinExpr(v) *= s; }

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::Limit: return "limit";
    case SolveStatus::Error: return "error";
  }
  return "unknown";
}

VarRef MilpModel::add_var(double lo, double hi, const std::string& name) {
  if (!(lo <= hi)) throw std::invalid_argument("variable bounds inverted: " + name);
  var_lo_.push_back(lo);
  var_hi_.push_back(hi);
  var_kind_.push_back(VarKind::Continuous);
  var_name_.push_back(name.empty() ? "x" + std::to_string(var_lo_.size() - 1) : name);
  return VarRef{static_cast<int>(var_lo_.size()) - 1};
}

VarRef MilpModel::add_binary(const std::string& name) {
  VarRef v = add_var(0.0, 1.0, name);
  var_kind_.back() = VarKind::Binary;
  return v;
}

void MilpModel::check_var(const LinExpr& e) const {
  for (const auto& [idx, coef] : e.raw_terms()) {
    (void)coef;
    if (idx < 0 || idx >= num_vars())
      throw std::invalid_argument("expression references unregistered variable");
  }
}

void MilpModel::add_range(double lo, const LinExpr& expr, double hi, const std::string& name) {
  check_var(expr);
  con_expr_.push_back(expr);
  con_lo_.push_back(lo - expr.constant());
  con_hi_.push_back(hi - expr.constant());
  con_name_.push_back(name.empty() ? "c" + std::to_string(con_lo_.size() - 1) : name);
}

void MilpModel::add(const LinExpr& lhs, Relop op, const LinExpr& rhs, const std::string& name) {
  LinExpr diff = lhs - rhs;
  switch (op) {
    case Relop::Le: add_range(-kInf, diff, 0.0, name); break;
    case Relop::Ge: add_range(0.0, diff, kInf, name); break;
    case Relop::Eq: add_range(0.0, diff, 0.0, name); break;
  }
}

void MilpModel::minimize(const LinExpr& objective) {
  check_var(objective);
  objective_ = objective;
  maximize_ = false;
}

void MilpModel::maximize(const LinExpr& objective) {
  check_var(objective);
  objective_ = objective;
  maximize_ = true;
}

namespace {

void append_bound(std::ostream& os, double b) {
  if (b == kInf)
    os << "+inf";
  else if (b == -kInf)
    os << "-inf";
  else
    os << b;
}

void append_expr(std::ostream& os, const std::map<int, double>& terms) {
  bool first = true;
  for (const auto& [idx, coef] : terms) {
    if (coef >= 0.0)
      os << (first ? "" : " + ") << coef;
    else
      os << (first ? "-" : " - ") << -coef;
    os << " x" << idx;
    first = false;
  }
  if (first) os << "0 x0";
}

}  // namespace

std::string MilpModel::to_lp_string() const {
  std::ostringstream os;
  os.precision(17);
  os << (maximize_ ? "maximize\n obj: " : "minimize\n obj: ");
  append_expr(os, objective_.normalized());
  os << "\nsubject to\n";
  for (int i = 0; i < num_constraints(); ++i) {
    auto terms = con_expr_[static_cast<size_t>(i)].normalized();
    double lo = con_lo_[static_cast<size_t>(i)];
    double hi = con_hi_[static_cast<size_t>(i)];
    if (lo == hi) {
      os << " " << con_name_[static_cast<size_t>(i)] << ": ";
      append_expr(os, terms);
      os << " = " << lo << "\n";
      continue;
    }
    if (lo != -kInf) {
      os << " " << con_name_[static_cast<size_t>(i)] << "_lo: ";
      append_expr(os, terms);
      os << " >= " << lo << "\n";
    }
    if (hi != kInf) {
      os << " " << con_name_[static_cast<size_t>(i)] << "_hi: ";
      append_expr(os, terms);
      os << " <= " << hi << "\n";
    }
  }
  os << "bounds\n";
  for (int i = 0; i < num_vars(); ++i) {
    os << " ";
    append_bound(os, var_lo_[static_cast<size_t>(i)]);
    os << " <= x" << i << " <= ";
    append_bound(os, var_hi_[static_cast<size_t>(i)]);
    os << "\n";
  }
  os << "binary\n";
  for (int i = 0; i < num_vars(); ++i)
    if (var_kind_[static_cast<size_t>(i)] == VarKind::Binary) os << " x" << i << "\n";
  os << "end\n";
  return os.str();
}

void MilpModel::write_lp(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << to_lp_string();
}

Solution solve(const MilpModel& model, const SolveParams& params) {
  HighsModel hm;
  HighsLp& lp = hm.lp_;
  const int n = model.num_vars();
  const int m = model.num_constraints();
  lp.num_col_ = n;
  lp.num_row_ = m;
  lp.sense_ = model.is_maximize() ? ObjSense::kMaximize : ObjSense::kMinimize;
  lp.offset_ = model.objective().constant();
  lp.col_cost_.assign(static_cast<size_t>(n), 0.0);
  for (const auto& [idx, coef] : model.objective().normalized())
    lp.col_cost_[static_cast<size_t>(idx)] = coef;
  lp.col_lower_.resize(static_cast<size_t>(n));
  lp.col_upper_.resize(static_cast<size_t>(n));
  bool any_integer = false;
  lp.integrality_.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    lp.col_lower_[static_cast<size_t>(i)] = model.var_lo(i);
    lp.col_upper_[static_cast<size_t>(i)] = model.var_hi(i);
    const bool is_bin = model.var_kind(i) == VarKind::Binary;
    any_integer = any_integer || is_bin;
    lp.integrality_[static_cast<size_t>(i)] =
        is_bin ? HighsVarType::kInteger : HighsVarType::kContinuous;
  }
  if (!any_integer) lp.integrality_.clear();

  lp.row_lower_.resize(static_cast<size_t>(m));
  lp.row_upper_.resize(static_cast<size_t>(m));
  lp.a_matrix_.format_ = MatrixFormat::kRowwise;
  lp.a_matrix_.start_.assign(1, 0);
  for (int i = 0; i < m; ++i) {
    lp.row_lower_[static_cast<size_t>(i)] = model.con_lo(i);
    lp.row_upper_[static_cast<size_t>(i)] = model.con_hi(i);
    for (const auto& [idx, coef] : model.con_expr(i).normalized()) {
      lp.a_matrix_.index_.push_back(idx);
      lp.a_matrix_.value_.push_back(coef);
    }
    lp.a_matrix_.start_.push_back(static_cast<HighsInt>(lp.a_matrix_.index_.size()));
  }

  Highs highs;
  highs.setOptionValue("output_flag", params.verbose);
  highs.setOptionValue("threads", params.threads);
  highs.setOptionValue("random_seed", params.seed);
  highs.setOptionValue("mip_rel_gap", params.mip_gap);
  highs.setOptionValue("mip_feasibility_tolerance", params.feasibility_tol);
  highs.setOptionValue("primal_feasibility_tolerance", std::min(params.feasibility_tol, 1e-7));
  if (params.time_limit_sec > 0) highs.setOptionValue("time_limit", params.time_limit_sec);
  if (highs.passModel(hm) != HighsStatus::kOk)
    throw std::runtime_error("backend rejected the model");

  if (!params.warm_start.empty() && any_integer) {
    if (static_cast<int>(params.warm_start.size()) != n)
      throw std::invalid_argument("warm start length mismatch");
    HighsSolution ws;
    ws.col_value = params.warm_start;
    highs.setSolution(ws);
  }

  const double t0 = highs.getRunTime();
  HighsStatus rs = highs.run();
  Solution out;
  out.wall_time_sec = highs.getRunTime() - t0;
  out.node_count = highs.getInfo().mip_node_count;
  if (rs == HighsStatus::kError) {
    out.status = SolveStatus::Error;
    return out;
  }
  switch (highs.getModelStatus()) {
    case HighsModelStatus::kOptimal: out.status = SolveStatus::Optimal; break;
    case HighsModelStatus::kInfeasible: out.status = SolveStatus::Infeasible; break;
    case HighsModelStatus::kUnbounded:
    case HighsModelStatus::kUnboundedOrInfeasible: out.status = SolveStatus::Unbounded; break;
    case HighsModelStatus::kTimeLimit:
    case HighsModelStatus::kIterationLimit:
    case HighsModelStatus::kSolutionLimit:
    case HighsModelStatus::kObjectiveBound:
    case HighsModelStatus::kObjectiveTarget: out.status = SolveStatus::Limit; break;
    default: out.status = SolveStatus::Error; break;
  }
  if (out.status == SolveStatus::Optimal) {
    out.objective = highs.getInfo().objective_function_value;
    out.values = highs.getSolution().col_value;
  }
  return out;
}

Solution solve_checked(const MilpModel& model, const SolveParams& params) {
  Solution sol = solve(model, params);
  if (sol.status == SolveStatus::Optimal) {
    auto bad = check_solution(model, sol);
    if (!bad.empty()) {
      std::string msg = "solution failed verification:";
      for (size_t i = 0; i < bad.size() && i < 5; ++i) msg += "\n  " + bad[i].what;
      throw std::logic_error(msg);
    }
  }
  return sol;
}

std::vector<ConstraintViolation> check_solution(const MilpModel& model, const Solution& sol,
                                                double tol) {
  std::vector<ConstraintViolation> report;
  if (sol.status != SolveStatus::Optimal) {
    report.push_back({"solution status is not optimal", 0.0});
    return report;
  }
  if (static_cast<int>(sol.values.size()) != model.num_vars()) {
    report.push_back({"value vector length mismatch", 0.0});
    return report;
  }
  for (int i = 0; i < model.num_vars(); ++i) {
    const double v = sol.values[static_cast<size_t>(i)];
    if (v < model.var_lo(i) - tol || v > model.var_hi(i) + tol)
      report.push_back({"bound violation on " + model.var_name(i),
                        std::max(model.var_lo(i) - v, v - model.var_hi(i))});
    if (model.var_kind(i) == VarKind::Binary && std::abs(v - std::round(v)) > tol)
      report.push_back({"integrality violation on " + model.var_name(i),
                        std::abs(v - std::round(v))});
  }
  for (int i = 0; i < model.num_constraints(); ++i) {
    const double v = model.con_expr(i).value_in(sol.values) - model.con_expr(i).constant();
    if (v < model.con_lo(i) - tol || v > model.con_hi(i) + tol)
      report.push_back({"constraint violation on " + model.con_name(i),
                        std::max(model.con_lo(i) - v, v - model.con_hi(i))});
  }
  const double recomputed = model.objective().value_in(sol.values);
  const double scale = std::max({1.0, std::abs(recomputed), std::abs(sol.objective)});
  if (std::abs(recomputed - sol.objective) > 1e-6 * scale)
    report.push_back({"objective mismatch: reported " + std::to_string(sol.objective) +
                          ", recomputed " + std::to_string(recomputed),
                      std::abs(recomputed - sol.objective)});
  return report;
}

}  // namespace cldigdt
