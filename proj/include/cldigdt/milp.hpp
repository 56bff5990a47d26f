#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace cldigdt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind { Continuous, Binary };

/// Opaque handle to a model variable.
struct VarRef {
  int index = -1;
  bool valid() const { return index >= 0; }
};

/// Sparse affine expression c0 + sum(coef_i * var_i).
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(double constant) : constant_(constant) {}
  LinExpr(VarRef v) { terms_.emplace_back(v.index, 1.0); }

  LinExpr& operator+=(const LinExpr& other);
  LinExpr& operator-=(const LinExpr& other);
  LinExpr& operator*=(double s);

  double constant() const { return constant_; }
  const std::vector<std::pair<int, double>>& raw_terms() const { return terms_; }

  /// Terms merged by variable index, zero coefficients dropped.
  std::map<int, double> normalized() const;

  double value_in(const std::vector<double>& x) const;

 private:
  std::vector<std::pair<int, double>> terms_;
  double constant_ = 0.0;
};

LinExpr operator+(LinExpr a, const LinExpr& b);
LinExpr operator-(LinExpr a, const LinExpr& b);
LinExpr operator-(const LinExpr& a);
LinExpr operator*(LinExpr a, double s);
LinExpr operator*(double s, LinExpr a);
LinExpr operator*(VarRef v, double s);
LinExpr operator*(double s, VarRef v);

enum class Relop { Le, Ge, Eq };

enum class SolveStatus { Optimal, Infeasible, Unbounded, Limit, Error };

std::string to_string(SolveStatus s);

struct SolveParams {
  double feasibility_tol = 1e-6;
  double mip_gap = 1e-6;
  double time_limit_sec = 0.0;  // 0 = no limit
  int threads = 1;
  int seed = 0;
  bool verbose = false;
  std::vector<double> warm_start;  // full-length hint, empty = none
};

struct Solution {
  SolveStatus status = SolveStatus::Error;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> values;  // indexed by VarRef::index, present iff Optimal
  double wall_time_sec = 0.0;
  std::int64_t node_count = 0;

  double value(VarRef v) const { return values.at(static_cast<size_t>(v.index)); }
  double value(const LinExpr& e) const { return e.value_in(values); }
};

struct ConstraintViolation {
  std::string what;  // human-readable description
  double amount = 0.0;
};

/// Linear model with continuous and binary variables, assembled in memory
/// and handed to the backend on solve().
class MilpModel {
 public:
  VarRef add_var(double lo, double hi, const std::string& name = "");
  VarRef add_binary(const std::string& name = "");

  /// lo <= expr <= hi (the expression's constant is folded into the bounds).
  void add_range(double lo, const LinExpr& expr, double hi, const std::string& name = "");
  void add(const LinExpr& lhs, Relop op, const LinExpr& rhs, const std::string& name = "");

  void minimize(const LinExpr& objective);
  void maximize(const LinExpr& objective);

  int num_vars() const { return static_cast<int>(var_lo_.size()); }
  int num_constraints() const { return static_cast<int>(con_lo_.size()); }
  VarKind var_kind(int i) const { return var_kind_[static_cast<size_t>(i)]; }
  double var_lo(int i) const { return var_lo_[static_cast<size_t>(i)]; }
  double var_hi(int i) const { return var_hi_[static_cast<size_t>(i)]; }
  const std::string& var_name(int i) const { return var_name_[static_cast<size_t>(i)]; }
  double con_lo(int i) const { return con_lo_[static_cast<size_t>(i)]; }
  double con_hi(int i) const { return con_hi_[static_cast<size_t>(i)]; }
  const std::string& con_name(int i) const { return con_name_[static_cast<size_t>(i)]; }
  const LinExpr& con_expr(int i) const { return con_expr_[static_cast<size_t>(i)]; }
  const LinExpr& objective() const { return objective_; }
  bool is_maximize() const { return maximize_; }

  /// Standard LP-format dump for offline debugging.
  std::string to_lp_string() const;
  void write_lp(const std::string& path) const;

 private:
  void check_var(const LinExpr& e) const;

  std::vector<double> var_lo_, var_hi_;
  std::vector<VarKind> var_kind_;
  std::vector<std::string> var_name_;
  std::vector<LinExpr> con_expr_;
  std::vector<double> con_lo_, con_hi_;
  std::vector<std::string> con_name_;
  LinExpr objective_;
  bool maximize_ = false;
};

/// Solve with the HiGHS backend. Infeasibility and limits are reported
/// through Solution::status, not exceptions.
Solution solve(const MilpModel& model, const SolveParams& params = {});

/// Re-evaluates every constraint, variable bound, integrality requirement and
/// the objective against the model's own data. Empty result means the
/// solution checks out within tol (objective compared at 1e-6 relative).
std::vector<ConstraintViolation> check_solution(const MilpModel& model, const Solution& sol,
                                                double tol = 1e-6);

/// solve() plus a mandatory check_solution pass on optimal results; throws
/// if the backend's answer does not verify.
Solution solve_checked(const MilpModel& model, const SolveParams& params = {});

}  // namespace cldigdt
