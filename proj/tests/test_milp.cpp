#include "cldigdt/milp.hpp"

#include "doctest.h"

using namespace cldigdt;

TEST_CASE("continuous minimum hits the binding bound") {
  MilpModel m;
  VarRef x = m.add_var(-kInf, kInf, "x");
  m.add(LinExpr(x), Relop::Ge, LinExpr(3.0));
  m.minimize(LinExpr(x));
  Solution sol = solve(m);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(check_solution(m, sol).empty());
}

TEST_CASE("contradictory rows are infeasible") {
  MilpModel m;
  VarRef x = m.add_var(-kInf, kInf);
  m.add(LinExpr(x), Relop::Ge, LinExpr(1.0));
  m.add(LinExpr(x), Relop::Le, LinExpr(0.0));
  m.minimize(LinExpr(x));
  CHECK(solve(m).status == SolveStatus::Infeasible);
}

TEST_CASE("binary covering picks the cheap variable") {
  MilpModel m;
  VarRef a = m.add_binary("a");
  VarRef b = m.add_binary("b");
  m.add(LinExpr(a) + b, Relop::Ge, LinExpr(1.0));
  m.minimize(a * 2.0 + b * 1.0);
  Solution sol = solve(m);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(1.0));
  CHECK(sol.value(a) == doctest::Approx(0.0));
  CHECK(sol.value(b) == doctest::Approx(1.0));
  CHECK(check_solution(m, sol).empty());
}

TEST_CASE("check_solution flags a perturbed tight constraint") {
  MilpModel m;
  VarRef x = m.add_var(0.0, 10.0, "x");
  VarRef y = m.add_var(0.0, 10.0, "y");
  m.add(LinExpr(x) + y, Relop::Ge, LinExpr(4.0), "cover");
  m.minimize(LinExpr(x) + y);
  Solution sol = solve(m);
  REQUIRE(sol.status == SolveStatus::Optimal);
  REQUIRE(check_solution(m, sol).empty());

  Solution tampered = sol;
  tampered.values[static_cast<size_t>(x.index)] -= 1.0;
  auto report = check_solution(m, tampered);
  bool constraint_listed = false;
  for (const auto& v : report)
    if (v.what.find("cover") != std::string::npos) constraint_listed = true;
  CHECK(constraint_listed);
}

TEST_CASE("check_solution flags an objective mismatch") {
  MilpModel m;
  VarRef x = m.add_var(1.0, 5.0);
  m.minimize(LinExpr(x));
  Solution sol = solve(m);
  REQUIRE(sol.status == SolveStatus::Optimal);
  sol.objective += 1.0;
  auto report = check_solution(m, sol);
  bool mismatch = false;
  for (const auto& v : report)
    if (v.what.find("objective mismatch") != std::string::npos) mismatch = true;
  CHECK(mismatch);
}

TEST_CASE("identical model and seed reproduce the objective") {
  auto run = []() {
    MilpModel m;
    std::vector<VarRef> xs;
    for (int i = 0; i < 12; ++i) xs.push_back(m.add_binary());
    LinExpr total;
    for (int i = 0; i < 12; ++i) total += xs[static_cast<size_t>(i)] * (1.0 + 0.3 * i);
    m.add(total, Relop::Ge, LinExpr(7.0));
    m.minimize(total);
    SolveParams p;
    p.seed = 42;
    return solve(m, p);
  };
  Solution a = run();
  Solution b = run();
  REQUIRE(a.status == SolveStatus::Optimal);
  CHECK(a.status == b.status);
  CHECK(std::abs(a.objective - b.objective) < 1e-9);
}

TEST_CASE("maximize reports the objective in its own sense") {
  MilpModel m;
  VarRef x = m.add_var(0.0, 2.5);
  m.maximize(LinExpr(x) * 2.0);
  Solution sol = solve(m);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(5.0));
  CHECK(check_solution(m, sol).empty());
}

TEST_CASE("LP export mentions every variable and bound") {
  MilpModel m;
  VarRef x = m.add_var(0.0, 4.0, "x");
  VarRef z = m.add_binary("z");
  m.add(LinExpr(x) + z * 2.0, Relop::Le, LinExpr(5.0));
  m.minimize(LinExpr(x) - z);
  std::string lp = m.to_lp_string();
  CHECK(lp.find("minimize") != std::string::npos);
  CHECK(lp.find("binary") != std::string::npos);
  CHECK(lp.find("x0") != std::string::npos);
  CHECK(lp.find("x1") != std::string::npos);
}

TEST_CASE("inverted variable bounds are rejected at add time") {
  MilpModel m;
  CHECK_THROWS_AS(m.add_var(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("expressions referencing foreign variables are rejected") {
  MilpModel m;
  m.add_var(0.0, 1.0);
  VarRef ghost{7};
  CHECK_THROWS_AS(m.add(LinExpr(ghost), Relop::Le, LinExpr(1.0)), std::invalid_argument);
}
