#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <unordered_map>

#include "test_support.hpp"
#include "veritrans/cnf.hpp"
#include "veritrans/solver.hpp"

using namespace veritrans;

namespace {

CnfClauseSet raw_cnf(int num_vars, std::vector<std::vector<int>> clauses) {
  CnfClauseSet cnf;
  for (int v = 1; v <= num_vars; ++v) cnf.add_variable("v" + std::to_string(v));
  cnf.clauses = std::move(clauses);
  return cnf;
}

}  // namespace

TEST_CASE("solve handles the degenerate clause sets") {
  const SolveResult contradiction = solve(raw_cnf(1, {{1}, {-1}}));
  CHECK(contradiction.status == SatStatus::UNSAT);

  const SolveResult vacuous = solve(raw_cnf(0, {}));
  CHECK(vacuous.status == SatStatus::SAT);
  CHECK(vacuous.model.empty());

  const SolveResult empty_clause = solve(raw_cnf(2, {{1, 2}, {}}));
  CHECK(empty_clause.status == SatStatus::UNSAT);
}

TEST_CASE("solve agrees with the truth-table oracle through the Tseitin bridge") {
  std::mt19937_64 rng(301);
  for (int i = 0; i < 1000; ++i) {
    const AstPtr tree = testsupport::random_ast(rng, 6);
    const SatStatus oracle = truth_table_oracle(tree);
    const SolveResult solved = solve(compile_formula(tree).cnf);
    REQUIRE(solved.status == oracle);
    if (solved.status == SatStatus::SAT) {
      REQUIRE(check_model(compile_formula(tree).cnf, solved.model));
    }
  }
}

TEST_CASE("solve is deterministic in models and counters") {
  const CnfClauseSet cnf = compile_formula("((a | b) & (!a | c)) & (c -> (d | !b))").cnf;
  const SolveResult first = solve(cnf);
  const SolveResult second = solve(cnf);
  CHECK(first.status == second.status);
  CHECK(first.model == second.model);
  CHECK(first.decisions == second.decisions);
  CHECK(first.propagations == second.propagations);
}

TEST_CASE("pure literal elimination settles one-polarity formulas without branching") {
  const SolveResult result = solve(raw_cnf(3, {{1, 2}, {1, 3}}));
  CHECK(result.status == SatStatus::SAT);
  CHECK(result.decisions == 0);
  CHECK(result.propagations == 0);
}

TEST_CASE("decision budget raises ResourceError instead of answering") {
  const CnfClauseSet cnf = raw_cnf(2, {{1, 2}, {-1, -2}});
  SolveOptions opts;
  opts.max_decisions = 0;
  CHECK_THROWS_AS(solve(cnf, opts), ResourceError);
  // with a real budget the same instance is decidable
  CHECK(solve(cnf).status == SatStatus::SAT);
}

TEST_CASE("truth_table_oracle evaluates all five connectives") {
  CHECK(truth_table_oracle(Ast::var("a")) == SatStatus::SAT);
  CHECK(truth_table_oracle(parse("a & !a").ast) == SatStatus::UNSAT);

  // (a -> b) <-> (!a | b) is a tautology: all four assignments satisfy it.
  const AstPtr tautology = parse("(a -> b) <-> (!a | b)").ast;
  CHECK(truth_table_oracle(tautology) == SatStatus::SAT);
  int satisfying = 0;
  for (int mask = 0; mask < 4; ++mask) {
    std::unordered_map<std::string, bool> env = {{"a", (mask & 1) != 0}, {"b", (mask & 2) != 0}};
    if (testsupport::eval_reference(tautology, env)) ++satisfying;
  }
  CHECK(satisfying == 4);
}

TEST_CASE("truth_table_oracle enforces the variable cap") {
  AstPtr wide = Ast::var("w0");
  for (int i = 1; i <= 20; ++i) wide = Ast::disjunction(wide, Ast::var("w" + std::to_string(i)));
  CHECK_THROWS_AS(truth_table_oracle(wide), CapacityError);  // 21 variables

  AstPtr ok = Ast::var("k0");
  for (int i = 1; i <= 19; ++i) ok = Ast::disjunction(ok, Ast::var("k" + std::to_string(i)));
  CHECK(truth_table_oracle(ok) == SatStatus::SAT);  // exactly 20
}

TEST_CASE("check_model follows clause satisfaction") {
  CHECK(check_model(raw_cnf(2, {{1, -2}}), {{1, true}, {2, true}}));
  CHECK_FALSE(check_model(raw_cnf(2, {{1}, {2}}), {{1, true}, {2, false}}));

  std::mt19937_64 rng(302);
  for (int i = 0; i < 300; ++i) {
    const CompileResult compiled = compile_formula(testsupport::random_ast(rng, 6));
    const SolveResult solved = solve(compiled.cnf);
    if (solved.status == SatStatus::SAT) REQUIRE(check_model(compiled.cnf, solved.model));
  }
}
