#pragma once

// Shared helpers for the test suite: seeded random formula and string
// generators, and a test-local formula evaluator kept independent of the
// library's eval path.

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "veritrans/formula.hpp"

namespace testsupport {

inline const std::vector<std::string>& var_pool() {
  static const std::vector<std::string> pool = {"a", "b", "c", "d", "p", "q", "x_0_0", "x_1_2", "alarm", "V1"};
  return pool;
}

inline veritrans::AstPtr random_ast(std::mt19937_64& rng, int max_depth) {
  using veritrans::Ast;
  const auto pick_var = [&rng] { return Ast::var(var_pool()[rng() % var_pool().size()]); };
  if (max_depth <= 0) return pick_var();
  switch (rng() % 10) {
    case 0:
    case 1:
    case 2:
      return pick_var();
    case 3:
    case 4:
      return Ast::negation(random_ast(rng, max_depth - 1));
    case 5:
      return Ast::conjunction(random_ast(rng, max_depth - 1), random_ast(rng, max_depth - 1));
    case 6:
      return Ast::disjunction(random_ast(rng, max_depth - 1), random_ast(rng, max_depth - 1));
    case 7:
    case 8:
      return Ast::implication(random_ast(rng, max_depth - 1), random_ast(rng, max_depth - 1));
    default:
      return Ast::biconditional(random_ast(rng, max_depth - 1), random_ast(rng, max_depth - 1));
  }
}

// Random text over an alphabet that exercises rewrites: identifiers, digits,
// operators, unicode aliases, parens, junk.
inline std::string random_text(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {
      "a",  "b",  "x",  "V",  "Valve", "0",  "1",  "27", "(",  ")",  ",",  " ",  "  ", "!",
      "&",  "|",  "->", "<->", "~",    "&&", "||", "=>", "<=>", "¬", "∧", "∨",
      "→", "↔", "$", ".",    "_",  "x(1,2)", "x( 3 , 4 )"};
  std::string out;
  const std::size_t len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) out += pieces[rng() % pieces.size()];
  return out;
}

// Test-local evaluator, deliberately written apart from the library one.
inline bool eval_reference(const veritrans::AstPtr& node,
                           const std::unordered_map<std::string, bool>& env) {
  using veritrans::AstKind;
  switch (node->kind()) {
    case AstKind::Var: return env.at(node->name());
    case AstKind::Not: return !eval_reference(node->left(), env);
    case AstKind::And: return eval_reference(node->left(), env) && eval_reference(node->right(), env);
    case AstKind::Or: return eval_reference(node->left(), env) || eval_reference(node->right(), env);
    case AstKind::Implies: return eval_reference(node->left(), env) ? eval_reference(node->right(), env) : true;
    case AstKind::Iff: return eval_reference(node->left(), env) == eval_reference(node->right(), env);
  }
  return false;
}

inline void collect_vars_reference(const veritrans::AstPtr& node, std::vector<std::string>& out) {
  if (node->kind() == veritrans::AstKind::Var) {
    for (const auto& v : out)
      if (v == node->name()) return;
    out.push_back(node->name());
    return;
  }
  collect_vars_reference(node->left(), out);
  if (node->right()) collect_vars_reference(node->right(), out);
}

// Exhaustive satisfiability by direct enumeration, independent of the
// library's oracle and solver.
inline bool brute_force_sat(const veritrans::AstPtr& ast) {
  std::vector<std::string> vars;
  collect_vars_reference(ast, vars);
  const std::uint64_t total = std::uint64_t{1} << vars.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    std::unordered_map<std::string, bool> env;
    for (std::size_t i = 0; i < vars.size(); ++i) env[vars[i]] = ((mask >> i) & 1) != 0;
    if (eval_reference(ast, env)) return true;
  }
  return false;
}

}  // namespace testsupport
