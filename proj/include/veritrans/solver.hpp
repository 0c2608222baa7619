#pragma once

// DPLL satisfiability with unit propagation and pure-literal elimination,
// plus an exhaustive truth-table oracle for desk-scale cross-checking.
//
// Branching is fixed (lowest unassigned variable id, true first) so models
// and decision/propagation counts are identical across runs.

#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "veritrans/cnf.hpp"
#include "veritrans/errors.hpp"
#include "veritrans/formula.hpp"

namespace veritrans {

enum class SatStatus { SAT, UNSAT };

inline std::string to_string(SatStatus s) { return s == SatStatus::SAT ? "SAT" : "UNSAT"; }

struct SolveResult {
  SatStatus status = SatStatus::UNSAT;
  // Present iff SAT; assigns every variable id in 1..num_vars.
  std::map<int, bool> model;
  long decisions = 0;
  long propagations = 0;
};

struct SolveOptions {
  long max_decisions = 10'000'000;
};

namespace detail {

enum : std::int8_t { kUnassigned = -1, kFalse = 0, kTrue = 1 };

struct DpllState {
  const std::vector<std::vector<int>>* clauses;
  std::vector<std::int8_t> assign;  // index by var id
  long decisions = 0;
  long propagations = 0;
  long max_decisions = 0;
};

inline bool literal_true(const DpllState& st, int lit) {
  const std::int8_t v = st.assign[static_cast<std::size_t>(std::abs(lit))];
  return v != kUnassigned && (v == kTrue) == (lit > 0);
}

inline bool literal_false(const DpllState& st, int lit) {
  const std::int8_t v = st.assign[static_cast<std::size_t>(std::abs(lit))];
  return v != kUnassigned && (v == kTrue) != (lit > 0);
}

// Runs unit propagation then pure-literal elimination to a joint fixpoint.
// Returns false on conflict. Assignments are recorded in `trail` for undo.
inline bool simplify(DpllState& st, std::vector<int>& trail) {
  bool changed = true;
  while (changed) {
    changed = false;
    // Unit propagation, scanning clauses in index order.
    bool units = true;
    while (units) {
      units = false;
      for (const auto& clause : *st.clauses) {
        int unassigned = 0, last = 0;
        bool satisfied = false;
        for (int lit : clause) {
          if (literal_true(st, lit)) {
            satisfied = true;
            break;
          }
          if (!literal_false(st, lit)) {
            ++unassigned;
            last = lit;
          }
        }
        if (satisfied) continue;
        if (unassigned == 0) return false;  // conflict
        if (unassigned == 1) {
          st.assign[static_cast<std::size_t>(std::abs(last))] = last > 0 ? kTrue : kFalse;
          trail.push_back(std::abs(last));
          ++st.propagations;
          units = true;
          changed = true;
        }
      }
    }
    // Pure literals over clauses not yet satisfied.
    const std::size_t n = st.assign.size();
    std::vector<std::uint8_t> pos(n, 0), neg(n, 0);
    for (const auto& clause : *st.clauses) {
      bool satisfied = false;
      for (int lit : clause)
        if (literal_true(st, lit)) {
          satisfied = true;
          break;
        }
      if (satisfied) continue;
      for (int lit : clause) {
        if (literal_false(st, lit)) continue;
        (lit > 0 ? pos : neg)[static_cast<std::size_t>(std::abs(lit))] = 1;
      }
    }
    for (std::size_t v = 1; v < n; ++v) {
      if (st.assign[v] != kUnassigned) continue;
      if (pos[v] && !neg[v]) {
        st.assign[v] = kTrue;
        trail.push_back(static_cast<int>(v));
        changed = true;
      } else if (neg[v] && !pos[v]) {
        st.assign[v] = kFalse;
        trail.push_back(static_cast<int>(v));
        changed = true;
      }
    }
  }
  return true;
}

inline bool all_satisfied(const DpllState& st) {
  for (const auto& clause : *st.clauses) {
    bool satisfied = false;
    for (int lit : clause)
      if (literal_true(st, lit)) {
        satisfied = true;
        break;
      }
    if (!satisfied) return false;
  }
  return true;
}

inline bool dpll(DpllState& st) {
  std::vector<int> trail;
  if (!simplify(st, trail)) {
    for (int v : trail) st.assign[static_cast<std::size_t>(v)] = kUnassigned;
    return false;
  }
  if (all_satisfied(st)) return true;

  int branch_var = 0;
  for (std::size_t v = 1; v < st.assign.size(); ++v) {
    if (st.assign[v] == kUnassigned) {
      branch_var = static_cast<int>(v);
      break;
    }
  }
  if (branch_var == 0) {
    // Every variable assigned but some clause is unsatisfied.
    for (int v : trail) st.assign[static_cast<std::size_t>(v)] = kUnassigned;
    return false;
  }

  for (std::int8_t value : {kTrue, kFalse}) {
    if (++st.decisions > st.max_decisions) {
      throw ResourceError("decision budget of " + std::to_string(st.max_decisions) + " exceeded");
    }
    st.assign[static_cast<std::size_t>(branch_var)] = value;
    if (dpll(st)) return true;
    st.assign[static_cast<std::size_t>(branch_var)] = kUnassigned;
  }
  for (int v : trail) st.assign[static_cast<std::size_t>(v)] = kUnassigned;
  return false;
}

}  // namespace detail

// Decides satisfiability. An empty clause list is SAT with an empty model; a
// clause set containing the empty clause is UNSAT. SAT models assign every
// variable (don't-care variables default to false).
inline SolveResult solve(const CnfClauseSet& cnf, const SolveOptions& options = {}) {
  detail::DpllState st;
  st.clauses = &cnf.clauses;
  st.assign.assign(static_cast<std::size_t>(cnf.num_vars) + 1, detail::kUnassigned);
  st.max_decisions = options.max_decisions;

  SolveResult result;
  const bool sat = detail::dpll(st);
  result.decisions = st.decisions;
  result.propagations = st.propagations;
  if (!sat) {
    result.status = SatStatus::UNSAT;
    return result;
  }
  result.status = SatStatus::SAT;
  for (int id = 1; id <= cnf.num_vars; ++id) {
    const std::int8_t v = st.assign[static_cast<std::size_t>(id)];
    result.model[id] = (v == detail::kTrue);
  }
  return result;
}

// True iff every clause contains a satisfied literal under `model`.
inline bool check_model(const CnfClauseSet& cnf, const std::map<int, bool>& model) {
  for (const auto& clause : cnf.clauses) {
    bool satisfied = false;
    for (int lit : clause) {
      auto it = model.find(std::abs(lit));
      if (it == model.end()) continue;
      if (it->second == (lit > 0)) {
        satisfied = true;
        break;
      }
    }
    if (!satisfied) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Direct formula evaluation and the exhaustive oracle

// Standard semantics for all five connectives.
template <typename Lookup>
bool eval_ast(const AstPtr& ast, const Lookup& value_of) {
  switch (ast->kind()) {
    case AstKind::Var: return value_of(ast->name());
    case AstKind::Not: return !eval_ast(ast->left(), value_of);
    case AstKind::And: return eval_ast(ast->left(), value_of) && eval_ast(ast->right(), value_of);
    case AstKind::Or: return eval_ast(ast->left(), value_of) || eval_ast(ast->right(), value_of);
    case AstKind::Implies: return !eval_ast(ast->left(), value_of) || eval_ast(ast->right(), value_of);
    case AstKind::Iff: return eval_ast(ast->left(), value_of) == eval_ast(ast->right(), value_of);
  }
  throw Error("unreachable AST kind");
}

inline constexpr std::size_t kOracleVarCap = 20;

// Exhaustively evaluates all 2^n assignments; n is hard-capped at 20.
inline SatStatus truth_table_oracle(const AstPtr& ast) {
  std::vector<std::string> vars;
  detail::collect_vars(ast, vars);
  if (vars.size() > kOracleVarCap) {
    throw CapacityError("truth-table oracle supports at most " + std::to_string(kOracleVarCap) +
                        " variables, got " + std::to_string(vars.size()));
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vars.size(); ++i) index.emplace(vars[i], i);

  const std::uint64_t total = std::uint64_t{1} << vars.size();
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    auto value_of = [&](const std::string& name) { return ((mask >> index.at(name)) & 1) != 0; };
    if (eval_ast(ast, value_of)) return SatStatus::SAT;
  }
  return SatStatus::UNSAT;
}

}  // namespace veritrans
