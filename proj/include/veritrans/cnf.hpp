#pragma once

// Deterministic AST -> CNF compilation (Tseitin encoding) and DIMACS I/O.
//
// The encoder allocates one auxiliary variable per internal node in
// post-order, except Not-of-leaf which inlines as a negative literal. The
// emitted clause order, auxiliary numbering and integer id assignment are
// pure functions of the input AST, so the DIMACS bytes are replayable.

#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "veritrans/errors.hpp"
#include "veritrans/formula.hpp"

namespace veritrans {

// ---------------------------------------------------------------------------
// Clause set over integer literals plus the name <-> id symbol table.

struct CnfClauseSet {
  std::vector<std::vector<int>> clauses;
  int num_vars = 0;
  // index i holds the name of variable id i+1; ids are contiguous 1-based.
  std::vector<std::string> id_to_name;
  std::unordered_map<std::string, int> name_to_id;

  int add_variable(const std::string& name) {
    if (auto it = name_to_id.find(name); it != name_to_id.end()) return it->second;
    id_to_name.push_back(name);
    num_vars = static_cast<int>(id_to_name.size());
    name_to_id.emplace(name, num_vars);
    return num_vars;
  }

  const std::string& name_of(int id) const { return id_to_name.at(static_cast<std::size_t>(id) - 1); }

  // 0 when the name is unknown.
  int id_of(const std::string& name) const {
    auto it = name_to_id.find(name);
    return it == name_to_id.end() ? 0 : it->second;
  }

  bool operator==(const CnfClauseSet& o) const {
    return clauses == o.clauses && num_vars == o.num_vars && id_to_name == o.id_to_name;
  }

  // Checks the structural invariants: non-zero literals in range, contiguous
  // ids, coherent bidirectional symbol table.
  bool well_formed(std::string* why = nullptr) const {
    auto fail = [&](const std::string& msg) {
      if (why) *why = msg;
      return false;
    };
    if (static_cast<int>(id_to_name.size()) != num_vars) return fail("symbol table size != num_vars");
    if (name_to_id.size() != id_to_name.size()) return fail("symbol table is not a bijection");
    for (std::size_t i = 0; i < id_to_name.size(); ++i) {
      auto it = name_to_id.find(id_to_name[i]);
      if (it == name_to_id.end() || it->second != static_cast<int>(i) + 1)
        return fail("symbol table ids are not contiguous");
    }
    for (const auto& clause : clauses) {
      for (int lit : clause) {
        if (lit == 0) return fail("zero literal in clause");
        if (std::abs(lit) > num_vars) return fail("literal out of range");
      }
    }
    return true;
  }
};

// ---------------------------------------------------------------------------
// Connective elimination

// Rewrites -> and <-> into {!, &, |}: a->b becomes (!a | b), a<->b becomes
// ((!a | b) & (!b | a)). Truth table over source variables is preserved.
inline AstPtr eliminate_connectives(const AstPtr& ast) {
  switch (ast->kind()) {
    case AstKind::Var:
      return ast;
    case AstKind::Not:
      return Ast::negation(eliminate_connectives(ast->left()));
    case AstKind::And:
      return Ast::conjunction(eliminate_connectives(ast->left()), eliminate_connectives(ast->right()));
    case AstKind::Or:
      return Ast::disjunction(eliminate_connectives(ast->left()), eliminate_connectives(ast->right()));
    case AstKind::Implies: {
      AstPtr l = eliminate_connectives(ast->left());
      AstPtr r = eliminate_connectives(ast->right());
      return Ast::disjunction(Ast::negation(std::move(l)), std::move(r));
    }
    case AstKind::Iff: {
      AstPtr l = eliminate_connectives(ast->left());
      AstPtr r = eliminate_connectives(ast->right());
      return Ast::conjunction(Ast::disjunction(Ast::negation(l), r),
                              Ast::disjunction(Ast::negation(r), l));
    }
  }
  throw Error("unreachable AST kind");
}

// ---------------------------------------------------------------------------
// Tseitin encoding over named literals ("x" / "!x")

inline constexpr std::string_view kAuxPrefix = "_aux_";

inline std::string negate_literal(const std::string& lit) {
  if (!lit.empty() && lit[0] == '!') return lit.substr(1);
  return "!" + lit;
}

struct NamedCnf {
  std::vector<std::vector<std::string>> clauses;
  std::string top_literal;
};

namespace detail {

struct TseitinState {
  std::vector<std::vector<std::string>>* clauses;
  int next_aux = 0;

  std::string fresh_aux() { return std::string(kAuxPrefix) + std::to_string(next_aux++); }
};

inline std::string tseitin_encode(const AstPtr& node, TseitinState& st) {
  switch (node->kind()) {
    case AstKind::Var:
      if (node->name().rfind(kAuxPrefix, 0) == 0)
        throw CompileError("source variable uses the reserved prefix: " + node->name());
      return node->name();
    case AstKind::Not: {
      if (node->left()->is_leaf()) {
        // Not-of-leaf inlines as a negative literal, no auxiliary.
        return negate_literal(tseitin_encode(node->left(), st));
      }
      const std::string child = tseitin_encode(node->left(), st);
      const std::string v = st.fresh_aux();
      st.clauses->push_back({negate_literal(v), negate_literal(child)});
      st.clauses->push_back({child, v});
      return v;
    }
    case AstKind::And: {
      const std::string a = tseitin_encode(node->left(), st);
      const std::string b = tseitin_encode(node->right(), st);
      const std::string v = st.fresh_aux();
      st.clauses->push_back({negate_literal(v), a});
      st.clauses->push_back({negate_literal(v), b});
      st.clauses->push_back({negate_literal(a), negate_literal(b), v});
      return v;
    }
    case AstKind::Or: {
      const std::string a = tseitin_encode(node->left(), st);
      const std::string b = tseitin_encode(node->right(), st);
      const std::string v = st.fresh_aux();
      st.clauses->push_back({negate_literal(v), a, b});
      st.clauses->push_back({negate_literal(a), v});
      st.clauses->push_back({negate_literal(b), v});
      return v;
    }
    default:
      throw CompileError("Tseitin encoder requires connectives to be eliminated first");
  }
}

}  // namespace detail

// Requires an AST over {Var, Not, And, Or}. The returned clause list includes
// the unit clause asserting the top literal; clause count is linear in the
// node count (at most 3n + 1).
inline NamedCnf tseitin_cnf(const AstPtr& ast) {
  NamedCnf out;
  detail::TseitinState st{&out.clauses, 0};
  out.top_literal = detail::tseitin_encode(ast, st);
  out.clauses.push_back({out.top_literal});
  return out;
}

// ---------------------------------------------------------------------------
// Name -> integer id assignment

// Ids are assigned in first-occurrence order over the clause list; names
// listed in preferred_order that occur in the clauses are seated first, in
// that order. Negation maps to integer sign.
inline CnfClauseSet map_lits_to_ints(const std::vector<std::vector<std::string>>& named_clauses,
                                     std::span<const std::string> preferred_order = {}) {
  CnfClauseSet out;

  auto base_name = [](const std::string& lit) -> std::string {
    std::string name = (!lit.empty() && lit[0] == '!') ? lit.substr(1) : lit;
    if (!is_identifier(name)) throw CompileError("invalid literal \"" + lit + "\"");
    return name;
  };

  if (!preferred_order.empty()) {
    std::unordered_set<std::string> occurring;
    for (const auto& clause : named_clauses)
      for (const auto& lit : clause) occurring.insert(base_name(lit));
    for (const auto& name : preferred_order)
      if (occurring.count(name)) out.add_variable(name);
  }

  for (const auto& clause : named_clauses) {
    std::vector<int> ints;
    ints.reserve(clause.size());
    for (const auto& lit : clause) {
      const bool neg = !lit.empty() && lit[0] == '!';
      const int id = out.add_variable(base_name(lit));
      ints.push_back(neg ? -id : id);
    }
    out.clauses.push_back(std::move(ints));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full compile path

struct CompileResult {
  AstPtr ast;  // parsed source formula (pre-elimination)
  std::vector<std::string> source_vars;
  CnfClauseSet cnf;
  std::string top_literal;
};

// eliminate -> tseitin -> integer mapping with source variables seated before
// auxiliaries. Deterministic: equal ASTs give equal clause sets byte for byte.
inline CompileResult compile_formula(const AstPtr& ast) {
  CompileResult result;
  result.ast = ast;
  detail::collect_vars(ast, result.source_vars);
  const NamedCnf named = tseitin_cnf(eliminate_connectives(ast));
  result.cnf = map_lits_to_ints(named.clauses, result.source_vars);
  result.top_literal = named.top_literal;
  return result;
}

// canonicalize -> normalize -> parse -> compile; the whole stage-3 front half.
inline CompileResult compile_formula(const std::string& formula_text) {
  const ParseResult parsed = parse(formula_text);
  return compile_formula(parsed.ast);
}

// ---------------------------------------------------------------------------
// DIMACS

// Emits: one `c <id> <name>` line per symbol table entry (ascending id), one
// `p cnf <vars> <clauses>` header, then one zero-terminated clause per line.
// '\n' endings, no trailing blank line; byte-identical for equal inputs.
inline std::string to_dimacs(const CnfClauseSet& cnf) {
  std::string out;
  for (int id = 1; id <= cnf.num_vars; ++id) {
    out += "c " + std::to_string(id) + " " + cnf.name_of(id) + "\n";
  }
  out += "p cnf " + std::to_string(cnf.num_vars) + " " + std::to_string(cnf.clauses.size()) + "\n";
  for (const auto& clause : cnf.clauses) {
    std::string line;
    for (int lit : clause) {
      line += std::to_string(lit);
      line += ' ';
    }
    line += '0';
    out += line + "\n";
  }
  return out;
}

// Inverse of to_dimacs on its own output. Foreign comment lines are ignored;
// `c <id> <identifier>` comments with an in-range id populate the symbol
// table. Ids without a recorded name are synthesized as v<id>.
inline CnfClauseSet parse_dimacs(std::string_view text) {
  long num_vars = -1, num_clauses = -1;
  std::vector<std::pair<long, std::string>> symbols;
  std::vector<std::vector<int>> clauses;
  std::vector<int> current;
  bool open_clause = false;

  for (const std::string& raw : split_lines(text)) {
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == 'c') {
      // Recognized symbol comments are "c <int> <identifier>"; anything else
      // is a foreign comment and skipped.
      std::size_t i = 1;
      while (i < line.size() && line[i] == ' ') ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] >= '0' && line[j] <= '9') ++j;
      if (j == i) continue;
      std::size_t k = j;
      while (k < line.size() && line[k] == ' ') ++k;
      if (k == j || k >= line.size()) continue;
      const std::string name = line.substr(k);
      if (!is_identifier(name)) continue;
      symbols.emplace_back(std::stol(line.substr(i, j - i)), name);
      continue;
    }
    if (line[0] == 'p') {
      if (num_vars >= 0) throw FormatError("duplicate DIMACS header");
      long nv = 0, nc = 0;
      char tag[4] = {0};
      if (std::sscanf(line.c_str(), "p %3s %ld %ld", tag, &nv, &nc) != 3 || std::string(tag) != "cnf" ||
          nv < 0 || nc < 0) {
        throw FormatError("malformed DIMACS header: \"" + line + "\"");
      }
      num_vars = nv;
      num_clauses = nc;
      continue;
    }
    if (num_vars < 0) throw FormatError("clause data before DIMACS header");
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      if (line[end] == '-') ++end;
      const std::size_t digits_begin = end;
      while (end < line.size() && line[end] >= '0' && line[end] <= '9') ++end;
      if (end == digits_begin) throw FormatError("non-integer token in clause: \"" + line + "\"");
      const long lit = std::stol(line.substr(pos, end - pos));
      pos = end;
      if (lit == 0) {
        clauses.push_back(std::move(current));
        current.clear();
        open_clause = false;
      } else {
        if (std::labs(lit) > num_vars) {
          throw FormatError("literal " + std::to_string(lit) + " exceeds declared variable count");
        }
        current.push_back(static_cast<int>(lit));
        open_clause = true;
      }
    }
  }

  if (num_vars < 0) throw FormatError("missing DIMACS header");
  if (open_clause) throw FormatError("final clause is not 0-terminated");
  if (static_cast<long>(clauses.size()) != num_clauses) {
    throw FormatError("header declares " + std::to_string(num_clauses) + " clauses, found " +
                      std::to_string(clauses.size()));
  }

  CnfClauseSet out;
  out.num_vars = static_cast<int>(num_vars);
  out.id_to_name.assign(static_cast<std::size_t>(num_vars), std::string());
  for (const auto& [id, name] : symbols) {
    if (id < 1 || id > num_vars) continue;  // foreign
    auto& slot = out.id_to_name[static_cast<std::size_t>(id) - 1];
    if (!slot.empty() && slot != name) throw FormatError("conflicting names for variable " + std::to_string(id));
    slot = name;
  }
  for (std::size_t i = 0; i < out.id_to_name.size(); ++i) {
    if (out.id_to_name[i].empty()) out.id_to_name[i] = "v" + std::to_string(i + 1);
    auto [it, inserted] = out.name_to_id.emplace(out.id_to_name[i], static_cast<int>(i) + 1);
    if (!inserted) throw FormatError("duplicate variable name \"" + out.id_to_name[i] + "\"");
  }
  out.clauses = std::move(clauses);
  return out;
}

}  // namespace veritrans
