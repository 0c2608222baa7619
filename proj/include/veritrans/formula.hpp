#pragma once

// Propositional formula front end: source-text canonicalization, tokenizer,
// shunting-yard RPN conversion, AST construction and canonical rendering.
//
// Canonical operator set after normalization: !  &  |  ->  <->
// Precedence (tightest first): !  &  |  ->  <->
// `!` and `->` are right-associative, the rest left-associative.

#include <cstddef>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "veritrans/errors.hpp"
#include "veritrans/text.hpp"

namespace veritrans {

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind { VAR, NOT, AND, OR, IMPLIES, IFF, LPAREN, RPAREN };

struct Token {
  TokenKind kind;
  std::string lexeme;
  std::size_t position = 0;

  bool operator==(const Token& o) const { return kind == o.kind && lexeme == o.lexeme; }
};

// ---------------------------------------------------------------------------
// AST

enum class AstKind { Var, Not, And, Or, Implies, Iff };

class Ast;
using AstPtr = std::shared_ptr<const Ast>;

class Ast {
public:
  static AstPtr var(std::string name) { return make(AstKind::Var, std::move(name), nullptr, nullptr); }
  static AstPtr negation(AstPtr child) { return make(AstKind::Not, "", std::move(child), nullptr); }
  static AstPtr conjunction(AstPtr l, AstPtr r) { return make(AstKind::And, "", std::move(l), std::move(r)); }
  static AstPtr disjunction(AstPtr l, AstPtr r) { return make(AstKind::Or, "", std::move(l), std::move(r)); }
  static AstPtr implication(AstPtr l, AstPtr r) { return make(AstKind::Implies, "", std::move(l), std::move(r)); }
  static AstPtr biconditional(AstPtr l, AstPtr r) { return make(AstKind::Iff, "", std::move(l), std::move(r)); }

  AstKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const AstPtr& left() const { return left_; }
  const AstPtr& right() const { return right_; }

  bool is_leaf() const { return kind_ == AstKind::Var; }

private:
  Ast(AstKind kind, std::string name, AstPtr l, AstPtr r)
      : kind_(kind), name_(std::move(name)), left_(std::move(l)), right_(std::move(r)) {}

  static AstPtr make(AstKind kind, std::string name, AstPtr l, AstPtr r) {
    return AstPtr(new Ast(kind, std::move(name), std::move(l), std::move(r)));
  }

  AstKind kind_;
  std::string name_;
  AstPtr left_, right_;
};

inline bool ast_equal(const AstPtr& a, const AstPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind() != b->kind()) return false;
  if (a->kind() == AstKind::Var) return a->name() == b->name();
  return ast_equal(a->left(), b->left()) && ast_equal(a->right(), b->right());
}

// ---------------------------------------------------------------------------
// VarMap: insertion-ordered variable-name -> description map.

class VarMap {
public:
  VarMap() = default;

  // Inserts or overwrites; insertion order of first appearance is preserved.
  // Descriptions are single-line: the text form is one `name: description`
  // line per entry, so embedded line breaks flatten to spaces.
  void set(const std::string& name, std::string description) {
    if (!is_identifier(name)) throw Error("VarMap key is not a canonical identifier: \"" + name + "\"");
    for (char& c : description) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    for (auto& e : entries_) {
      if (e.first == name) {
        e.second = std::move(description);
        return;
      }
    }
    entries_.emplace_back(name, std::move(description));
  }

  bool contains(const std::string& name) const { return find(name) != nullptr; }

  std::optional<std::string> get(const std::string& name) const {
    const auto* e = find(name);
    if (!e) return std::nullopt;
    return e->second;
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.first);
    return out;
  }

  bool operator==(const VarMap& o) const { return entries_ == o.entries_; }

  // One "name: description" line per entry, '\n'-separated.
  std::string to_text() const {
    std::string out;
    for (const auto& e : entries_) {
      out += e.first;
      out += ": ";
      out += e.second;
      out += "\n";
    }
    return out;
  }

  // Parses the to_text format; blank lines and lines without a colon or with a
  // non-identifier key are skipped.
  static VarMap parse_text(std::string_view text) {
    VarMap m;
    for (const auto& line : split_lines(text)) {
      const std::size_t colon = line.find(':');
      if (colon == std::string::npos) continue;
      const std::string name = trim(line.substr(0, colon));
      if (!is_identifier(name)) continue;
      m.set(name, trim(line.substr(colon + 1)));
    }
    return m;
  }

private:
  const std::pair<std::string, std::string>* find(const std::string& name) const {
    for (const auto& e : entries_) {
      if (e.first == name) return &e;
    }
    return nullptr;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
};

// ---------------------------------------------------------------------------
// Source-text rewrites

// x(i,j) -> x_i_j for non-negative integers i, j; whitespace inside the
// parentheses is tolerated. Pure substring rewrite, idempotent.
inline std::string canonicalize_indexed_vars(const std::string& formula_text) {
  static const std::regex pat(R"(x\(\s*([0-9]+)\s*,\s*([0-9]+)\s*\))");
  return std::regex_replace(formula_text, pat, "x_$1_$2");
}

// Maps operator aliases onto the canonical set {!, &, |, ->, <->}.
// A standalone `V` token (non-identifier characters on both sides) reads as
// OR; a `V` embedded in an identifier is left alone. Idempotent.
inline std::string normalize_symbols(const std::string& formula_text) {
  std::string s = formula_text;
  s = replace_all(std::move(s), "¬", "!");   // ¬
  s = replace_all(std::move(s), "∧", "&");   // ∧
  s = replace_all(std::move(s), "∨", "|");   // ∨
  s = replace_all(std::move(s), "↔", "<->"); // ↔
  s = replace_all(std::move(s), "→", "->");  // →
  s = replace_all(std::move(s), "<=>", "<->");
  s = replace_all(std::move(s), "=>", "->");
  s = replace_all(std::move(s), "~", "!");

  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 'V') {
      const bool left_free = (i == 0) || !is_ident_char(s[i - 1]);
      const bool right_free = (i + 1 == s.size()) || !is_ident_char(s[i + 1]);
      if (left_free && right_free) {
        out += '|';
        continue;
      }
    }
    out += s[i];
  }

  // Doubled ASCII forms collapse last so `|` characters minted above merge.
  out = replace_all(std::move(out), "&&", "&");
  out = replace_all(std::move(out), "||", "|");
  return out;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace detail {

inline std::string lex_snippet(std::string_view s, std::size_t pos) {
  return std::string(s.substr(pos, std::min<std::size_t>(8, s.size() - pos)));
}

}  // namespace detail

// Expects canonical symbols (post normalize_symbols). Multi-character
// operators lex greedily: `<->` before `->`.
inline std::vector<Token> tokenize(const std::string& formula_text) {
  std::vector<Token> toks;
  const std::string_view s = formula_text;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (is_space_char(c)) {
      ++i;
      continue;
    }
    if (is_ident_char(c)) {
      std::size_t j = i;
      while (j < s.size() && is_ident_char(s[j])) ++j;
      std::string word(s.substr(i, j - i));
      if (!is_identifier(word)) throw LexError(i, detail::lex_snippet(s, i));
      toks.push_back({TokenKind::VAR, std::move(word), i});
      i = j;
      continue;
    }
    switch (c) {
      case '!':
        toks.push_back({TokenKind::NOT, "!", i});
        ++i;
        continue;
      case '&':
        toks.push_back({TokenKind::AND, "&", i});
        ++i;
        continue;
      case '|':
        toks.push_back({TokenKind::OR, "|", i});
        ++i;
        continue;
      case '(':
        toks.push_back({TokenKind::LPAREN, "(", i});
        ++i;
        continue;
      case ')':
        toks.push_back({TokenKind::RPAREN, ")", i});
        ++i;
        continue;
      case '-':
        if (i + 1 < s.size() && s[i + 1] == '>') {
          toks.push_back({TokenKind::IMPLIES, "->", i});
          i += 2;
          continue;
        }
        throw LexError(i, detail::lex_snippet(s, i));
      case '<':
        if (i + 2 < s.size() && s[i + 1] == '-' && s[i + 2] == '>') {
          toks.push_back({TokenKind::IFF, "<->", i});
          i += 3;
          continue;
        }
        throw LexError(i, detail::lex_snippet(s, i));
      default:
        throw LexError(i, detail::lex_snippet(s, i));
    }
  }
  return toks;
}

// ---------------------------------------------------------------------------
// Shunting-yard

namespace detail {

inline int precedence(TokenKind k) {
  switch (k) {
    case TokenKind::NOT: return 5;
    case TokenKind::AND: return 4;
    case TokenKind::OR: return 3;
    case TokenKind::IMPLIES: return 2;
    case TokenKind::IFF: return 1;
    default: return 0;
  }
}

inline bool is_operator(TokenKind k) {
  return k == TokenKind::NOT || k == TokenKind::AND || k == TokenKind::OR ||
         k == TokenKind::IMPLIES || k == TokenKind::IFF;
}

inline bool right_associative(TokenKind k) {
  return k == TokenKind::NOT || k == TokenKind::IMPLIES;
}

inline std::string describe(const Token& t) {
  return "\"" + t.lexeme + "\" at offset " + std::to_string(t.position);
}

}  // namespace detail

// Infix to RPN. Validates operand/operator alternation so arity violations
// surface here rather than as stack underflows later.
inline std::vector<Token> to_rpn(const std::vector<Token>& tokens) {
  std::vector<Token> output;
  std::vector<Token> stack;
  bool expect_operand = true;

  for (const Token& tok : tokens) {
    switch (tok.kind) {
      case TokenKind::VAR:
        if (!expect_operand) throw ParseError("unexpected operand " + detail::describe(tok));
        output.push_back(tok);
        expect_operand = false;
        break;
      case TokenKind::NOT:
        if (!expect_operand) throw ParseError("unexpected \"!\" after operand at offset " + std::to_string(tok.position));
        stack.push_back(tok);
        break;
      case TokenKind::AND:
      case TokenKind::OR:
      case TokenKind::IMPLIES:
      case TokenKind::IFF: {
        if (expect_operand) throw ParseError("operator " + detail::describe(tok) + " is missing a left operand");
        const int p = detail::precedence(tok.kind);
        while (!stack.empty() && detail::is_operator(stack.back().kind)) {
          const int q = detail::precedence(stack.back().kind);
          const bool pop = detail::right_associative(tok.kind) ? (p < q) : (p <= q);
          if (!pop) break;
          output.push_back(stack.back());
          stack.pop_back();
        }
        stack.push_back(tok);
        expect_operand = true;
        break;
      }
      case TokenKind::LPAREN:
        if (!expect_operand) throw ParseError("unexpected \"(\" after operand at offset " + std::to_string(tok.position));
        stack.push_back(tok);
        break;
      case TokenKind::RPAREN: {
        if (expect_operand) throw ParseError("unexpected \")\" at offset " + std::to_string(tok.position));
        bool matched = false;
        while (!stack.empty()) {
          if (stack.back().kind == TokenKind::LPAREN) {
            stack.pop_back();
            matched = true;
            break;
          }
          output.push_back(stack.back());
          stack.pop_back();
        }
        if (!matched) throw ParseError("unmatched \")\" at offset " + std::to_string(tok.position));
        break;
      }
    }
  }

  if (expect_operand) {
    throw ParseError(tokens.empty() ? "empty input" : "input ends with a dangling operator");
  }
  while (!stack.empty()) {
    if (stack.back().kind == TokenKind::LPAREN) {
      throw ParseError("unclosed \"(\" at offset " + std::to_string(stack.back().position));
    }
    output.push_back(stack.back());
    stack.pop_back();
  }
  return output;
}

// Stack evaluation of an RPN stream into an AST.
inline AstPtr rpn_to_ast(const std::vector<Token>& rpn) {
  std::vector<AstPtr> stack;
  auto pop = [&stack](const Token& t) {
    if (stack.empty()) throw ParseError("operator " + detail::describe(t) + " underflows the operand stack");
    AstPtr top = std::move(stack.back());
    stack.pop_back();
    return top;
  };

  for (const Token& tok : rpn) {
    switch (tok.kind) {
      case TokenKind::VAR:
        stack.push_back(Ast::var(tok.lexeme));
        break;
      case TokenKind::NOT:
        stack.push_back(Ast::negation(pop(tok)));
        break;
      case TokenKind::AND:
      case TokenKind::OR:
      case TokenKind::IMPLIES:
      case TokenKind::IFF: {
        AstPtr rhs = pop(tok);
        AstPtr lhs = pop(tok);
        switch (tok.kind) {
          case TokenKind::AND: stack.push_back(Ast::conjunction(std::move(lhs), std::move(rhs))); break;
          case TokenKind::OR: stack.push_back(Ast::disjunction(std::move(lhs), std::move(rhs))); break;
          case TokenKind::IMPLIES: stack.push_back(Ast::implication(std::move(lhs), std::move(rhs))); break;
          default: stack.push_back(Ast::biconditional(std::move(lhs), std::move(rhs))); break;
        }
        break;
      }
      default:
        throw ParseError("parenthesis token reached RPN evaluation");
    }
  }
  if (stack.size() != 1) {
    throw ParseError("RPN stream left " + std::to_string(stack.size()) + " operands on the stack");
  }
  return stack.back();
}

// ---------------------------------------------------------------------------
// Full parse pipeline

struct ParseResult {
  AstPtr ast;
  // Distinct variable names in first-occurrence order.
  std::vector<std::string> variables;
};

inline ParseResult parse(const std::string& formula_text) {
  const std::string canonical = normalize_symbols(canonicalize_indexed_vars(formula_text));
  const std::vector<Token> toks = tokenize(canonical);
  ParseResult result;
  result.ast = rpn_to_ast(to_rpn(toks));
  for (const Token& t : toks) {
    if (t.kind != TokenKind::VAR) continue;
    bool seen = false;
    for (const auto& v : result.variables) {
      if (v == t.lexeme) {
        seen = true;
        break;
      }
    }
    if (!seen) result.variables.push_back(t.lexeme);
  }
  return result;
}

namespace detail {

// Distinct variable names in first-occurrence (in-order traversal) order.
inline void collect_vars(const AstPtr& node, std::vector<std::string>& out) {
  if (node->kind() == AstKind::Var) {
    for (const auto& v : out)
      if (v == node->name()) return;
    out.push_back(node->name());
    return;
  }
  if (node->left()) collect_vars(node->left(), out);
  if (node->right()) collect_vars(node->right(), out);
}

}  // namespace detail

// Fully parenthesized canonical text; parse(render(t)) is structurally equal
// to t.
inline std::string render(const AstPtr& ast) {
  switch (ast->kind()) {
    case AstKind::Var:
      return ast->name();
    case AstKind::Not:
      return "!" + render(ast->left());
    case AstKind::And:
      return "(" + render(ast->left()) + " & " + render(ast->right()) + ")";
    case AstKind::Or:
      return "(" + render(ast->left()) + " | " + render(ast->right()) + ")";
    case AstKind::Implies:
      return "(" + render(ast->left()) + " -> " + render(ast->right()) + ")";
    case AstKind::Iff:
      return "(" + render(ast->left()) + " <-> " + render(ast->right()) + ")";
  }
  throw Error("unreachable AST kind");
}

}  // namespace veritrans
