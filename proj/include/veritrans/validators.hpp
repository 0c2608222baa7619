#pragma once

// Round-trip TF-IDF similarity, structural CNF sanity checks and the
// tau-threshold acceptance policy.
//
// The TF-IDF corpus is exactly the two documents being compared, so a score
// depends on nothing but the pair itself: terms are lowercased maximal
// alphanumeric runs, tf is the raw count, idf(t) = ln((1+N)/(1+df(t))) + 1
// with N = 2, and vectors are L2-normalized.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "veritrans/cnf.hpp"
#include "veritrans/errors.hpp"

namespace veritrans {

struct SimilarityScore {
  double value = 0.0;  // percentage in [0, 100]
};

struct TfidfOptions {
  // Off by default: every term counts.
  bool remove_stopwords = false;
};

// Sparse vector sorted by term (lexicographic), L2-normalized.
using TfidfVector = std::vector<std::pair<std::string, double>>;

namespace detail {

inline const std::array<std::string_view, 28>& stopword_list() {
  static const std::array<std::string_view, 28> words = {
      "a",  "an", "and", "are", "as",   "at",  "be",  "by",  "for", "from", "in",   "is",   "it",  "its",
      "of", "on", "or",  "that", "the", "then", "this", "to", "was", "were", "will", "with", "not", "if"};
  return words;
}

inline bool is_stopword(const std::string& term) {
  const auto& list = stopword_list();
  return std::find(list.begin(), list.end(), term) != list.end();
}

inline std::map<std::string, double> term_counts(std::string_view doc, const TfidfOptions& options) {
  std::map<std::string, double> counts;
  std::string term;
  auto flush = [&] {
    if (term.empty()) return;
    if (!options.remove_stopwords || !is_stopword(term)) counts[term] += 1.0;
    term.clear();
  };
  for (char c : doc) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      term += c;
    } else if (c >= 'A' && c <= 'Z') {
      term += static_cast<char>(c - 'A' + 'a');
    } else {
      flush();
    }
  }
  flush();
  return counts;
}

}  // namespace detail

// TF-IDF vectors for the two-document corpus {doc_a, doc_b}.
inline std::pair<TfidfVector, TfidfVector> tfidf_vectors(std::string_view doc_a, std::string_view doc_b,
                                                         const TfidfOptions& options = {}) {
  const auto counts_a = detail::term_counts(doc_a, options);
  const auto counts_b = detail::term_counts(doc_b, options);
  if (counts_a.empty()) throw EmptyTextError("first document has no terms");
  if (counts_b.empty()) throw EmptyTextError("second document has no terms");

  TfidfVector va, vb;
  double norm_a = 0.0, norm_b = 0.0;
  auto emit = [](TfidfVector& v, const std::string& term, double weight, double& norm) {
    if (weight == 0.0) return;
    v.emplace_back(term, weight);
    norm += weight * weight;
  };

  // std::map iteration gives the lexicographic term order.
  auto ia = counts_a.begin();
  auto ib = counts_b.begin();
  while (ia != counts_a.end() || ib != counts_b.end()) {
    int cmp;
    if (ia == counts_a.end()) cmp = 1;
    else if (ib == counts_b.end()) cmp = -1;
    else cmp = ia->first.compare(ib->first) < 0 ? -1 : (ia->first == ib->first ? 0 : 1);

    const int df = cmp == 0 ? 2 : 1;
    const double idf = std::log(3.0 / (1.0 + df)) + 1.0;  // N = 2 documents
    if (cmp <= 0) {
      emit(va, ia->first, ia->second * idf, norm_a);
      if (cmp == 0) emit(vb, ib->first, ib->second * idf, norm_b);
      ++ia;
      if (cmp == 0) ++ib;
    } else {
      emit(vb, ib->first, ib->second * idf, norm_b);
      ++ib;
    }
  }

  norm_a = std::sqrt(norm_a);
  norm_b = std::sqrt(norm_b);
  for (auto& [term, w] : va) w /= norm_a;
  for (auto& [term, w] : vb) w /= norm_b;
  return {std::move(va), std::move(vb)};
}

// 100 x cosine of the pair's TF-IDF vectors, clamped to [0, 100].
inline SimilarityScore roundtrip_similarity(std::string_view original, std::string_view reconstructed,
                                            const TfidfOptions& options = {}) {
  const auto [va, vb] = tfidf_vectors(original, reconstructed, options);
  if (va == vb) return {100.0};  // identical vectors score exactly 100
  double dot = 0.0;
  auto ia = va.begin();
  auto ib = vb.begin();
  while (ia != va.end() && ib != vb.end()) {
    const int cmp = ia->first.compare(ib->first);
    if (cmp == 0) {
      dot += ia->second * ib->second;
      ++ia;
      ++ib;
    } else if (cmp < 0) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return {std::clamp(100.0 * dot, 0.0, 100.0)};
}

// ---------------------------------------------------------------------------
// Structural validation

struct StructuralVerdict {
  bool well_formed = true;
  bool symbol_coverage_ok = true;
  std::vector<std::string> uncovered_symbols;
  std::vector<std::size_t> tautological_clauses;

  bool passed() const { return well_formed && symbol_coverage_ok && tautological_clauses.empty(); }
};

// well_formed checks CnfClauseSet invariants; uncovered_symbols lists formula
// variables absent from the declared set; tautological_clauses lists clauses
// containing both l and -l.
inline StructuralVerdict structural_check(const CnfClauseSet& cnf, const std::vector<std::string>& formula_vars,
                                          const std::vector<std::string>& declared_vars) {
  StructuralVerdict verdict;
  verdict.well_formed = cnf.well_formed();

  for (const auto& var : formula_vars) {
    if (std::find(declared_vars.begin(), declared_vars.end(), var) == declared_vars.end()) {
      verdict.uncovered_symbols.push_back(var);
    }
  }
  verdict.symbol_coverage_ok = verdict.uncovered_symbols.empty();

  for (std::size_t i = 0; i < cnf.clauses.size(); ++i) {
    const auto& clause = cnf.clauses[i];
    bool tautological = false;
    for (std::size_t a = 0; a < clause.size() && !tautological; ++a) {
      for (std::size_t b = a + 1; b < clause.size(); ++b) {
        if (clause[a] == -clause[b]) {
          tautological = true;
          break;
        }
      }
    }
    if (tautological) verdict.tautological_clauses.push_back(i);
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Acceptance policy

enum class RejectReason { BELOW_TAU, MALFORMED, UNCOVERED_SYMBOLS, TAUTOLOGY, UNPARSEABLE };

inline std::string to_string(RejectReason r) {
  switch (r) {
    case RejectReason::BELOW_TAU: return "BELOW_TAU";
    case RejectReason::MALFORMED: return "MALFORMED";
    case RejectReason::UNCOVERED_SYMBOLS: return "UNCOVERED_SYMBOLS";
    case RejectReason::TAUTOLOGY: return "TAUTOLOGY";
    case RejectReason::UNPARSEABLE: return "UNPARSEABLE";
  }
  return "?";
}

struct AcceptanceDecision {
  bool accepted = false;
  double tau = 0.0;
  SimilarityScore similarity;
  StructuralVerdict structural;
  std::vector<RejectReason> reject_reasons;
};

// Accepts iff similarity >= tau (inclusive) and every structural gate passes;
// reasons enumerate each failed gate.
inline AcceptanceDecision accept(SimilarityScore similarity, const StructuralVerdict& structural, double tau) {
  if (tau < 0.0 || tau > 100.0) {
    throw RangeError("tau must lie in [0, 100], got " + std::to_string(tau));
  }
  AcceptanceDecision decision;
  decision.tau = tau;
  decision.similarity = similarity;
  decision.structural = structural;
  if (similarity.value < tau) decision.reject_reasons.push_back(RejectReason::BELOW_TAU);
  if (!structural.well_formed) decision.reject_reasons.push_back(RejectReason::MALFORMED);
  if (!structural.symbol_coverage_ok) decision.reject_reasons.push_back(RejectReason::UNCOVERED_SYMBOLS);
  if (!structural.tautological_clauses.empty()) decision.reject_reasons.push_back(RejectReason::TAUTOLOGY);
  decision.accepted = decision.reject_reasons.empty();
  return decision;
}

// Pipeline shortcut for items with no usable reconstruction: score 0,
// rejected with UNPARSEABLE.
inline AcceptanceDecision reject_unparseable(double tau) {
  if (tau < 0.0 || tau > 100.0) {
    throw RangeError("tau must lie in [0, 100], got " + std::to_string(tau));
  }
  AcceptanceDecision decision;
  decision.tau = tau;
  decision.similarity = {0.0};
  decision.reject_reasons.push_back(RejectReason::UNPARSEABLE);
  return decision;
}

}  // namespace veritrans
