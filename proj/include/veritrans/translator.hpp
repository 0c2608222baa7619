#pragma once

// NL->PL and PL->NL translation behind one interface, with an HTTP
// chat-completion client (temperature pinned to 0) and a deterministic
// offline verbalizer so the round-trip loop runs without a network.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>

#include "veritrans/errors.hpp"
#include "veritrans/formula.hpp"
#include "veritrans/text.hpp"

namespace veritrans {

// ---------------------------------------------------------------------------
// Configuration and wire types

struct LlmConfig {
  std::string endpoint_url;  // e.g. https://api.openai.com/v1/chat/completions
  std::string model_name;
  double timeout_s = 60.0;
  int max_retries = 3;
  double retry_backoff_s = 0.5;  // doubled per retry
  // Name of the environment variable holding the credential; empty means the
  // endpoint needs none. The key itself never appears in config files.
  std::string api_key_env_var = "VERITRANS_API_KEY";

  // Decoding is part of the determinism contract and not user-overridable.
  static constexpr double temperature = 0.0;
};

enum class Stage { NL2PL, PL2NL };

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  Stage stage = Stage::NL2PL;

  bool operator==(const PromptBundle& o) const {
    return system_text == o.system_text && user_text == o.user_text && stage == o.stage;
  }
};

struct TokenUsage {
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
  std::optional<long> total_tokens;
};

struct TranslatorOutput {
  std::string raw_text;      // assistant message content
  std::optional<std::string> extracted_formula;
  std::optional<VarMap> extracted_mapping;
  double latency_s = 0.0;
  TokenUsage usage;
  PromptBundle prompt;       // exactly what was (or would be) sent
  std::string response_body; // full wire body, for the artifact log
};

// ---------------------------------------------------------------------------
// Prompt construction

// Default system texts. The same texts ship as data files under prompts/ so
// deployments can swap in their own wording (config keys
// prompt.nl2pl_system_file / prompt.pl2nl_system_file) without a rebuild.
inline const std::string& default_nl2pl_system_text() {
  static const std::string text =
      "You translate natural-language requirements into a single propositional logic formula.\n"
      "Rules:\n"
      "1. Use only the declared symbols listed in the variable mapping.\n"
      "2. Make every negation explicit with the ! operator.\n"
      "3. Fully parenthesize the formula instead of relying on operator precedence.\n"
      "Allowed connectives: ! & | -> <->\n"
      "Reply with a \"Mapping:\" section listing one `name: description` line per symbol,\n"
      "then a single line `Formula: <formula>`.\n";
  return text;
}

inline const std::string& default_pl2nl_system_text() {
  static const std::string text =
      "You restate a propositional logic formula in plain English, preserving the logical\n"
      "connectives and the scope of every negation. Use the variable aliases exactly as given.\n"
      "Reply with a section headed exactly \"Reconstructed Conditions:\" followed by the\n"
      "restated requirement.\n";
  return text;
}

struct PromptTemplates {
  std::string nl2pl_system = default_nl2pl_system_text();
  std::string pl2nl_system = default_pl2nl_system_text();
};

// System text encodes the three generation constraints: declared symbols
// only, explicit negation, full parenthesization. User text carries the
// scenario, the serialized mapping and the conditions, in that order.
inline PromptBundle build_nl2pl_prompt(const std::string& scenario, const VarMap& seed_mapping,
                                       const std::string& conditions,
                                       const PromptTemplates& templates = {}) {
  if (trim(conditions).empty()) throw EmptyInputError("conditions text is empty");

  PromptBundle bundle;
  bundle.stage = Stage::NL2PL;
  bundle.system_text = templates.nl2pl_system;

  std::string user = "Scenario:\n" + scenario + "\n\nMapping:\n";
  for (const auto& [name, desc] : seed_mapping) user += name + ": " + desc + "\n";
  user += "\nConditions:\n" + conditions + "\n";
  bundle.user_text = std::move(user);
  return bundle;
}

// Alias lines precede the formula; the reply must carry the extraction anchor
// "Reconstructed Conditions:".
inline PromptBundle build_pl2nl_prompt(const VarMap& mapping, const std::string& formula,
                                       const PromptTemplates& templates = {}) {
  parse(formula);  // ParseError if the formula is invalid

  PromptBundle bundle;
  bundle.stage = Stage::PL2NL;
  bundle.system_text = templates.pl2nl_system;

  std::string user;
  for (const auto& [name, desc] : mapping) user += name + " ↦ " + desc + "\n";
  user += "\nFormula: " + formula + "\n";
  bundle.user_text = std::move(user);
  return bundle;
}

// ---------------------------------------------------------------------------
// Output extraction

namespace detail {

inline std::string strip_decorations(std::string_view line) {
  std::string s = trim(line);
  std::size_t b = 0;
  while (b < s.size() && (s[b] == '#' || s[b] == '*' || s[b] == '-' || s[b] == ' ')) ++b;
  return trim(s.substr(b));
}

inline bool is_mapping_heading(std::string_view line) {
  std::string s = to_lower(strip_decorations(line));
  if (!s.empty() && s.back() == ':') s.pop_back();
  s = trim(s);
  return s == "mapping" || s == "variable mapping";
}

// "name: description" with an optional bullet prefix.
inline std::optional<std::pair<std::string, std::string>> parse_mapping_entry(std::string_view line) {
  std::string s = strip_decorations(line);
  const std::size_t colon = s.find(':');
  if (colon == std::string::npos) return std::nullopt;
  const std::string name = trim(s.substr(0, colon));
  if (!is_identifier(name)) return std::nullopt;
  return std::make_pair(name, trim(s.substr(colon + 1)));
}

// Strips code fences, backticks and trailing sentence punctuation.
inline std::string clean_formula_candidate(std::string_view line) {
  std::string s = trim(line);
  while (!s.empty() && s.front() == '`') s.erase(s.begin());
  while (!s.empty() && (s.back() == '`' || s.back() == '.' || s.back() == ';')) s.pop_back();
  return trim(s);
}

// Splits "Formula: ..." style labels off a candidate line.
inline std::pair<bool, std::string> split_formula_label(const std::string& line) {
  static constexpr std::string_view labels[] = {"formula", "pl", "output", "result"};
  const std::size_t colon = line.find(':');
  if (colon == std::string::npos) return {false, line};
  const std::string head = to_lower(trim(line.substr(0, colon)));
  for (std::string_view label : labels) {
    if (head == label) return {true, trim(line.substr(colon + 1))};
  }
  return {false, line};
}

}  // namespace detail

// Locates a mapping block (lines of `name: description` under a
// "Mapping"-labeled heading) and a formula (first line that parses as
// propositional logic). Components that cannot be located come back absent;
// garbage input never throws.
inline std::pair<std::optional<VarMap>, std::optional<std::string>> extract_mapping_and_formula(
    const std::string& raw) {
  const std::vector<std::string> lines = split_lines(raw);
  std::vector<bool> in_mapping(lines.size(), false);

  std::optional<VarMap> mapping;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!detail::is_mapping_heading(lines[i])) continue;
    VarMap m;
    std::size_t j = i + 1;
    for (; j < lines.size(); ++j) {
      if (trim(lines[j]).empty()) {
        if (m.empty()) continue;  // leading blank under the heading
        break;
      }
      auto entry = detail::parse_mapping_entry(lines[j]);
      if (!entry) break;
      m.set(entry->first, entry->second);
      in_mapping[j] = true;
    }
    if (!m.empty()) {
      in_mapping[i] = true;
      mapping = std::move(m);
      break;
    }
  }

  std::optional<std::string> formula;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (in_mapping[i]) continue;
    const std::string cleaned = detail::clean_formula_candidate(lines[i]);
    if (cleaned.empty()) continue;
    const auto [labeled, candidate] = detail::split_formula_label(cleaned);
    if (candidate.empty()) continue;
    try {
      const std::string canonical = normalize_symbols(canonicalize_indexed_vars(candidate));
      const std::vector<Token> toks = tokenize(canonical);
      rpn_to_ast(to_rpn(toks));
      // A bare identifier only counts when it is explicitly labeled;
      // otherwise any prose word would read as a formula.
      if (labeled || toks.size() > 1) {
        formula = candidate;
        break;
      }
    } catch (const Error&) {
      // not a formula line
    }
  }
  return {std::move(mapping), std::move(formula)};
}

// Lines under the "Reconstructed Conditions:" anchor; empty when the anchor
// is missing.
inline std::string extract_reconstruction(const std::string& raw) {
  static constexpr std::string_view anchor = "Reconstructed Conditions:";
  const std::vector<std::string> lines = split_lines(raw);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string t = trim(lines[i]);
    if (t.rfind(anchor, 0) != 0) continue;
    std::string out = trim(t.substr(anchor.size()));
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (!out.empty()) out += "\n";
      out += lines[j];
    }
    return trim(out);
  }
  return "";
}

// ---------------------------------------------------------------------------
// HTTP chat-completion client

namespace detail {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) throw TransportError("endpoint URL lacks a scheme: " + url);
  const std::size_t slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

inline bool transient_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace detail

// Sends one chat-completion request (system + user messages, temperature 0).
// Transient transport failures (connection errors, timeouts, 429, 5xx) are
// retried with exponential backoff up to max_retries; auth and schema
// problems are never retried.
inline TranslatorOutput call_llm(const LlmConfig& config, const PromptBundle& prompt) {
  std::string api_key;
  if (!config.api_key_env_var.empty()) {
    const char* key = std::getenv(config.api_key_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("credential environment variable " + config.api_key_env_var + " is not set");
    }
    api_key = key;
  }

  const detail::ParsedUrl url = detail::split_url(config.endpoint_url);
  nlohmann::json request = {
      {"model", config.model_name},
      {"temperature", LlmConfig::temperature},
      {"messages",
       {{{"role", "system"}, {"content", prompt.system_text}},
        {{"role", "user"}, {"content", prompt.user_text}}}},
  };
  const std::string body = request.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0 && config.retry_backoff_s > 0.0) {
      const double delay = config.retry_backoff_s * static_cast<double>(1 << (attempt - 1));
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }

    httplib::Client client(url.base);
    const auto timeout = std::chrono::duration<double>(config.timeout_s);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

    const auto start = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(url.path, headers, body, "application/json");
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);

    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;  // transient
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("endpoint rejected the credential (HTTP " + std::to_string(res->status) + ")");
    }
    if (detail::transient_status(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("HTTP " + std::to_string(res->status) + " from endpoint");
    }

    TranslatorOutput out;
    out.prompt = prompt;
    out.latency_s = elapsed.count();
    out.response_body = res->body;
    try {
      const nlohmann::json reply = nlohmann::json::parse(res->body);
      out.raw_text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
      if (reply.contains("usage")) {
        const auto& usage = reply["usage"];
        if (usage.contains("prompt_tokens")) out.usage.prompt_tokens = usage["prompt_tokens"].get<long>();
        if (usage.contains("completion_tokens"))
          out.usage.completion_tokens = usage["completion_tokens"].get<long>();
        if (usage.contains("total_tokens")) out.usage.total_tokens = usage["total_tokens"].get<long>();
      }
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("response body is not a chat completion: ") + e.what());
    }
    return out;
  }
  throw TransportError("request failed after " + std::to_string(config.max_retries + 1) +
                       " attempts; last error: " + last_error);
}

// ---------------------------------------------------------------------------
// Offline verbalization

namespace detail {

inline bool is_binary(const AstPtr& node) { return node->kind() != AstKind::Var && node->kind() != AstKind::Not; }

inline std::string verbalize_node(const AstPtr& node, const VarMap& mapping) {
  auto joined = [&](const char* word) {
    const std::string left = verbalize_node(node->left(), mapping);
    const std::string right = verbalize_node(node->right(), mapping);
    // Comma separation marks the nesting boundary of a compound left side.
    const char* sep = is_binary(node->left()) ? ", " : " ";
    return left + sep + word + " " + right;
  };
  switch (node->kind()) {
    case AstKind::Var:
      return *mapping.get(node->name());
    case AstKind::Not:
      return "it is not the case that " + verbalize_node(node->left(), mapping);
    case AstKind::And:
      return joined("and");
    case AstKind::Or:
      return joined("or");
    case AstKind::Iff:
      return joined("if and only if");
    case AstKind::Implies:
      return "if " + verbalize_node(node->left(), mapping) + ", then " +
             verbalize_node(node->right(), mapping);
  }
  throw Error("unreachable AST kind");
}

}  // namespace detail

// Deterministic template rendering of a formula through its variable
// aliases. Every formula variable must have a mapping entry.
inline std::string verbalize_offline(const AstPtr& formula, const VarMap& mapping) {
  std::vector<std::string> vars;
  detail::collect_vars(formula, vars);
  std::vector<std::string> missing;
  for (const auto& v : vars)
    if (!mapping.contains(v)) missing.push_back(v);
  if (!missing.empty()) throw MissingAliasError(std::move(missing));
  return detail::verbalize_node(formula, mapping);
}

// ---------------------------------------------------------------------------
// Translator interface

struct TranslationRequest {
  std::string scenario;
  VarMap seed_mapping;
  std::string conditions;
  // Consumed only by the offline translator (hermetic replay/demo mode); the
  // HTTP translator ignores it.
  std::optional<std::string> reference_formula;
};

class Translator {
public:
  virtual ~Translator() = default;
  // Stage 1: raw model-shaped output for a dataset record.
  virtual TranslatorOutput translate_to_logic(const TranslationRequest& request) = 0;
  // Stage 2: raw model-shaped reconstruction of a formula.
  virtual TranslatorOutput reconstruct(const VarMap& mapping, const std::string& formula) = 0;
};

class HttpTranslator final : public Translator {
public:
  explicit HttpTranslator(LlmConfig config, PromptTemplates templates = {})
      : config_(std::move(config)), templates_(std::move(templates)) {}

  TranslatorOutput translate_to_logic(const TranslationRequest& request) override {
    return call_llm(config_,
                    build_nl2pl_prompt(request.scenario, request.seed_mapping, request.conditions, templates_));
  }

  TranslatorOutput reconstruct(const VarMap& mapping, const std::string& formula) override {
    return call_llm(config_, build_pl2nl_prompt(mapping, formula, templates_));
  }

private:
  LlmConfig config_;
  PromptTemplates templates_;
};

// Networkless translator: stage 1 echoes the record's reference formula in a
// model-shaped reply (items without one come back unparseable); stage 2 runs
// the deterministic verbalizer.
class OfflineTranslator final : public Translator {
public:
  OfflineTranslator() = default;
  explicit OfflineTranslator(PromptTemplates templates) : templates_(std::move(templates)) {}

  TranslatorOutput translate_to_logic(const TranslationRequest& request) override {
    TranslatorOutput out;
    out.prompt = build_nl2pl_prompt(request.scenario, request.seed_mapping, request.conditions, templates_);
    if (request.reference_formula && !trim(*request.reference_formula).empty()) {
      std::string raw = "Mapping:\n";
      for (const auto& [name, desc] : request.seed_mapping) raw += name + ": " + desc + "\n";
      raw += "\nFormula: " + *request.reference_formula + "\n";
      out.raw_text = std::move(raw);
    } else {
      out.raw_text = "No formula is available for this item.\n";
    }
    out.response_body = out.raw_text;
    return out;
  }

  TranslatorOutput reconstruct(const VarMap& mapping, const std::string& formula) override {
    TranslatorOutput out;
    out.prompt = build_pl2nl_prompt(mapping, formula, templates_);
    const ParseResult parsed = parse(formula);
    out.raw_text = "Reconstructed Conditions:\n" + verbalize_offline(parsed.ast, mapping) + "\n";
    out.response_body = out.raw_text;
    return out;
  }

private:
  PromptTemplates templates_;
};

}  // namespace veritrans
