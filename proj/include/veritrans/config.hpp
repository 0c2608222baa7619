#pragma once

// Key-value configuration file, one `key = value` pair per line, `#` starts a
// comment. Unknown keys are an error so typos surface immediately.
//
// Recognized keys:
//   translator.mode        http | offline            (default offline)
//   llm.endpoint_url       chat-completion endpoint
//   llm.model_name         model identifier string
//   llm.timeout_s          request timeout in seconds
//   llm.max_retries        retries after the first attempt
//   llm.retry_backoff_s    base backoff, doubled per retry
//   llm.api_key_env        env var holding the credential ("" = no credential)
//   tau.default            acceptance threshold
//   workers                worker pool size for stages 1-2
//   seed                   project-wide RNG seed
//   tfidf.remove_stopwords true | false
//   prompt.nl2pl_system_file  file replacing the built-in NL->PL system text
//   prompt.pl2nl_system_file  file replacing the built-in PL->NL system text
//   csv.column.<field>     rename an input dataset column, e.g.
//                          csv.column.conditions = requirement_text

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "veritrans/errors.hpp"
#include "veritrans/text.hpp"
#include "veritrans/translator.hpp"

namespace veritrans {

struct Config {
  std::string translator_mode = "offline";
  LlmConfig llm;
  double tau_default = 75.0;
  int workers = 1;
  std::uint64_t seed = 42;
  bool tfidf_remove_stopwords = false;
  std::string prompt_nl2pl_system_file;
  std::string prompt_pl2nl_system_file;
  // our canonical column name -> name used by the input dataset
  std::map<std::string, std::string> column_map;

  // Dataset column resolution (identity unless remapped).
  std::string column(const std::string& canonical) const {
    auto it = column_map.find(canonical);
    return it == column_map.end() ? canonical : it->second;
  }

  static Config from_text(const std::string& text);
  static Config load(const std::string& path);
};

namespace detail {

inline bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw FormatError("config key " + key + " expects true/false, got \"" + value + "\"");
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  std::istringstream in(value);
  T out{};
  if (!(in >> out) || !(in >> std::ws).eof()) {
    throw FormatError("config key " + key + " expects a number, got \"" + value + "\"");
  }
  return out;
}

}  // namespace detail

inline Config Config::from_text(const std::string& text) {
  Config cfg;
  std::size_t lineno = 0;
  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(lineno) + " is not `key = value`: \"" + raw + "\"");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "translator.mode") {
      if (value != "http" && value != "offline") {
        throw FormatError("translator.mode must be http or offline, got \"" + value + "\"");
      }
      cfg.translator_mode = value;
    } else if (key == "llm.endpoint_url") {
      cfg.llm.endpoint_url = value;
    } else if (key == "llm.model_name") {
      cfg.llm.model_name = value;
    } else if (key == "llm.timeout_s") {
      cfg.llm.timeout_s = detail::parse_number<double>(value, key);
    } else if (key == "llm.max_retries") {
      cfg.llm.max_retries = detail::parse_number<int>(value, key);
    } else if (key == "llm.retry_backoff_s") {
      cfg.llm.retry_backoff_s = detail::parse_number<double>(value, key);
    } else if (key == "llm.api_key_env") {
      cfg.llm.api_key_env_var = value;
    } else if (key == "tau.default") {
      cfg.tau_default = detail::parse_number<double>(value, key);
    } else if (key == "workers") {
      cfg.workers = detail::parse_number<int>(value, key);
      if (cfg.workers < 1) throw FormatError("workers must be >= 1");
    } else if (key == "seed") {
      cfg.seed = detail::parse_number<std::uint64_t>(value, key);
    } else if (key == "tfidf.remove_stopwords") {
      cfg.tfidf_remove_stopwords = detail::parse_bool(value, key);
    } else if (key == "prompt.nl2pl_system_file") {
      cfg.prompt_nl2pl_system_file = value;
    } else if (key == "prompt.pl2nl_system_file") {
      cfg.prompt_pl2nl_system_file = value;
    } else if (key.rfind("csv.column.", 0) == 0) {
      cfg.column_map[key.substr(std::string("csv.column.").size())] = value;
    } else {
      throw FormatError("unknown config key \"" + key + "\"");
    }
  }
  return cfg;
}

inline Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

}  // namespace veritrans
