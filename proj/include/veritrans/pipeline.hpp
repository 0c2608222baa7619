#pragma once

// Batch orchestration of the three pipeline stages over CSV datasets, the
// tau-sweep, correctness scoring, per-item artifact logging and byte-exact
// replay of the deterministic stage-3 path.
//
// Batches never abort on a per-item failure: every input row comes back out
// with a status. Output rows are canonicalized by item id before writing, so
// worker-pool scheduling can never change output bytes.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <ctime>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "veritrans/cnf.hpp"
#include "veritrans/config.hpp"
#include "veritrans/csv.hpp"
#include "veritrans/digest.hpp"
#include "veritrans/errors.hpp"
#include "veritrans/formula.hpp"
#include "veritrans/solver.hpp"
#include "veritrans/translator.hpp"
#include "veritrans/validators.hpp"

namespace veritrans {

// ---------------------------------------------------------------------------
// Number formatting: shortest text that round-trips the exact double.

inline std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw Error("double formatting failed");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("not a number: \"" + std::string(text) + "\"");
  }
  return value;
}

inline long parse_long(std::string_view text) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw FormatError("not an integer: \"" + std::string(text) + "\"");
  }
  return value;
}

// ---------------------------------------------------------------------------
// Dataset records

struct SpecRecord {
  std::string id;
  std::string conditions;
  std::string scenario;
  VarMap variable_mapping;
  std::optional<SatStatus> gold_label;
  std::optional<std::string> gold_formula;
};

inline std::optional<SatStatus> parse_sat_label(std::string_view text, const std::string& context) {
  const std::string t = to_lower(trim(text));
  if (t.empty()) return std::nullopt;
  if (t == "sat") return SatStatus::SAT;
  if (t == "unsat") return SatStatus::UNSAT;
  throw DatasetFormatError("bad SAT/UNSAT label \"" + std::string(text) + "\" in " + context);
}

// Applies the config's column mapping; `id` and `conditions` are required,
// everything else optional. Ids must be unique and conditions non-empty.
inline std::vector<SpecRecord> load_dataset(const CsvTable& table, const Config& config = {}) {
  const std::size_t id_col = table.column(config.column("id"));
  const std::size_t cond_col = table.column(config.column("conditions"));
  if (id_col == CsvTable::npos) throw DatasetFormatError("dataset lacks an id column");
  if (cond_col == CsvTable::npos) throw DatasetFormatError("dataset lacks a conditions column");
  const std::size_t scen_col = table.column(config.column("scenario"));
  const std::size_t map_col = table.column(config.column("variable_mapping"));
  const std::size_t gold_col = table.column(config.column("gold_label"));
  const std::size_t formula_col = table.column(config.column("gold_formula"));

  std::vector<SpecRecord> records;
  records.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    SpecRecord rec;
    rec.id = row[id_col];
    rec.conditions = row[cond_col];
    if (trim(rec.conditions).empty()) {
      throw DatasetFormatError("record \"" + rec.id + "\" has empty conditions");
    }
    if (scen_col != CsvTable::npos) rec.scenario = row[scen_col];
    if (map_col != CsvTable::npos) rec.variable_mapping = VarMap::parse_text(row[map_col]);
    if (gold_col != CsvTable::npos) rec.gold_label = parse_sat_label(row[gold_col], "record " + rec.id);
    if (formula_col != CsvTable::npos && !trim(row[formula_col]).empty()) rec.gold_formula = row[formula_col];
    for (const auto& other : records) {
      if (other.id == rec.id) throw DatasetFormatError("duplicate record id \"" + rec.id + "\"");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Stage rows

enum class RowStatus { OK, SKIPPED_EMPTY, UNPARSEABLE, ERROR };

struct StageRow {
  SpecRecord record;
  // stage 1
  std::string generated_formula;
  VarMap generated_mapping;
  std::optional<double> latency_s;
  TokenUsage usage;
  // stage 2
  std::string reconstructed_text;
  std::optional<double> similarity;
  // stage 3
  std::optional<SatStatus> pred_from_script;
  std::string cnf_dimacs;

  RowStatus status = RowStatus::OK;
  std::string status_detail;  // non-empty only for ERROR
};

inline std::string to_string(RowStatus status, const std::string& detail = "") {
  switch (status) {
    case RowStatus::OK: return "OK";
    case RowStatus::SKIPPED_EMPTY: return "SKIPPED_EMPTY";
    case RowStatus::UNPARSEABLE: return "UNPARSEABLE";
    case RowStatus::ERROR: return detail.empty() ? "ERROR" : "ERROR: " + detail;
  }
  return "?";
}

inline const std::vector<std::string>& stage_row_columns() {
  static const std::vector<std::string> columns = {
      "id",           "conditions",        "scenario",          "variable_mapping",
      "gold_label",   "gold_formula",      "generated_formula", "generated_mapping",
      "latency_s",    "prompt_tokens",     "completion_tokens", "total_tokens",
      "reconstructed_text", "similarity",  "pred_from_script",  "cnf_dimacs",
      "status"};
  return columns;
}

inline CsvTable stage_rows_to_csv(const std::vector<StageRow>& rows) {
  CsvTable table;
  table.header = stage_row_columns();
  auto opt_long = [](const std::optional<long>& v) { return v ? std::to_string(*v) : std::string(); };
  auto opt_double = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const StageRow& row : rows) {
    table.rows.push_back({
        row.record.id,
        row.record.conditions,
        row.record.scenario,
        row.record.variable_mapping.to_text(),
        row.record.gold_label ? to_string(*row.record.gold_label) : std::string(),
        row.record.gold_formula.value_or(""),
        row.generated_formula,
        row.generated_mapping.to_text(),
        opt_double(row.latency_s),
        opt_long(row.usage.prompt_tokens),
        opt_long(row.usage.completion_tokens),
        opt_long(row.usage.total_tokens),
        row.reconstructed_text,
        opt_double(row.similarity),
        row.pred_from_script ? to_string(*row.pred_from_script) : std::string(),
        row.cnf_dimacs,
        to_string(row.status, row.status_detail),
    });
  }
  return table;
}

inline std::vector<StageRow> stage_rows_from_csv(const CsvTable& table) {
  auto col = [&](const char* name) { return table.column(name); };
  const std::size_t c_id = col("id"), c_cond = col("conditions"), c_scen = col("scenario"),
                    c_vmap = col("variable_mapping"), c_gold = col("gold_label"),
                    c_goldf = col("gold_formula"), c_genf = col("generated_formula"),
                    c_genm = col("generated_mapping"), c_lat = col("latency_s"),
                    c_pt = col("prompt_tokens"), c_ct = col("completion_tokens"),
                    c_tt = col("total_tokens"), c_rec = col("reconstructed_text"),
                    c_sim = col("similarity"), c_pred = col("pred_from_script"),
                    c_cnf = col("cnf_dimacs"), c_status = col("status");
  if (c_id == CsvTable::npos) throw DatasetFormatError("stage CSV lacks an id column");

  auto cell = [&](const CsvRow& row, std::size_t c) -> std::string {
    return c == CsvTable::npos ? std::string() : row[c];
  };

  std::vector<StageRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& raw : table.rows) {
    StageRow row;
    row.record.id = cell(raw, c_id);
    row.record.conditions = cell(raw, c_cond);
    row.record.scenario = cell(raw, c_scen);
    row.record.variable_mapping = VarMap::parse_text(cell(raw, c_vmap));
    row.record.gold_label = parse_sat_label(cell(raw, c_gold), "row " + row.record.id);
    if (const std::string gf = cell(raw, c_goldf); !gf.empty()) row.record.gold_formula = gf;
    row.generated_formula = cell(raw, c_genf);
    row.generated_mapping = VarMap::parse_text(cell(raw, c_genm));
    if (const std::string v = cell(raw, c_lat); !v.empty()) row.latency_s = parse_double(v);
    if (const std::string v = cell(raw, c_pt); !v.empty()) row.usage.prompt_tokens = parse_long(v);
    if (const std::string v = cell(raw, c_ct); !v.empty()) row.usage.completion_tokens = parse_long(v);
    if (const std::string v = cell(raw, c_tt); !v.empty()) row.usage.total_tokens = parse_long(v);
    row.reconstructed_text = cell(raw, c_rec);
    if (const std::string v = cell(raw, c_sim); !v.empty()) row.similarity = parse_double(v);
    row.pred_from_script = parse_sat_label(cell(raw, c_pred), "row " + row.record.id);
    row.cnf_dimacs = cell(raw, c_cnf);
    const std::string status = cell(raw, c_status);
    if (status.empty() || status == "OK") {
      row.status = RowStatus::OK;
    } else if (status == "SKIPPED_EMPTY") {
      row.status = RowStatus::SKIPPED_EMPTY;
    } else if (status == "UNPARSEABLE") {
      row.status = RowStatus::UNPARSEABLE;
    } else if (status.rfind("ERROR", 0) == 0) {
      row.status = RowStatus::ERROR;
      row.status_detail = status.size() > 7 ? status.substr(7) : "";
    } else {
      throw DatasetFormatError("unknown status \"" + status + "\" in row " + row.record.id);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Artifact logger: append-only JSONL, one writer, timestamped entries.

class ArtifactLogger {
public:
  explicit ArtifactLogger(const std::string& path) : out_(path, std::ios::app | std::ios::binary) {
    if (!out_) throw Error("cannot open artifact log: " + path);
  }

  void log_translation(const std::string& item_id, const std::string& stage, const TranslatorOutput& output) {
    const std::string prompt_text = output.prompt.system_text + "\n" + output.prompt.user_text;
    nlohmann::json entry = {
        {"item_id", item_id},
        {"stage", stage},
        {"prompt_sha256", sha256_hex(prompt_text)},
        {"prompt_text", prompt_text},
        {"response_text", output.response_body},
        {"latency_s", output.latency_s},
        {"prompt_tokens", output.usage.prompt_tokens ? nlohmann::json(*output.usage.prompt_tokens)
                                                     : nlohmann::json(nullptr)},
        {"completion_tokens", output.usage.completion_tokens
                                  ? nlohmann::json(*output.usage.completion_tokens)
                                  : nlohmann::json(nullptr)},
        {"total_tokens",
         output.usage.total_tokens ? nlohmann::json(*output.usage.total_tokens) : nlohmann::json(nullptr)},
    };
    write(std::move(entry));
  }

  void log_compile(const std::string& item_id, const std::string& formula, const std::string& dimacs,
                   const std::optional<SatStatus>& pred) {
    nlohmann::json entry = {
        {"item_id", item_id},
        {"stage", "pl2cnf"},
        {"formula", formula},
        {"cnf_sha256", sha256_hex(dimacs)},
        {"pred", pred ? nlohmann::json(to_string(*pred)) : nlohmann::json(nullptr)},
    };
    write(std::move(entry));
  }

private:
  void write(nlohmann::json entry) {
    entry["timestamp"] = timestamp();
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << entry.dump() << "\n";
    out_.flush();
  }

  static std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

  std::ofstream out_;
  std::mutex mutex_;
};

// ---------------------------------------------------------------------------
// Stage runners

struct StageSummary {
  std::size_t total = 0;
  std::size_t ok = 0;
  std::size_t skipped = 0;
  std::size_t unparseable = 0;
  std::size_t errors = 0;
};

inline StageSummary summarize_rows(const std::vector<StageRow>& rows) {
  StageSummary s;
  s.total = rows.size();
  for (const auto& row : rows) {
    switch (row.status) {
      case RowStatus::OK: ++s.ok; break;
      case RowStatus::SKIPPED_EMPTY: ++s.skipped; break;
      case RowStatus::UNPARSEABLE: ++s.unparseable; break;
      case RowStatus::ERROR: ++s.errors; break;
    }
  }
  return s;
}

namespace detail {

// Runs fn(i) for i in [0, n) on up to `workers` threads. fn must confine its
// writes to slot i.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  const std::size_t pool = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (pool <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(pool);
  for (std::size_t t = 0; t < pool; ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& thread : threads) thread.join();
}

inline void sort_by_id(std::vector<StageRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const StageRow& a, const StageRow& b) { return a.record.id < b.record.id; });
}

}  // namespace detail

// Stage 1: prompt, translate, extract. Extraction failure marks the row
// UNPARSEABLE with an empty formula; nothing aborts the batch.
inline std::vector<StageRow> run_stage1(const std::vector<SpecRecord>& records, Translator& translator,
                                        ArtifactLogger* logger = nullptr, int workers = 1) {
  std::vector<StageRow> rows(records.size());
  std::mutex log_mutex;
  detail::parallel_for(records.size(), workers, [&](std::size_t i) {
    StageRow& row = rows[i];
    row.record = records[i];
    try {
      TranslationRequest request{records[i].scenario, records[i].variable_mapping, records[i].conditions,
                                 records[i].gold_formula};
      const TranslatorOutput output = translator.translate_to_logic(request);
      row.latency_s = output.latency_s;
      row.usage = output.usage;
      auto [mapping, formula] = extract_mapping_and_formula(output.raw_text);
      if (mapping) row.generated_mapping = *mapping;
      if (formula) {
        row.generated_formula = *formula;
        row.status = RowStatus::OK;
      } else {
        row.status = RowStatus::UNPARSEABLE;
      }
      if (logger) {
        std::lock_guard<std::mutex> lock(log_mutex);
        logger->log_translation(row.record.id, "nl2pl", output);
      }
    } catch (const std::exception& e) {
      row.status = RowStatus::ERROR;
      row.status_detail = e.what();
    }
  });
  detail::sort_by_id(rows);
  return rows;
}

// Stage 2: merge mappings (generated entries win), reconstruct, score.
// Rows with an empty formula are skipped; empty reconstructions score 0 and
// are marked UNPARSEABLE.
inline void run_stage2(std::vector<StageRow>& rows, Translator& translator, ArtifactLogger* logger = nullptr,
                       const TfidfOptions& tfidf = {}, int workers = 1) {
  std::mutex log_mutex;
  detail::parallel_for(rows.size(), workers, [&](std::size_t i) {
    StageRow& row = rows[i];
    if (trim(row.generated_formula).empty()) {
      if (row.status == RowStatus::OK) row.status = RowStatus::SKIPPED_EMPTY;
      return;
    }
    try {
      VarMap merged = row.record.variable_mapping;
      for (const auto& [name, desc] : row.generated_mapping) merged.set(name, desc);
      const TranslatorOutput output = translator.reconstruct(merged, row.generated_formula);
      if (logger) {
        std::lock_guard<std::mutex> lock(log_mutex);
        logger->log_translation(row.record.id, "pl2nl", output);
      }
      const std::string reconstruction = extract_reconstruction(output.raw_text);
      row.reconstructed_text = reconstruction;
      if (trim(reconstruction).empty()) {
        row.similarity = 0.0;
        row.status = RowStatus::UNPARSEABLE;
        return;
      }
      try {
        row.similarity = roundtrip_similarity(row.record.conditions, reconstruction, tfidf).value;
      } catch (const EmptyTextError&) {
        row.similarity = 0.0;
        row.status = RowStatus::UNPARSEABLE;
      }
    } catch (const std::exception& e) {
      row.status = RowStatus::ERROR;
      row.status_detail = e.what();
    }
  });
  detail::sort_by_id(rows);
}

// Stage 3: the fully deterministic PL -> CNF -> SAT path. Unparseable
// formulas are marked ERROR; solver budget exhaustion keeps the DIMACS but
// leaves the prediction absent.
inline void run_stage3(std::vector<StageRow>& rows, ArtifactLogger* logger = nullptr,
                       const SolveOptions& solve_options = {}) {
  for (StageRow& row : rows) {
    if (trim(row.generated_formula).empty()) {
      if (row.status == RowStatus::OK) row.status = RowStatus::SKIPPED_EMPTY;
      continue;
    }
    try {
      const CompileResult compiled = compile_formula(row.generated_formula);
      row.cnf_dimacs = to_dimacs(compiled.cnf);
      const SolveResult solved = solve(compiled.cnf, solve_options);
      row.pred_from_script = solved.status;
      if (logger) logger->log_compile(row.record.id, row.generated_formula, row.cnf_dimacs, row.pred_from_script);
    } catch (const std::exception& e) {
      row.status = RowStatus::ERROR;
      row.status_detail = e.what();
      if (!row.cnf_dimacs.empty() && logger) {
        logger->log_compile(row.record.id, row.generated_formula, row.cnf_dimacs, row.pred_from_script);
      }
    }
  }
  detail::sort_by_id(rows);
}

// ---------------------------------------------------------------------------
// tau sweep

struct SweepPoint {
  double tau = 0.0;
  double coverage = 0.0;
  // SAT/UNSAT accuracy over accepted rows carrying gold labels; NaN when no
  // accepted row has one.
  double accuracy = std::numeric_limits<double>::quiet_NaN();
  std::size_t accepted_count = 0;
  std::size_t total_count = 0;
};

enum class SweepGate {
  SimilarityOnly,  // similarity >= tau
  Full             // similarity >= tau plus every structural validator
};

inline std::vector<double> tau_range(double tau_min, double tau_max, double step) {
  if (step <= 0.0) throw RangeError("tau sweep step must be positive");
  std::vector<double> taus;
  for (double tau = tau_min; tau <= tau_max + 1e-9; tau += step) taus.push_back(tau);
  return taus;
}

// One SweepPoint per tau. Rows without a usable similarity (UNPARSEABLE,
// SKIPPED_EMPTY, ERROR) count in total_count and are never accepted.
inline std::vector<SweepPoint> tau_sweep(const std::vector<StageRow>& rows, const std::vector<double>& taus,
                                         SweepGate gate = SweepGate::SimilarityOnly) {
  if (rows.empty()) throw EmptyInputError("tau sweep over an empty result set");
  if (taus.empty()) throw EmptyInputError("tau sweep needs at least one threshold");

  struct Item {
    bool scoreable;
    double similarity;
    bool structural_ok;
    std::optional<SatStatus> pred;
    std::optional<SatStatus> gold;
  };
  std::vector<Item> items;
  items.reserve(rows.size());
  for (const StageRow& row : rows) {
    Item item;
    item.scoreable = row.similarity.has_value() && row.status == RowStatus::OK;
    item.similarity = row.similarity.value_or(0.0);
    item.pred = row.pred_from_script;
    item.gold = row.record.gold_label;
    item.structural_ok = true;
    if (gate == SweepGate::Full && item.scoreable) {
      try {
        const CompileResult compiled = compile_formula(row.generated_formula);
        const StructuralVerdict verdict = structural_check(
            compiled.cnf, compiled.source_vars, row.record.variable_mapping.keys());
        item.structural_ok = verdict.passed();
      } catch (const Error&) {
        item.structural_ok = false;
      }
    }
    items.push_back(item);
  }

  std::vector<SweepPoint> points;
  points.reserve(taus.size());
  for (double tau : taus) {
    SweepPoint point;
    point.tau = tau;
    point.total_count = items.size();
    std::size_t with_gold = 0, correct = 0;
    for (const Item& item : items) {
      const bool accepted = item.scoreable && item.similarity >= tau &&
                            (gate == SweepGate::SimilarityOnly || item.structural_ok);
      if (!accepted) continue;
      ++point.accepted_count;
      if (item.gold) {
        ++with_gold;
        if (item.pred && *item.pred == *item.gold) ++correct;
      }
    }
    point.coverage = static_cast<double>(point.accepted_count) / static_cast<double>(point.total_count);
    if (with_gold > 0) point.accuracy = static_cast<double>(correct) / static_cast<double>(with_gold);
    points.push_back(point);
  }
  return points;
}

// ---------------------------------------------------------------------------
// Correctness scoring

struct CorrectnessReport {
  // Rows with gold labels; rows without predictions count as incorrect in
  // `overall` and are tallied in `unpredicted`.
  double overall = std::numeric_limits<double>::quiet_NaN();
  double sat_only = std::numeric_limits<double>::quiet_NaN();
  double unsat_only = std::numeric_limits<double>::quiet_NaN();
  std::size_t total_with_gold = 0;
  std::size_t unpredicted = 0;
};

inline CorrectnessReport score_correctness(const std::vector<StageRow>& rows) {
  CorrectnessReport report;
  std::size_t correct = 0, sat_total = 0, sat_correct = 0, unsat_total = 0, unsat_correct = 0;
  for (const StageRow& row : rows) {
    if (!row.record.gold_label) continue;
    ++report.total_with_gold;
    const bool has_pred = row.pred_from_script.has_value();
    if (!has_pred) ++report.unpredicted;
    const bool is_correct = has_pred && *row.pred_from_script == *row.record.gold_label;
    if (is_correct) ++correct;
    if (*row.record.gold_label == SatStatus::SAT) {
      ++sat_total;
      if (is_correct) ++sat_correct;
    } else {
      ++unsat_total;
      if (is_correct) ++unsat_correct;
    }
  }
  if (report.total_with_gold == 0) throw EmptyInputError("no rows carry gold labels");
  report.overall = static_cast<double>(correct) / static_cast<double>(report.total_with_gold);
  if (sat_total > 0) report.sat_only = static_cast<double>(sat_correct) / static_cast<double>(sat_total);
  if (unsat_total > 0) report.unsat_only = static_cast<double>(unsat_correct) / static_cast<double>(unsat_total);
  return report;
}

// ---------------------------------------------------------------------------
// Replay

// The deterministic stage-3 path only: formula text in, DIMACS bytes out.
inline std::string replay_formula(const std::string& formula) {
  return to_dimacs(compile_formula(formula).cnf);
}

}  // namespace veritrans
