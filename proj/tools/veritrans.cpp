// veritrans: batch CLI over the translation pipeline.
//
// Subcommands: translate, roundtrip, compile, solve, pipeline, sweep, score,
// stats, replay. See README.md for the dataset schema and config format.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "veritrans/config.hpp"
#include "veritrans/csv.hpp"
#include "veritrans/digest.hpp"
#include "veritrans/pipeline.hpp"
#include "veritrans/stats.hpp"
#include "veritrans/translator.hpp"

namespace {

using namespace veritrans;

Config load_config(const std::string& path) {
  if (path.empty()) return Config{};
  return Config::load(path);
}

std::string read_text_file(const std::string& path);

std::unique_ptr<Translator> make_translator(const Config& config) {
  PromptTemplates templates;
  if (!config.prompt_nl2pl_system_file.empty()) {
    templates.nl2pl_system = read_text_file(config.prompt_nl2pl_system_file);
  }
  if (!config.prompt_pl2nl_system_file.empty()) {
    templates.pl2nl_system = read_text_file(config.prompt_pl2nl_system_file);
  }
  if (config.translator_mode == "http") return std::make_unique<HttpTranslator>(config.llm, templates);
  return std::make_unique<OfflineTranslator>(templates);
}

std::unique_ptr<ArtifactLogger> make_logger(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_unique<ArtifactLogger>(path);
}

void print_summary(const char* stage, const StageSummary& s) {
  std::printf("%s: %zu rows (%zu ok, %zu skipped, %zu unparseable, %zu errors)\n", stage, s.total, s.ok,
              s.skipped, s.unparseable, s.errors);
}

std::string fmt_ratio(double value) {
  if (std::isnan(value)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

// Conventional Cliff's delta magnitude labels.
const char* delta_label(double delta) {
  const double d = std::fabs(delta);
  if (d < 0.147) return "negligible";
  if (d < 0.33) return "small";
  if (d < 0.474) return "medium";
  return "large";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_sweep_csv(const std::string& path, const std::vector<SweepPoint>& sim_points,
                     const std::vector<SweepPoint>& full_points) {
  CsvTable table;
  table.header = {"tau",           "coverage",      "accuracy",      "accepted_count",
                  "full_coverage", "full_accuracy", "full_accepted", "total_count"};
  for (std::size_t i = 0; i < sim_points.size(); ++i) {
    const auto& sp = sim_points[i];
    const auto& fp = full_points[i];
    auto acc = [](double a) { return std::isnan(a) ? std::string() : format_double(a); };
    table.rows.push_back({format_double(sp.tau), format_double(sp.coverage), acc(sp.accuracy),
                          std::to_string(sp.accepted_count), format_double(fp.coverage), acc(fp.accuracy),
                          std::to_string(fp.accepted_count), std::to_string(sp.total_count)});
  }
  write_csv_file(path, table);
}

int run_replay_verification(const std::string& path) {
  std::size_t checked = 0, mismatches = 0;
  const std::string text = read_text_file(path);
  if (path.size() > 4 && path.substr(path.size() - 4) == ".csv") {
    const auto rows = stage_rows_from_csv(read_csv(text));
    for (const auto& row : rows) {
      if (row.cnf_dimacs.empty() || trim(row.generated_formula).empty()) continue;
      ++checked;
      if (replay_formula(row.generated_formula) != row.cnf_dimacs) {
        ++mismatches;
        std::printf("MISMATCH %s\n", row.record.id.c_str());
      }
    }
  } else {
    for (const std::string& line : split_lines(text)) {
      if (trim(line).empty()) continue;
      const auto entry = nlohmann::json::parse(line);
      if (entry.value("stage", "") != "pl2cnf") continue;
      ++checked;
      const std::string dimacs = replay_formula(entry.at("formula").get<std::string>());
      if (sha256_hex(dimacs) != entry.at("cnf_sha256").get<std::string>()) {
        ++mismatches;
        std::printf("MISMATCH %s\n", entry.value("item_id", "?").c_str());
      }
    }
  }
  std::printf("replay: %zu formulas checked, %zu mismatches\n", checked, mismatches);
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NL -> PL -> CNF -> SAT translation pipeline with round-trip validation"};
  app.require_subcommand(1);

  std::string config_path, log_path, dataset_path, in_path, out_path, formula, dimacs_path, column = "similarity";
  std::string gate = "both", json_path, taus_arg;
  double tau_min = 60.0, tau_max = 95.0, tau_step = 5.0;
  long budget = 10'000'000;
  std::size_t resamples = 10000;
  std::uint64_t seed_opt = 42;
  bool show_model = false, hash_only = false;

  // translate ---------------------------------------------------------------
  auto* cmd_translate = app.add_subcommand("translate", "Stage 1: NL -> PL over a dataset CSV");
  cmd_translate->add_option("--dataset", dataset_path, "input dataset CSV")->required();
  cmd_translate->add_option("--out", out_path, "output stage CSV")->required();
  cmd_translate->add_option("--config", config_path, "config file");
  cmd_translate->add_option("--log", log_path, "artifact log (JSONL, appended)");
  cmd_translate->callback([&] {
    const Config config = load_config(config_path);
    const auto records = load_dataset(read_csv_file(dataset_path), config);
    auto translator = make_translator(config);
    auto logger = make_logger(log_path);
    auto rows = run_stage1(records, *translator, logger.get(), config.workers);
    write_csv_file(out_path, stage_rows_to_csv(rows));
    print_summary("stage1", summarize_rows(rows));
  });

  // roundtrip ---------------------------------------------------------------
  auto* cmd_roundtrip = app.add_subcommand("roundtrip", "Stage 2: PL -> NL reconstruction and similarity");
  cmd_roundtrip->add_option("--in", in_path, "stage-1 CSV")->required();
  cmd_roundtrip->add_option("--out", out_path, "output stage CSV")->required();
  cmd_roundtrip->add_option("--config", config_path, "config file");
  cmd_roundtrip->add_option("--log", log_path, "artifact log (JSONL, appended)");
  cmd_roundtrip->callback([&] {
    const Config config = load_config(config_path);
    auto rows = stage_rows_from_csv(read_csv_file(in_path));
    auto translator = make_translator(config);
    auto logger = make_logger(log_path);
    TfidfOptions tfidf{config.tfidf_remove_stopwords};
    run_stage2(rows, *translator, logger.get(), tfidf, config.workers);
    write_csv_file(out_path, stage_rows_to_csv(rows));
    print_summary("stage2", summarize_rows(rows));
  });

  // compile -----------------------------------------------------------------
  auto* cmd_compile = app.add_subcommand("compile", "Stage 3 without solving: PL -> DIMACS CNF");
  cmd_compile->add_option("--formula", formula, "formula text");
  cmd_compile->add_option("--in", in_path, "stage CSV to compile in batch");
  cmd_compile->add_option("--out", out_path, "output file (DIMACS for --formula, CSV for --in)");
  cmd_compile->callback([&] {
    if (!formula.empty()) {
      const std::string dimacs = replay_formula(formula);
      if (out_path.empty()) std::fputs(dimacs.c_str(), stdout);
      else write_text_file(out_path, dimacs);
      return;
    }
    if (in_path.empty()) throw CLI::ValidationError("compile", "provide --formula or --in");
    auto rows = stage_rows_from_csv(read_csv_file(in_path));
    for (auto& row : rows) {
      if (trim(row.generated_formula).empty()) {
        if (row.status == RowStatus::OK) row.status = RowStatus::SKIPPED_EMPTY;
        continue;
      }
      try {
        row.cnf_dimacs = to_dimacs(compile_formula(row.generated_formula).cnf);
      } catch (const Error& e) {
        row.status = RowStatus::ERROR;
        row.status_detail = e.what();
      }
    }
    if (out_path.empty()) throw CLI::ValidationError("compile", "batch mode needs --out");
    write_csv_file(out_path, stage_rows_to_csv(rows));
    print_summary("compile", summarize_rows(rows));
  });

  // solve -------------------------------------------------------------------
  auto* cmd_solve = app.add_subcommand("solve", "Decide satisfiability of a DIMACS file");
  cmd_solve->add_option("--dimacs", dimacs_path, "DIMACS CNF file")->required();
  cmd_solve->add_flag("--model", show_model, "print the model on SAT");
  cmd_solve->add_option("--budget", budget, "decision budget");
  cmd_solve->callback([&] {
    const CnfClauseSet cnf = parse_dimacs(read_text_file(dimacs_path));
    const SolveResult result = solve(cnf, SolveOptions{budget});
    std::printf("%s\n", to_string(result.status).c_str());
    std::printf("c decisions %ld propagations %ld\n", result.decisions, result.propagations);
    if (show_model && result.status == SatStatus::SAT) {
      for (const auto& [id, value] : result.model) {
        std::printf("v %s=%s\n", cnf.name_of(id).c_str(), value ? "true" : "false");
      }
    }
  });

  // pipeline ----------------------------------------------------------------
  auto* cmd_pipeline = app.add_subcommand("pipeline", "All three stages over a dataset CSV");
  std::string out_dir;
  cmd_pipeline->add_option("--dataset", dataset_path, "input dataset CSV")->required();
  cmd_pipeline->add_option("--out-dir", out_dir, "output directory")->required();
  cmd_pipeline->add_option("--config", config_path, "config file");
  cmd_pipeline->callback([&] {
    const Config config = load_config(config_path);
    std::filesystem::create_directories(out_dir);
    const auto records = load_dataset(read_csv_file(dataset_path), config);
    auto translator = make_translator(config);
    ArtifactLogger logger(out_dir + "/artifacts.jsonl");

    auto rows = run_stage1(records, *translator, &logger, config.workers);
    write_csv_file(out_dir + "/stage1.csv", stage_rows_to_csv(rows));
    print_summary("stage1", summarize_rows(rows));

    TfidfOptions tfidf{config.tfidf_remove_stopwords};
    run_stage2(rows, *translator, &logger, tfidf, config.workers);
    write_csv_file(out_dir + "/stage2.csv", stage_rows_to_csv(rows));
    print_summary("stage2", summarize_rows(rows));

    run_stage3(rows, &logger);
    write_csv_file(out_dir + "/results.csv", stage_rows_to_csv(rows));
    print_summary("stage3", summarize_rows(rows));

    nlohmann::json summary;
    bool have_gold = false;
    for (const auto& row : rows) have_gold = have_gold || row.record.gold_label.has_value();
    if (have_gold) {
      const CorrectnessReport report = score_correctness(rows);
      std::printf("correctness: overall %s (sat %s, unsat %s), %zu unpredicted of %zu\n",
                  fmt_ratio(report.overall).c_str(), fmt_ratio(report.sat_only).c_str(),
                  fmt_ratio(report.unsat_only).c_str(), report.unpredicted, report.total_with_gold);
      summary["correctness"] = {{"overall", report.overall},
                                {"total_with_gold", report.total_with_gold},
                                {"unpredicted", report.unpredicted}};
      if (!std::isnan(report.sat_only)) summary["correctness"]["sat_only"] = report.sat_only;
      if (!std::isnan(report.unsat_only)) summary["correctness"]["unsat_only"] = report.unsat_only;
    }
    const auto points = tau_sweep(rows, {config.tau_default});
    std::printf("acceptance at tau=%g: coverage %s, accuracy %s\n", config.tau_default,
                fmt_ratio(points[0].coverage).c_str(), fmt_ratio(points[0].accuracy).c_str());
    summary["tau"] = config.tau_default;
    summary["coverage"] = points[0].coverage;
    if (!std::isnan(points[0].accuracy)) summary["accuracy"] = points[0].accuracy;

    std::vector<double> sims;
    for (const auto& row : rows)
      if (row.similarity) sims.push_back(*row.similarity);
    if (!sims.empty()) {
      stats::SummarizeOptions opts;
      opts.seed = config.seed;
      const auto dist = stats::summarize(sims, {config.tau_default}, opts);
      const auto mass = dist.mass_at_tau.at(config.tau_default);
      summary["similarity"] = {{"n", dist.n},
                               {"mean", dist.mean},
                               {"median", dist.median},
                               {"ci95_low", dist.ci95_low},
                               {"ci95_high", dist.ci95_high},
                               {"mass_count", mass.first},
                               {"mass_proportion", mass.second}};
      std::printf("similarity: n %zu, mean %.2f, median %.2f, ci95 [%.2f, %.2f]\n", dist.n, dist.mean,
                  dist.median, dist.ci95_low, dist.ci95_high);
    }
    const StageSummary s = summarize_rows(rows);
    summary["rows"] = {{"total", s.total}, {"ok", s.ok}, {"skipped", s.skipped},
                       {"unparseable", s.unparseable}, {"errors", s.errors}};
    write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");
  });

  // sweep -------------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "Reliability-coverage sweep over tau");
  cmd_sweep->add_option("--in", in_path, "results CSV")->required();
  cmd_sweep->add_option("--tau-min", tau_min, "lowest threshold (default 60)");
  cmd_sweep->add_option("--tau-max", tau_max, "highest threshold (default 95)");
  cmd_sweep->add_option("--step", tau_step, "threshold step (default 5)");
  cmd_sweep->add_option("--gate", gate, "sim | full | both (default both)");
  cmd_sweep->add_option("--out", out_path, "write sweep CSV here");
  cmd_sweep->callback([&] {
    const auto rows = stage_rows_from_csv(read_csv_file(in_path));
    const auto taus = tau_range(tau_min, tau_max, tau_step);
    const auto sim_points = tau_sweep(rows, taus, SweepGate::SimilarityOnly);
    const auto full_points = tau_sweep(rows, taus, SweepGate::Full);
    const bool show_sim = gate == "sim" || gate == "both";
    const bool show_full = gate == "full" || gate == "both";
    if (!show_sim && !show_full) throw CLI::ValidationError("sweep", "--gate must be sim, full or both");

    std::printf("%6s", "tau");
    if (show_sim) std::printf("  %9s %9s %9s", "coverage", "accuracy", "accepted");
    if (show_full) std::printf("  %9s %9s %9s", "cov(full)", "acc(full)", "acc(full)#");
    std::printf(" %7s\n", "total");
    for (std::size_t i = 0; i < taus.size(); ++i) {
      std::printf("%6g", taus[i]);
      if (show_sim)
        std::printf("  %9.4f %9s %9zu", sim_points[i].coverage, fmt_ratio(sim_points[i].accuracy).c_str(),
                    sim_points[i].accepted_count);
      if (show_full)
        std::printf("  %9.4f %9s %9zu", full_points[i].coverage, fmt_ratio(full_points[i].accuracy).c_str(),
                    full_points[i].accepted_count);
      std::printf(" %7zu\n", sim_points[i].total_count);
    }
    if (!out_path.empty()) write_sweep_csv(out_path, sim_points, full_points);
  });

  // score -------------------------------------------------------------------
  auto* cmd_score = app.add_subcommand("score", "SAT/UNSAT correctness against gold labels");
  cmd_score->add_option("--in", in_path, "results CSV")->required();
  cmd_score->add_option("--json", json_path, "write the report as JSON");
  cmd_score->callback([&] {
    const auto rows = stage_rows_from_csv(read_csv_file(in_path));
    const CorrectnessReport report = score_correctness(rows);
    std::printf("overall  %s\n", fmt_ratio(report.overall).c_str());
    std::printf("sat      %s\n", fmt_ratio(report.sat_only).c_str());
    std::printf("unsat    %s\n", fmt_ratio(report.unsat_only).c_str());
    std::printf("rows with gold %zu, unpredicted %zu\n", report.total_with_gold, report.unpredicted);
    if (!json_path.empty()) {
      nlohmann::json j = {{"overall", report.overall},
                          {"total_with_gold", report.total_with_gold},
                          {"unpredicted", report.unpredicted}};
      if (!std::isnan(report.sat_only)) j["sat_only"] = report.sat_only;
      if (!std::isnan(report.unsat_only)) j["unsat_only"] = report.unsat_only;
      write_text_file(json_path, j.dump(2) + "\n");
    }
  });

  // stats -------------------------------------------------------------------
  auto* cmd_stats = app.add_subcommand("stats", "Summarize a similarity column");
  std::string compare_path;
  cmd_stats->add_option("--in", in_path, "CSV with a score column")->required();
  cmd_stats->add_option("--column", column, "column name (default similarity)");
  cmd_stats->add_option("--taus", taus_arg, "comma-separated thresholds (default 60,65,...,95)");
  cmd_stats->add_option("--resamples", resamples, "bootstrap resamples (default 10000)");
  cmd_stats->add_option("--seed", seed_opt, "bootstrap seed (default 42)");
  cmd_stats->add_option("--compare", compare_path,
                        "second CSV with the same column: paired Wilcoxon + Cliff's delta");
  cmd_stats->add_option("--json", json_path, "write the summary as JSON");
  cmd_stats->callback([&] {
    auto read_scores = [&](const std::string& path) {
      const CsvTable table = read_csv_file(path);
      const std::size_t col = table.column(column);
      if (col == CsvTable::npos) throw DatasetFormatError("no column named \"" + column + "\"");
      std::vector<double> scores;
      for (const auto& row : table.rows) {
        if (trim(row[col]).empty()) continue;
        scores.push_back(parse_double(row[col]));
      }
      return scores;
    };
    const std::vector<double> scores = read_scores(in_path);
    if (!compare_path.empty()) {
      const std::vector<double> baseline = read_scores(compare_path);
      const auto w = stats::wilcoxon_signed_rank(scores, baseline);
      const double delta = stats::cliffs_delta(scores, baseline);
      std::printf("wilcoxon  W=%g  p=%.3g (%s)  median delta %+g\n", w.w, w.p_value,
                  w.exact ? "exact" : "normal approx", w.median_delta);
      std::printf("cliffs delta  %+.4f (%s)\n", delta, delta_label(delta));
      return;
    }
    std::vector<double> taus;
    if (taus_arg.empty()) {
      taus = tau_range(60, 95, 5);
    } else {
      std::istringstream in(taus_arg);
      std::string item;
      while (std::getline(in, item, ',')) taus.push_back(parse_double(trim(item)));
    }
    stats::SummarizeOptions opts;
    opts.resamples = resamples;
    opts.seed = seed_opt;
    const auto summary = stats::summarize(scores, taus, opts);
    std::printf("n        %zu\n", summary.n);
    std::printf("mean     %.4f\n", summary.mean);
    std::printf("median   %.4f\n", summary.median);
    std::printf("ci95     [%.4f, %.4f]\n", summary.ci95_low, summary.ci95_high);
    std::printf("%6s %8s %10s\n", "tau", "count", "proportion");
    for (const auto& [tau, mass] : summary.mass_at_tau) {
      std::printf("%6g %8zu %10.4f\n", tau, mass.first, mass.second);
    }
    if (!json_path.empty()) {
      nlohmann::json j = {{"n", summary.n},
                          {"mean", summary.mean},
                          {"median", summary.median},
                          {"ci95_low", summary.ci95_low},
                          {"ci95_high", summary.ci95_high}};
      for (const auto& [tau, mass] : summary.mass_at_tau) {
        j["mass_at_tau"].push_back({{"tau", tau}, {"count", mass.first}, {"proportion", mass.second}});
      }
      write_text_file(json_path, j.dump(2) + "\n");
    }
  });

  // replay ------------------------------------------------------------------
  auto* cmd_replay = app.add_subcommand("replay", "Regenerate byte-identical DIMACS from a formula");
  cmd_replay->add_option("--formula", formula, "formula text");
  cmd_replay->add_option("--log", log_path, "verify a results CSV or artifact JSONL instead");
  cmd_replay->add_option("--out", out_path, "write the DIMACS here instead of stdout");
  cmd_replay->add_flag("--hash", hash_only, "print only the SHA-256 of the DIMACS bytes");
  cmd_replay->callback([&] {
    if (!log_path.empty()) {
      std::exit(run_replay_verification(log_path));
    }
    if (formula.empty()) throw CLI::ValidationError("replay", "provide --formula or --log");
    const std::string dimacs = replay_formula(formula);
    if (hash_only) {
      std::printf("%s\n", sha256_hex(dimacs).c_str());
    } else if (out_path.empty()) {
      std::fputs(dimacs.c_str(), stdout);
      std::fprintf(stderr, "c sha256 %s\n", sha256_hex(dimacs).c_str());
    } else {
      write_text_file(out_path, dimacs);
      std::printf("%s\n", sha256_hex(dimacs).c_str());
    }
  });

  try {
    CLI11_PARSE(app, argc, argv);
  } catch (const veritrans::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
