#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "medsamp/medsamp.hpp"

#ifndef MEDSAMP_VERSION
#define MEDSAMP_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace medsamp;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::string format = "csv";
};

ExperimentConfig load_config(const CommonOptions& o, ExperimentKind kind) {
  std::ifstream in(o.config_path);
  if (!in) throw UsageError("cannot open config '" + o.config_path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  if (!j.contains("experiment"))
    j["experiment"] = to_string(kind);
  else if (j["experiment"] != to_string(kind))
    throw UsageError("config is for '" + j["experiment"].get<std::string>() + "', not '" + to_string(kind) + "'");
  auto cfg = parse_config(j);
  if (o.seed) cfg.seed = *o.seed;
  return cfg;
}

// Writes to <out>/<name>.<ext>, or stdout when no directory is given.
template <class Result>
void emit(const CommonOptions& o, const std::string& name, const Result& r, const OutputHeader& h) {
  const OutputFormat f = parse_format(o.format);
  if (o.out_dir.empty()) {
    write(std::cout, r, f, h);
    return;
  }
  fs::create_directories(o.out_dir);
  const fs::path path = fs::path(o.out_dir) / (name + (f == OutputFormat::csv ? ".csv" : ".json"));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
  write(out, r, f, h);
}

void emit_records(const CommonOptions& o, const SimulationReport& rep, const OutputHeader& h) {
  if (o.out_dir.empty()) return;
  fs::create_directories(o.out_dir);
  const std::size_t E = h.config.estimators.size();
  for (std::size_t k = 0; k < rep.cells.size(); ++k) {
    const auto& c = rep.cells[k];
    if (c.error) continue;
    const fs::path path = fs::path(o.out_dir) / ("simulate-records-n" + std::to_string(c.n) + "-e" +
                                                 std::to_string(k % E) + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    write_csv_header(out, h);
    write_records_csv(out, c.summary.records);
  }
}

void report_row_errors(int code) {
  if (code != kExitOk) std::cerr << "medsamp: some rows failed (exit " << code << "), see the error column\n";
}

int run(ExperimentKind kind, const CommonOptions& o) {
  const ExperimentConfig cfg = load_config(o, kind);
  parse_format(o.format);
  const OutputHeader h{MEDSAMP_VERSION, cfg};
  const std::string name = to_string(kind);
  int code = kExitOk;
  switch (kind) {
    case ExperimentKind::efht_sweep: {
      const auto r = cmd_efht_sweep(cfg, o.threads);
      emit(o, name, r, h);
      code = r.exit_code;
      break;
    }
    case ExperimentKind::simulate: {
      const auto r = cmd_simulate(cfg, o.threads);
      emit(o, name, r, h);
      if (cfg.records) emit_records(o, r, h);
      for (const auto& c : r.cells)
        if (c.truncation_dominated)
          std::cerr << "medsamp: n=" << c.n << ' ' << c.estimator << ": " << c.summary.truncated << " of "
                    << c.summary.replicates << " runs truncated\n";
      code = r.exit_code;
      break;
    }
    case ExperimentKind::accept_matrix: {
      const auto r = cmd_accept_matrix(cfg, o.threads);
      emit(o, name, r, h);
      for (const auto& m : r) code = std::max(code, m.error.code);
      break;
    }
    case ExperimentKind::drift_table: {
      const auto r = cmd_drift_table(cfg, o.threads);
      emit(o, name, r, h);
      for (const auto& t : r) code = std::max(code, t.error.code);
      break;
    }
    case ExperimentKind::quantile_audit: emit(o, name, cmd_quantile_audit(cfg), h); break;
    case ExperimentKind::lemma_check: {
      const auto r = cmd_lemma_check(cfg, o.threads);
      emit(o, name, r, h);
      code = r.exit_code;
      break;
    }
  }
  report_row_errors(code);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact and Monte Carlo analysis of the (1+1)-EA with mean and median sampling on noisy OneMax"};
  app.set_version_flag("--version", std::string("medsamp ") + MEDSAMP_VERSION);
  app.require_subcommand(1);

  CommonOptions opts;
  std::optional<ExperimentKind> chosen;
  const std::pair<ExperimentKind, const char*> commands[] = {
      {ExperimentKind::efht_sweep, "Exact expected hitting times over a list of n, with log-log slope fits"},
      {ExperimentKind::simulate, "Monte Carlo runs on full bit strings, compared against the exact value"},
      {ExperimentKind::accept_matrix, "Acceptance probabilities A[i][j] between zero-count states"},
      {ExperimentKind::drift_table, "Per-state positive, negative and total drift for a distance function"},
      {ExperimentKind::quantile_audit, "2-quantile of the noisy fitness per state and a monotonicity verdict"},
      {ExperimentKind::lemma_check, "Comparison-probability conditions and median concentration checks"}};
  for (const auto& [kind, help] : commands) {
    auto* sub = app.add_subcommand(to_string(kind), help);
    sub->add_option("--config", opts.config_path, "JSON experiment configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out_dir, "Output directory (stdout when omitted)");
    sub->add_option("--seed", opts.seed, "Master seed, overrides the config");
    sub->add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", opts.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    sub->callback([&chosen, kind = kind] { chosen = kind; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return run(*chosen, opts);
  } catch (const UsageError& e) {
    std::cerr << "medsamp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InapplicableBound& e) {
    std::cerr << "medsamp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedConfiguration& e) {
    std::cerr << "medsamp: " << e.what() << '\n';
    return kExitCostGuard;
  } catch (const NumericFailure& e) {
    std::cerr << "medsamp: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const StructuralError& e) {
    std::cerr << "medsamp: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "medsamp: " << e.what() << '\n';
    return kExitUsage;
  }
}
