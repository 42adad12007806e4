#pragma once

#include "metabench/config.hpp"
#include "metabench/cv.hpp"
#include "metabench/data.hpp"
#include "metabench/nested_cv.hpp"
#include "metabench/parallel.hpp"
#include "metabench/preprocess.hpp"
#include "metabench/report.hpp"
#include "metabench/tuning.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace metabench {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 2;
inline constexpr int config = 3;
inline constexpr int numerical = 4;
}  // namespace exit_code

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingValue:
    case ErrorCode::NonPositiveIntensity:
    case ErrorCode::DuplicateSampleId:
    case ErrorCode::DuplicateFeature:
    case ErrorCode::BadLabel:
    case ErrorCode::BadFormat:
    case ErrorCode::SampleMismatch:
    case ErrorCode::EmptyTable:
      return exit_code::validation;
    case ErrorCode::InvalidSpec:
    case ErrorCode::TooFewPerClass:
    case ErrorCode::UnknownSolver:
    case ErrorCode::EmptyGrid:
    case ErrorCode::WrongFamily:
    case ErrorCode::Io:
    case ErrorCode::Config:
      return exit_code::config;
    default:
      return exit_code::numerical;
  }
}

struct InputData {
  MetaboliteTable pos;
  MetaboliteTable neg;
  std::vector<std::string> informative;  // synthetic runs only
};

inline InputData load_inputs(const RunConfig& cfg) {
  if (!cfg.data) {
    auto s = synthesize(cfg.effective_synth());
    return {std::move(s.pos), std::move(s.neg), std::move(s.informative)};
  }
  auto pos = load_csv(cfg.data->esi_pos, IonMode::Pos);
  auto neg = load_csv(cfg.data->esi_neg, IonMode::Neg);
  if (!cfg.data->metadata_pos.empty()) pos = apply_metadata(pos, cfg.data->metadata_pos);
  if (!cfg.data->metadata_neg.empty()) neg = apply_metadata(neg, cfg.data->metadata_neg);
  return {std::move(pos), std::move(neg), {}};
}

inline MetaboliteTable dataset_table(const InputData& in, std::string_view dataset) {
  if (dataset == kEsiPos) return in.pos;
  if (dataset == kEsiNeg) return in.neg;
  return merge_modes(in.pos, in.neg);
}

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for '" + path.string() + "'");
}

// ---- synth -------------------------------------------------------------------

inline SynthData cmd_synth(const RunConfig& cfg) {
  auto data = synthesize(cfg.effective_synth());
  const std::filesystem::path out(cfg.out);
  ensure_directory(out);
  write_csv(data.pos, (out / "esi_pos.csv").string());
  write_csv(data.neg, (out / "esi_neg.csv").string());
  std::string list;
  for (const auto& name : data.informative) list += name + "\n";
  write_text(out / "informative.txt", list);
  return data;
}

// ---- validate ----------------------------------------------------------------

// Prints one line per issue; returns the number of issues found.
inline std::size_t cmd_validate(const std::vector<std::string>& paths, std::ostream& log) {
  std::size_t total = 0;
  for (const auto& path : paths) {
    const auto issues = validate_csv(path);
    for (const auto& is : issues)
      log << path << ": row " << is.row << ", column '" << is.column << "': " << to_string(is.code) << ": "
          << is.message << '\n';
    if (issues.empty()) log << path << ": ok\n";
    total += issues.size();
  }
  return total;
}

// ---- benchmark ---------------------------------------------------------------

struct BenchmarkJob {
  std::size_t dataset = 0;
  RunMode mode = RunMode::Base;
  ModelFamily family = ModelFamily::LogisticRidge;
};

// Every (dataset, mode, model) cell uses the master seed, so all models on a
// dataset share the same outer folds. Cells run in parallel; each cell's CV is
// serial, which keeps results independent of the thread count.
inline BenchmarkReport run_benchmark(const RunConfig& cfg, const InputData& input, std::ostream* log = nullptr) {
  cfg.validate();
  struct Prepared {
    Matrix X;
    Labels y;
  };
  std::vector<Prepared> prepared;
  for (const auto& d : cfg.datasets) {
    const auto table = dataset_table(input, d);
    Matrix X = cfg.preprocess == PreprocessMode::Global ? preprocess_global(table) : table.values();
    prepared.push_back({std::move(X), table.labels()});
  }
  const auto families = in_report_order(cfg.models);
  std::vector<BenchmarkJob> jobs;
  for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
    for (auto mode : cfg.modes)
      for (auto f : families) jobs.push_back({d, mode, f});

  std::vector<std::optional<CellInput>> cells(jobs.size());
  parallel_for(jobs.size(), cfg.threads, [&](std::size_t j) {
    const auto& job = jobs[j];
    const auto& data = prepared[job.dataset];
    ModelSpec spec{job.family, cfg.base_hyperparams(job.family), cfg.seed};
    CvOptions opt;
    opt.k = cfg.k_outer;
    opt.seed = cfg.seed;
    opt.preprocess = cfg.preprocess;
    opt.aggregation = cfg.pooled ? Aggregation::Pooled : Aggregation::PerFold;
    CellInput cell{cfg.datasets[job.dataset], job.mode, {}, {}};
    const auto grid = cfg.grid_for(job.family);
    if (job.mode == RunMode::Tuned && grid) {
      cell.result = run_nested_cv(data.X, data.y, spec, *grid, cfg.k_inner, opt);
    } else {
      cell.result = run_cv(data.X, data.y, spec, opt);
      if (job.mode == RunMode::Tuned) cell.note = "no hyperparameters to tune; defaults used";
    }
    cells[j] = std::move(cell);
  });

  std::vector<CellInput> results;
  for (auto& c : cells) results.push_back(std::move(*c));
  if (log)
    for (const auto& c : results)
      *log << c.dataset << ' ' << to_string(c.mode) << ' ' << short_name(c.result.family)
           << " mean AUC " << csv::g12(c.result.summary().mean.auc) << '\n';
  return build_report(results, {cfg.datasets, families, cfg.modes}, {}, results_echo(cfg));
}

inline std::string report_json_text(const BenchmarkReport& report) { return to_json(report).dump(2) + "\n"; }

inline void write_benchmark(const BenchmarkReport& report, const RunConfig& cfg) {
  const std::filesystem::path out(cfg.out);
  ensure_directory(out);
  write_text(out / "report.json", report_json_text(report));
  for (const auto& d : cfg.datasets)
    for (auto m : cfg.modes)
      write_text(out / ("summary_" + dataset_tag(d) + "_" + std::string(to_string(m)) + ".csv"),
                 summary_csv(report, d, m));
  const auto points = consistency_scatter(report);
  write_text(out / "scatter.csv", scatter_csv(points));
  if (cfg.svg) write_text(out / "scatter.svg", scatter_svg(points));
}

inline BenchmarkReport cmd_benchmark(const RunConfig& cfg, std::ostream* log = nullptr) {
  const auto input = load_inputs(cfg);
  auto report = run_benchmark(cfg, input, log);
  write_benchmark(report, cfg);
  return report;
}

// ---- coefficients ------------------------------------------------------------

struct CoefficientRun {
  CoefficientReport all;
  CoefficientReport known_only;
  json provenance;
};

// Tuned logistic ridge refit on the full, globally preprocessed merged data.
// The grid search uses k_inner folds over all samples.
inline CoefficientRun run_coefficients(const RunConfig& cfg, const InputData& input) {
  cfg.validate();
  const auto merged = merge_modes(input.pos, input.neg);
  const Matrix X = preprocess_global(merged);
  const auto& y = merged.labels();
  ModelSpec spec{ModelFamily::LogisticRidge, cfg.base_hyperparams(ModelFamily::LogisticRidge), cfg.seed};
  const auto grid = *cfg.grid_for(ModelFamily::LogisticRidge);
  const auto search = grid_search(X, y, spec, grid, cfg.k_inner, inner_search_seed(cfg.seed),
                                  PreprocessMode::Global, cfg.threads);
  spec.hyperparams = merge_hyperparams(spec.hyperparams, search.best);
  const auto model = fit_model(spec, X, y);

  const std::string source = "LOGISTIC_RIDGE tuned by " + std::to_string(cfg.k_inner) +
                             "-fold grid search, refit on all samples of MERGED, global preprocessing";
  CoefficientRun run{rank_coefficients(model, merged.features(), cfg.top_n, CoefficientFilter::All, source),
                     rank_coefficients(model, merged.features(), cfg.top_n, CoefficientFilter::KnownOnly, source),
                     {}};
  json scores = json::array();
  for (const auto& s : search.scores) scores.push_back({{"config", to_json(s.config)}, {"mean_auc", s.mean_auc}});
  run.provenance = {{"source", source},
                    {"dataset", std::string(kMerged)},
                    {"samples", merged.rows()},
                    {"features", merged.cols()},
                    {"hyperparameters", to_json(spec.hyperparams)},
                    {"grid_scores", std::move(scores)},
                    {"converged", !model.hit_iteration_cap()},
                    {"top_n", cfg.top_n},
                    {"run", results_echo(cfg)}};
  return run;
}

inline CoefficientRun cmd_coeffs(const RunConfig& cfg) {
  const auto input = load_inputs(cfg);
  auto run = run_coefficients(cfg, input);
  const std::filesystem::path out(cfg.out);
  ensure_directory(out);
  write_text(out / "coefficients_all.csv", coefficients_csv(run.all));
  write_text(out / "coefficients_known_only.csv", coefficients_csv(run.known_only));
  write_text(out / "coefficients.json", run.provenance.dump(2) + "\n");
  return run;
}

}  // namespace metabench
