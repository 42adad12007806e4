#pragma once

#include "metabench/csv.hpp"
#include "metabench/cv.hpp"
#include "metabench/data.hpp"
#include "metabench/error.hpp"
#include "metabench/metrics.hpp"
#include "metabench/model.hpp"
#include "metabench/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace metabench {

enum class RunMode { Base, Tuned };

inline std::string_view to_string(RunMode m) { return m == RunMode::Base ? "base" : "tuned"; }

inline RunMode parse_run_mode(std::string_view s) {
  if (s == "base" || s == "BASE") return RunMode::Base;
  if (s == "tuned" || s == "TUNED") return RunMode::Tuned;
  throw Error(ErrorCode::Config, "unknown mode '" + std::string(s) + "'");
}

// One (dataset, model, mode) benchmark result.
struct CellInput {
  std::string dataset;
  RunMode mode = RunMode::Base;
  CvResult result;
  std::string note;  // e.g. why a TUNED cell ran with defaults
};

struct ReportCell {
  std::string dataset;
  ModelFamily family = ModelFamily::LogisticRidge;
  RunMode mode = RunMode::Base;
  bool skipped = false;
  std::string note;
  std::string grid;  // "published", "stand-in" or "none"
  MetricSummary summary;
  std::optional<CvResult> result;
};

struct ReportLayout {
  std::vector<std::string> datasets;
  std::vector<ModelFamily> families;
  std::vector<RunMode> modes;
};

struct BenchmarkReport {
  json run;  // echo of the run configuration
  std::vector<ReportCell> cells;

  const ReportCell* find(std::string_view dataset, ModelFamily f, RunMode m) const {
    for (const auto& c : cells)
      if (c.dataset == dataset && c.family == f && c.mode == m) return &c;
    return nullptr;
  }
};

inline std::vector<ModelFamily> in_report_order(std::vector<ModelFamily> families) {
  std::vector<ModelFamily> out;
  for (auto f : kReportOrder)
    if (std::find(families.begin(), families.end(), f) != families.end()) out.push_back(f);
  return out;
}

// Cells are ordered dataset -> mode -> model (table row order). Missing
// cells are an error unless `skipped` lists them.
inline BenchmarkReport build_report(const std::vector<CellInput>& results, const ReportLayout& layout,
                                    const std::vector<std::pair<CellInput, std::string>>& skipped = {},
                                    json run = json::object()) {
  if (results.empty() && skipped.empty()) throw Error(ErrorCode::Empty, "no results to report");
  BenchmarkReport report;
  report.run = std::move(run);
  for (const auto& dataset : layout.datasets) {
    for (auto mode : layout.modes) {
      for (auto family : in_report_order(layout.families)) {
        auto match = [&](const CellInput& c) {
          return c.dataset == dataset && c.mode == mode && c.result.family == family;
        };
        auto it = std::find_if(results.begin(), results.end(), match);
        ReportCell cell;
        cell.dataset = dataset;
        cell.family = family;
        cell.mode = mode;
        if (it != results.end()) {
          cell.note = it->note;
          cell.grid = it->result.tuned ? std::string(grid_provenance(family)) : "none";
          cell.summary = it->result.summary();
          cell.result = it->result;
        } else {
          auto sk = std::find_if(skipped.begin(), skipped.end(), [&](const auto& s) { return match(s.first); });
          if (sk == skipped.end())
            throw Error(ErrorCode::MissingCell, dataset + " / " + std::string(short_name(family)) + " / " +
                                                    std::string(to_string(mode)));
          cell.skipped = true;
          cell.note = sk->second;
          cell.grid = "none";
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  return report;
}

// ---- consistency scatter -----------------------------------------------------

struct ScatterPoint {
  std::string dataset;
  ModelFamily family = ModelFamily::LogisticRidge;
  RunMode mode = RunMode::Base;
  double mean_auc = 0.0;
  double sd_auc = 0.0;

  friend bool operator==(const ScatterPoint&, const ScatterPoint&) = default;
};

inline std::vector<ScatterPoint> consistency_scatter(const BenchmarkReport& report) {
  std::vector<ScatterPoint> out;
  for (const auto& c : report.cells)
    if (!c.skipped) out.push_back({c.dataset, c.family, c.mode, c.summary.mean.auc, c.summary.sd.auc});
  return out;
}

inline std::string scatter_csv(const std::vector<ScatterPoint>& points) {
  std::ostringstream out;
  out << "dataset,model,mode,mean_auc,sd_auc\n";
  for (const auto& p : points)
    out << csv::quote(p.dataset) << ',' << short_name(p.family) << ',' << to_string(p.mode) << ','
        << csv::g12(p.mean_auc) << ',' << csv::g12(p.sd_auc) << '\n';
  return out.str();
}

inline std::vector<ScatterPoint> parse_scatter_csv(std::istream& in) {
  std::vector<std::string> f;
  if (!csv::read_record(in, f) || f.size() != 5 || f[0] != "dataset")
    throw Error(ErrorCode::BadFormat, "scatter header");
  std::vector<ScatterPoint> out;
  while (csv::read_record(in, f)) {
    if (f.size() != 5) throw Error(ErrorCode::BadFormat, "scatter row");
    out.push_back({f[0], parse_family(f[1]), parse_run_mode(f[2]), std::stod(f[3]), std::stod(f[4])});
  }
  return out;
}

// Static SVG: mean AUC against AUC SD, one panel per dataset, base points
// light and tuned points dark.
inline std::string scatter_svg(const std::vector<ScatterPoint>& points) {
  std::vector<std::string> datasets;
  for (const auto& p : points)
    if (std::find(datasets.begin(), datasets.end(), p.dataset) == datasets.end()) datasets.push_back(p.dataset);
  double max_sd = 0.05;
  for (const auto& p : points) max_sd = std::max(max_sd, p.sd_auc * 1.1);
  const int pw = 360, ph = 300, m = 45;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pw * std::max<std::size_t>(datasets.size(), 1)
    << "\" height=\"" << ph << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    const int ox = static_cast<int>(d) * pw;
    auto px = [&](double sd) { return ox + m + (pw - 2 * m) * sd / max_sd; };
    auto py = [&](double auc) { return ph - m - (ph - 2 * m) * auc; };
    s << "<g>\n<text x=\"" << ox + pw / 2 << "\" y=\"15\" text-anchor=\"middle\">" << datasets[d] << "</text>\n";
    s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(max_sd) << "\" y2=\"" << py(0)
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0) << "\" y2=\"" << py(1)
      << "\" stroke=\"black\"/>\n";
    s << "<text x=\"" << ox + pw / 2 << "\" y=\"" << ph - 10 << "\" text-anchor=\"middle\">AUC SD</text>\n";
    s << "<text x=\"" << ox + 12 << "\" y=\"" << ph / 2 << "\" transform=\"rotate(-90 " << ox + 12 << ' ' << ph / 2
      << ")\" text-anchor=\"middle\">mean AUC</text>\n";
    for (const auto& p : points) {
      if (p.dataset != datasets[d]) continue;
      const char* fill = p.mode == RunMode::Base ? "#9ecae1" : "#08519c";
      s << "<circle cx=\"" << csv::g12(px(p.sd_auc)) << "\" cy=\"" << csv::g12(py(p.mean_auc))
        << "\" r=\"4\" fill=\"" << fill << "\"/>\n";
      s << "<text x=\"" << csv::g12(px(p.sd_auc) + 6) << "\" y=\"" << csv::g12(py(p.mean_auc) + 3) << "\">"
        << short_name(p.family) << "</text>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---- summary tables ----------------------------------------------------------

inline std::string summary_csv(const BenchmarkReport& report, std::string_view dataset, RunMode mode) {
  std::ostringstream out;
  out << "Model,AUC,B.A.,MCC,Spec.,F1\n";
  for (const auto& c : report.cells) {
    if (c.dataset != dataset || c.mode != mode || c.skipped) continue;
    const auto& mu = c.summary.mean;
    out << short_name(c.family) << ',' << csv::g12(mu.auc) << ',' << csv::g12(mu.balanced_accuracy) << ','
        << csv::g12(mu.mcc) << ',' << csv::g12(mu.specificity) << ',' << csv::g12(mu.f1) << '\n';
  }
  return out.str();
}

struct SummaryRow {
  ModelFamily family;
  double auc, balanced_accuracy, mcc, specificity, f1;
};

inline std::vector<SummaryRow> parse_summary_csv(std::istream& in) {
  std::vector<std::string> f;
  if (!csv::read_record(in, f) || f.size() != 6 || f[0] != "Model") throw Error(ErrorCode::BadFormat, "summary header");
  std::vector<SummaryRow> out;
  while (csv::read_record(in, f)) {
    if (f.size() != 6) throw Error(ErrorCode::BadFormat, "summary row");
    out.push_back({parse_family(f[0]), std::stod(f[1]), std::stod(f[2]), std::stod(f[3]), std::stod(f[4]),
                   std::stod(f[5])});
  }
  return out;
}

// ---- coefficient ranking -------------------------------------------------------

enum class CoefficientFilter { All, KnownOnly };

inline std::string_view to_string(CoefficientFilter f) { return f == CoefficientFilter::All ? "all" : "known_only"; }

struct RankedCoefficient {
  std::string name;
  double coefficient = 0.0;

  friend bool operator==(const RankedCoefficient&, const RankedCoefficient&) = default;
};

struct CoefficientReport {
  std::vector<RankedCoefficient> entries;
  CoefficientFilter filter = CoefficientFilter::All;
  std::string source;
};

// Top-n features by |coefficient| (descending, ties by name), signs kept.
// KNOWN_ONLY drops features flagged unknown or carrying the "unknown" prefix.
inline CoefficientReport rank_coefficients(const TrainedModel& model, const std::vector<FeatureMeta>& features,
                                           std::size_t top_n, CoefficientFilter filter, std::string source = {}) {
  if (model.family() != ModelFamily::LogisticRidge)
    throw Error(ErrorCode::WrongFamily, "coefficients are only defined for logistic ridge");
  const auto& w = model.as<LogisticModel>().weights;
  if (static_cast<std::size_t>(w.size()) != features.size())
    throw Error(ErrorCode::ShapeMismatch, "feature list does not match the model");
  CoefficientReport out;
  out.filter = filter;
  out.source = std::move(source);
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto& f = features[j];
    if (filter == CoefficientFilter::KnownOnly && (!f.known || has_unknown_prefix(f.name))) continue;
    out.entries.push_back({f.name, w[static_cast<Index>(j)]});
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const auto& a, const auto& b) {
    const double x = std::abs(a.coefficient), y = std::abs(b.coefficient);
    return x > y || (x == y && a.name < b.name);
  });
  if (out.entries.size() > top_n) out.entries.resize(top_n);
  return out;
}

inline std::string coefficients_csv(const CoefficientReport& r) {
  std::ostringstream out;
  out << "order,name,coefficient\n";
  for (std::size_t i = 0; i < r.entries.size(); ++i)
    out << i + 1 << ',' << csv::quote(r.entries[i].name) << ',' << csv::exact(r.entries[i].coefficient) << '\n';
  return out.str();
}

inline std::vector<RankedCoefficient> parse_coefficients_csv(std::istream& in) {
  std::vector<std::string> f;
  if (!csv::read_record(in, f) || f.size() != 3 || f[0] != "order")
    throw Error(ErrorCode::BadFormat, "coefficients header");
  std::vector<RankedCoefficient> out;
  while (csv::read_record(in, f)) {
    if (f.size() != 3) throw Error(ErrorCode::BadFormat, "coefficients row");
    out.push_back({f[1], std::stod(f[2])});
  }
  return out;
}

// ---- report.json -------------------------------------------------------------

inline json to_json(const MetricSummary& s) {
  return json{{"folds", s.folds}, {"mean", to_json(s.mean)}, {"sd", to_json(s.sd)}};
}

inline json to_json(const BenchmarkReport& r) {
  json j;
  j["format"] = "metabench-report";
  j["version"] = 1;
  j["run"] = r.run;
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cj;
    cj["dataset"] = c.dataset;
    cj["model"] = std::string(short_name(c.family));
    cj["family"] = std::string(family_id(c.family));
    cj["mode"] = std::string(to_string(c.mode));
    cj["skipped"] = c.skipped;
    cj["grid"] = c.grid;
    if (!c.note.empty()) cj["note"] = c.note;
    if (!c.skipped) {
      cj["summary"] = to_json(c.summary);
      cj["cv"] = to_json(*c.result);
    }
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  return j;
}

// Reads back the parts of report.json needed to re-derive summaries:
// per-fold metrics, chosen hyperparameters and the stored mean/SD.
struct ParsedCell {
  std::string dataset;
  ModelFamily family;
  RunMode mode;
  bool skipped;
  std::vector<FoldMetrics> folds;
  std::vector<std::optional<Hyperparams>> chosen;
  MetricSummary stored;
};

inline std::vector<ParsedCell> parse_report_json(const json& j) {
  if (j.at("format") != "metabench-report") throw Error(ErrorCode::BadFormat, "not a report document");
  std::vector<ParsedCell> out;
  for (const auto& cj : j.at("cells")) {
    ParsedCell c{cj.at("dataset"), parse_family(cj.at("family").get<std::string>()),
                 parse_run_mode(cj.at("mode").get<std::string>()), cj.at("skipped"), {}, {}, {}};
    if (!c.skipped) {
      for (const auto& fj : cj.at("cv").at("folds")) {
        c.folds.push_back(fold_metrics_from_json(fj.at("metrics")));
        if (fj.contains("chosen_hyperparameters"))
          c.chosen.emplace_back(hyperparams_from_json(fj["chosen_hyperparameters"]));
        else
          c.chosen.emplace_back(std::nullopt);
      }
      const auto& s = cj.at("summary");
      c.stored.folds = s.at("folds");
      c.stored.mean = fold_metrics_from_json(s.at("mean"));
      c.stored.sd = fold_metrics_from_json(s.at("sd"));
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace metabench
