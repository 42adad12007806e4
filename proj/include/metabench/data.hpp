#pragma once

#include "metabench/csv.hpp"
#include "metabench/error.hpp"
#include "metabench/random.hpp"
#include "metabench/types.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace metabench {

enum class IonMode { Pos, Neg };

inline std::string_view to_string(IonMode m) { return m == IonMode::Pos ? "ESI+" : "ESI-"; }

inline IonMode parse_ion_mode(std::string_view s) {
  if (s == "ESI+" || s == "pos" || s == "POS" || s == "ESI_POS") return IonMode::Pos;
  if (s == "ESI-" || s == "neg" || s == "NEG" || s == "ESI_NEG") return IonMode::Neg;
  throw Error(ErrorCode::BadFormat, "unknown ionization mode '" + std::string(s) + "'");
}

inline constexpr std::string_view kUnknownPrefix = "unknown";
inline constexpr std::string_view kSampleIdColumn = "sample_id";
inline constexpr std::string_view kLabelColumn = "label";

inline bool has_unknown_prefix(std::string_view name) { return name.starts_with(kUnknownPrefix); }

struct FeatureMeta {
  std::string name;
  IonMode mode = IonMode::Pos;
  bool known = true;

  static FeatureMeta from_name(std::string name, IonMode mode) {
    const bool known = !has_unknown_prefix(name);
    return {std::move(name), mode, known};
  }

  friend bool operator==(const FeatureMeta&, const FeatureMeta&) = default;
};

// Sample x feature intensity table with binary labels. Immutable once built;
// the constructor enforces every invariant.
class MetaboliteTable {
 public:
  MetaboliteTable(std::vector<std::string> sample_ids, std::vector<FeatureMeta> features,
                  Matrix values, Labels labels)
      : sample_ids_(std::move(sample_ids)),
        features_(std::move(features)),
        values_(std::move(values)),
        labels_(std::move(labels)) {
    validate();
  }

  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<FeatureMeta>& features() const { return features_; }
  const Matrix& values() const { return values_; }
  const Labels& labels() const { return labels_; }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  std::size_t count_class(int c) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), c));
  }

  friend bool operator==(const MetaboliteTable& a, const MetaboliteTable& b) {
    return a.sample_ids_ == b.sample_ids_ && a.features_ == b.features_ &&
           a.labels_ == b.labels_ && a.values_ == b.values_;
  }

 private:
  void validate() const {
    const auto n = static_cast<std::size_t>(values_.rows());
    if (sample_ids_.size() != n || labels_.size() != n)
      throw Error(ErrorCode::ShapeMismatch, "row count differs from sample ids or labels");
    if (features_.size() != static_cast<std::size_t>(values_.cols()))
      throw Error(ErrorCode::ShapeMismatch, "column count differs from feature list");
    std::unordered_set<std::string_view> seen;
    for (const auto& id : sample_ids_)
      if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateSampleId, id);
    seen.clear();
    for (const auto& f : features_)
      if (!seen.insert(f.name).second) throw Error(ErrorCode::DuplicateFeature, f.name);
    for (std::size_t i = 0; i < n; ++i) {
      if (labels_[i] != 0 && labels_[i] != 1)
        throw Error(ErrorCode::BadLabel, "sample " + sample_ids_[i]);
    }
    for (Index i = 0; i < values_.rows(); ++i) {
      for (Index j = 0; j < values_.cols(); ++j) {
        const double v = values_(i, j);
        if (std::isnan(v))
          throw Error(ErrorCode::MissingValue, "row " + std::to_string(i) + " column " + features_[j].name);
        if (!(v > 0.0) || !std::isfinite(v))
          throw Error(ErrorCode::NonPositiveIntensity,
                      "row " + std::to_string(i) + " column " + features_[j].name);
      }
    }
  }

  std::vector<std::string> sample_ids_;
  std::vector<FeatureMeta> features_;
  Matrix values_;
  Labels labels_;
};

// One problem found while scanning an input file. `row` is the 1-based data
// row (0 for the header), `column` the header name when known.
struct ValidationIssue {
  ErrorCode code;
  std::size_t row = 0;
  std::string column;
  std::string message;
};

namespace detail {

struct ParsedCsv {
  std::vector<std::string> ids;
  std::vector<std::string> feature_names;
  std::vector<double> cells;
  Labels labels;
  std::vector<ValidationIssue> issues;
};

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin) return std::nullopt;
  while (*end == ' ' || *end == '\t') ++end;
  if (*end != '\0') return std::nullopt;
  return v;
}

inline bool is_missing_token(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; }), s.end());
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s.empty() || s == "nan" || s == "na" || s == "null";
}

// Scans the whole file and records every issue instead of stopping at the
// first one; load_csv turns the first issue into an exception.
inline ParsedCsv scan_csv(std::istream& in, std::size_t max_issues = 1000) {
  ParsedCsv out;
  auto issue = [&](ErrorCode code, std::size_t row, std::string column, std::string msg) {
    if (out.issues.size() < max_issues)
      out.issues.push_back({code, row, std::move(column), std::move(msg)});
  };

  std::vector<std::string> fields;
  if (!csv::read_record(in, fields)) {
    issue(ErrorCode::BadFormat, 0, "", "empty file");
    return out;
  }
  if (fields.size() < 3 || fields.front() != kSampleIdColumn || fields.back() != kLabelColumn) {
    issue(ErrorCode::BadFormat, 0, "", "header must be sample_id,<features...>,label");
    return out;
  }
  out.feature_names.assign(fields.begin() + 1, fields.end() - 1);
  const std::size_t p = out.feature_names.size();
  {
    std::unordered_set<std::string_view> names;
    for (const auto& name : out.feature_names)
      if (!names.insert(name).second) issue(ErrorCode::DuplicateFeature, 0, name, "duplicate feature name");
  }

  std::unordered_set<std::string> ids;
  std::size_t row = 0;
  while (csv::read_record(in, fields)) {
    ++row;
    if (fields.size() != p + 2) {
      issue(ErrorCode::BadFormat, row, "",
            "expected " + std::to_string(p + 2) + " fields, got " + std::to_string(fields.size()));
      continue;
    }
    if (!ids.insert(fields.front()).second)
      issue(ErrorCode::DuplicateSampleId, row, std::string(kSampleIdColumn), fields.front());
    for (std::size_t j = 0; j < p; ++j) {
      const std::string& cell = fields[j + 1];
      double v = std::nan("");
      if (is_missing_token(cell)) {
        issue(ErrorCode::MissingValue, row, out.feature_names[j], "missing value");
      } else if (auto parsed = parse_number(cell); !parsed) {
        issue(ErrorCode::BadFormat, row, out.feature_names[j], "not a number: '" + cell + "'");
      } else if (std::isnan(*parsed)) {
        issue(ErrorCode::MissingValue, row, out.feature_names[j], "missing value");
      } else if (!(*parsed > 0.0) || !std::isfinite(*parsed)) {
        issue(ErrorCode::NonPositiveIntensity, row, out.feature_names[j], "intensity " + cell);
      } else {
        v = *parsed;
      }
      out.cells.push_back(v);
    }
    const auto label = parse_number(fields.back());
    if (!label || (*label != 0.0 && *label != 1.0)) {
      issue(ErrorCode::BadLabel, row, std::string(kLabelColumn), "label '" + fields.back() + "'");
      out.labels.push_back(0);
    } else {
      out.labels.push_back(static_cast<int>(*label));
    }
    out.ids.push_back(fields.front());
  }
  if (row == 0) issue(ErrorCode::EmptyTable, 0, "", "no data rows");
  return out;
}

}  // namespace detail

inline std::vector<ValidationIssue> validate_csv(std::istream& in) { return detail::scan_csv(in).issues; }

inline std::vector<ValidationIssue> validate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {{ErrorCode::Io, 0, "", "cannot open " + path}};
  return validate_csv(in);
}

inline MetaboliteTable read_csv(std::istream& in, IonMode mode) {
  auto parsed = detail::scan_csv(in, 1);
  if (!parsed.issues.empty()) {
    const auto& is = parsed.issues.front();
    std::string where = is.row ? " (row " + std::to_string(is.row) + ", column " + is.column + ")" : "";
    throw Error(is.code, is.message + where);
  }
  const auto n = static_cast<Index>(parsed.ids.size());
  const auto p = static_cast<Index>(parsed.feature_names.size());
  Matrix values = Eigen::Map<Matrix>(parsed.cells.data(), n, p);
  std::vector<FeatureMeta> features;
  features.reserve(parsed.feature_names.size());
  for (auto& name : parsed.feature_names) features.push_back(FeatureMeta::from_name(std::move(name), mode));
  return MetaboliteTable(std::move(parsed.ids), std::move(features), std::move(values),
                         std::move(parsed.labels));
}

inline MetaboliteTable load_csv(const std::string& path, IonMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_csv(in, mode);
}

inline void write_csv(const MetaboliteTable& table, std::ostream& out) {
  out << kSampleIdColumn;
  for (const auto& f : table.features()) out << ',' << csv::quote(f.name);
  out << ',' << kLabelColumn << '\n';
  const Matrix& v = table.values();
  for (Index i = 0; i < v.rows(); ++i) {
    out << csv::quote(table.sample_ids()[i]);
    for (Index j = 0; j < v.cols(); ++j) out << ',' << csv::exact(v(i, j));
    out << ',' << table.labels()[i] << '\n';
  }
}

inline void write_csv(const MetaboliteTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  write_csv(table, out);
}

// Metadata CSV `name,mode,known` overriding the name-prefix convention.
// Rows naming features absent from the table are ignored.
inline MetaboliteTable apply_metadata(const MetaboliteTable& table, std::istream& in) {
  std::vector<std::string> fields;
  if (!csv::read_record(in, fields) || fields.size() != 3 || fields[0] != "name")
    throw Error(ErrorCode::BadFormat, "metadata header must be name,mode,known");
  std::map<std::string, std::pair<IonMode, bool>, std::less<>> meta;
  while (csv::read_record(in, fields)) {
    if (fields.size() != 3) throw Error(ErrorCode::BadFormat, "metadata row needs 3 fields");
    const std::string& k = fields[2];
    bool known;
    if (k == "1" || k == "true" || k == "TRUE") known = true;
    else if (k == "0" || k == "false" || k == "FALSE") known = false;
    else throw Error(ErrorCode::BadFormat, "metadata known flag '" + k + "'");
    meta[fields[0]] = {parse_ion_mode(fields[1]), known};
  }
  auto features = table.features();
  for (auto& f : features) {
    auto it = meta.find(f.name);
    if (it != meta.end() && it->second.first == f.mode) f.known = it->second.second;
  }
  return MetaboliteTable(table.sample_ids(), std::move(features), table.values(), table.labels());
}

inline MetaboliteTable apply_metadata(const MetaboliteTable& table, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return apply_metadata(table, in);
}

inline std::string mode_suffixed(std::string_view name, IonMode mode) {
  return std::string(name) + "_" + std::string(to_string(mode));
}

// Horizontal concatenation of the two acquisition modes for the same samples.
// Every feature name gains its mode suffix, so the merged names are disjoint.
inline MetaboliteTable merge_modes(const MetaboliteTable& pos, const MetaboliteTable& neg) {
  if (pos.sample_ids() != neg.sample_ids())
    throw Error(ErrorCode::SampleMismatch, "sample ids differ between modes (ids and order must match)");
  if (pos.labels() != neg.labels()) throw Error(ErrorCode::SampleMismatch, "labels differ between modes");
  std::vector<FeatureMeta> features;
  features.reserve(pos.features().size() + neg.features().size());
  for (const auto* t : {&pos, &neg})
    for (const auto& f : t->features()) features.push_back({mode_suffixed(f.name, f.mode), f.mode, f.known});
  Matrix values(pos.rows(), pos.cols() + neg.cols());
  values << pos.values(), neg.values();
  return MetaboliteTable(pos.sample_ids(), std::move(features), std::move(values), pos.labels());
}

struct SynthSpec {
  std::size_t n_samples = 81;
  std::size_t n_features_pos = 1922;
  std::size_t n_features_neg = 939;
  std::size_t n_class0 = 27;
  std::size_t n_class1 = 54;
  std::size_t n_informative = 40;
  double effect_size = 1.5;
  std::uint64_t seed = 7;

  void validate() const {
    if (n_class0 + n_class1 != n_samples)
      throw Error(ErrorCode::InvalidSpec, "n_class0 + n_class1 must equal n_samples");
    if (n_class0 == 0 || n_class1 == 0) throw Error(ErrorCode::InvalidSpec, "both classes need samples");
    if (n_features_pos == 0 || n_features_neg == 0)
      throw Error(ErrorCode::InvalidSpec, "each mode needs at least one feature");
    if (n_informative > n_features_pos + n_features_neg)
      throw Error(ErrorCode::InvalidSpec, "n_informative exceeds the feature count");
    if (!(effect_size >= 0.0) || !std::isfinite(effect_size))
      throw Error(ErrorCode::InvalidSpec, "effect_size must be finite and >= 0");
  }
};

struct SynthData {
  MetaboliteTable pos;
  MetaboliteTable neg;
  // Suffixed names (as they appear after merge_modes) of the planted features.
  std::vector<std::string> informative;
};

// Log-normal intensities with a per-feature log2 location/scale, a per-sample
// dilution offset (the variation quantile normalization removes), and a
// +effect_size log2 shift on planted features for class-1 samples.
inline SynthData synthesize(const SynthSpec& spec) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, {stream::synth}));
  const std::size_t n = spec.n_samples;
  const std::size_t p = spec.n_features_pos + spec.n_features_neg;
  constexpr double kKnownFraction = 611.0 / 2861.0;

  Labels labels(n, 0);
  std::fill(labels.begin() + static_cast<std::ptrdiff_t>(spec.n_class0), labels.end(), 1);
  rng.shuffle(labels);

  std::vector<FeatureMeta> features(p);
  std::vector<double> location(p), scale(p);
  for (std::size_t j = 0; j < p; ++j) {
    const bool is_pos = j < spec.n_features_pos;
    const std::size_t local = is_pos ? j : j - spec.n_features_pos;
    const bool known = rng.uniform() < kKnownFraction;
    features[j].mode = is_pos ? IonMode::Pos : IonMode::Neg;
    features[j].known = known;
    features[j].name = (known ? std::string("Compound") : std::string(kUnknownPrefix)) + std::to_string(local + 1);
    location[j] = rng.uniform(8.0, 20.0);
    scale[j] = rng.uniform(0.5, 1.5);
  }

  std::vector<std::size_t> order(p);
  for (std::size_t j = 0; j < p; ++j) order[j] = j;
  for (std::size_t j = 0; j < spec.n_informative; ++j) {
    const auto pick = j + static_cast<std::size_t>(rng.below(p - j));
    std::swap(order[j], order[pick]);
  }
  std::vector<char> planted(p, 0);
  for (std::size_t j = 0; j < spec.n_informative; ++j) planted[order[j]] = 1;

  Matrix values(static_cast<Index>(n), static_cast<Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    const double dilution = rng.normal(0.0, 0.3);
    for (std::size_t j = 0; j < p; ++j) {
      double log2v = location[j] + dilution + scale[j] * rng.normal();
      if (planted[j] && labels[i] == 1) log2v += spec.effect_size;
      values(static_cast<Index>(i), static_cast<Index>(j)) = std::exp2(log2v);
    }
  }

  std::vector<std::string> ids(n);
  const int width = static_cast<int>(std::to_string(n).size());
  for (std::size_t i = 0; i < n; ++i) {
    std::string num = std::to_string(i + 1);
    ids[i] = "S" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
  }

  std::vector<std::string> informative;
  for (std::size_t j = 0; j < p; ++j)
    if (planted[j]) informative.push_back(mode_suffixed(features[j].name, features[j].mode));

  const auto np = static_cast<Index>(spec.n_features_pos);
  const auto nn = static_cast<Index>(spec.n_features_neg);
  std::vector<FeatureMeta> fpos(features.begin(), features.begin() + np);
  std::vector<FeatureMeta> fneg(features.begin() + np, features.end());
  return SynthData{
      MetaboliteTable(ids, std::move(fpos), values.leftCols(np), labels),
      MetaboliteTable(ids, std::move(fneg), values.rightCols(nn), labels),
      std::move(informative),
  };
}

}  // namespace metabench
