#pragma once

#include "metabench/data.hpp"
#include "metabench/error.hpp"
#include "metabench/model.hpp"
#include "metabench/preprocess.hpp"
#include "metabench/report.hpp"
#include "metabench/tuning.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace metabench {

inline constexpr std::string_view kEsiPos = "ESI+";
inline constexpr std::string_view kEsiNeg = "ESI-";
inline constexpr std::string_view kMerged = "MERGED";

inline std::string canonical_dataset(std::string_view s) {
  if (s == "ESI+" || s == "esi+" || s == "esi_pos" || s == "pos") return std::string(kEsiPos);
  if (s == "ESI-" || s == "ESI\xE2\x88\x92" || s == "esi-" || s == "esi_neg" || s == "neg") return std::string(kEsiNeg);
  if (s == "MERGED" || s == "merged") return std::string(kMerged);
  throw Error(ErrorCode::Config, "unknown dataset '" + std::string(s) + "'");
}

// File-name tag for a canonical dataset name.
inline std::string dataset_tag(std::string_view dataset) {
  if (dataset == kEsiPos) return "esi_pos";
  if (dataset == kEsiNeg) return "esi_neg";
  return "merged";
}

struct DataPaths {
  std::string esi_pos;
  std::string esi_neg;
  std::string metadata_pos;  // optional name,mode,known overrides
  std::string metadata_neg;
};

struct RunConfig {
  std::optional<DataPaths> data;  // when absent the data are synthesized
  SynthSpec synth;
  bool synth_seed_set = false;    // otherwise the synth seed follows `seed`
  std::vector<std::string> datasets{std::string(kEsiPos), std::string(kEsiNeg), std::string(kMerged)};
  PreprocessMode preprocess = PreprocessMode::Global;
  std::size_t k_outer = 10;
  std::size_t k_inner = 5;
  std::vector<RunMode> modes{RunMode::Base, RunMode::Tuned};
  std::vector<ModelFamily> models{kReportOrder.begin(), kReportOrder.end()};
  std::map<ModelFamily, HyperGrid> grids;  // overrides of default_grid
  std::map<ModelFamily, Hyperparams> hyperparameters;
  std::uint64_t seed = 0;
  std::string out = "metabench_out";
  std::size_t threads = 1;
  bool pooled = false;
  std::size_t top_n = 50;
  bool svg = true;

  SynthSpec effective_synth() const {
    SynthSpec s = synth;
    if (!synth_seed_set) s.seed = seed;
    return s;
  }

  std::optional<HyperGrid> grid_for(ModelFamily f) const {
    if (auto it = grids.find(f); it != grids.end()) return it->second;
    return default_grid(f);
  }

  Hyperparams base_hyperparams(ModelFamily f) const {
    auto it = hyperparameters.find(f);
    return it == hyperparameters.end() ? Hyperparams{} : it->second;
  }

  void validate() const {
    if (k_outer < 2) throw Error(ErrorCode::Config, "k_outer must be >= 2");
    if (k_inner < 2) throw Error(ErrorCode::Config, "k_inner must be >= 2");
    if (datasets.empty()) throw Error(ErrorCode::Config, "at least one dataset is required");
    if (models.empty()) throw Error(ErrorCode::Config, "at least one model is required");
    if (modes.empty()) throw Error(ErrorCode::Config, "at least one mode is required");
    if (threads == 0) throw Error(ErrorCode::Config, "threads must be >= 1");
    if (top_n == 0) throw Error(ErrorCode::Config, "top_n must be >= 1");
    if (data && (data->esi_pos.empty() || data->esi_neg.empty()))
      throw Error(ErrorCode::Config, "data needs both esi_pos and esi_neg paths");
    if (!data) effective_synth().validate();
    for (const auto& [f, g] : grids) g.validate();
    for (const auto& [f, h] : hyperparameters) check_hyperparam_names(f, h);
  }
};

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k == a;
    if (!ok) throw Error(ErrorCode::Config, "unknown key '" + k + "' in " + std::string(where));
  }
}

inline HyperValue hyper_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return std::string("none");
  throw Error(ErrorCode::Config, "grid values must be numbers or strings");
}

template <typename T>
T get_as(const json& j, std::string_view key) {
  try {
    return j.at(std::string(key)).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "bad value for '" + std::string(key) + "': " + e.what());
  }
}

}  // namespace detail

inline HyperGrid grid_from_json(ModelFamily f, const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Config, "a grid must be an object of value lists");
  HyperGrid g{f, {}};
  for (const auto& [name, values] : j.items()) {
    if (!values.is_array()) throw Error(ErrorCode::Config, "grid axis '" + name + "' must be a list");
    std::vector<HyperValue> axis;
    for (const auto& v : values) axis.push_back(detail::hyper_value(v));
    g.axes.emplace_back(name, std::move(axis));
  }
  return g;
}

inline json to_json(const HyperGrid& g) {
  json j = json::object();
  for (const auto& [name, values] : g.axes) {
    json arr = json::array();
    for (const auto& v : values) {
      if (const auto* d = std::get_if<double>(&v)) arr.push_back(*d);
      else arr.push_back(std::get<std::string>(v));
    }
    j[name] = std::move(arr);
  }
  return j;
}

inline json to_json(const SynthSpec& s) {
  return json{{"n_samples", s.n_samples},       {"n_features_pos", s.n_features_pos},
              {"n_features_neg", s.n_features_neg}, {"n_class0", s.n_class0},
              {"n_class1", s.n_class1},         {"n_informative", s.n_informative},
              {"effect_size", s.effect_size},   {"seed", s.seed}};
}

inline RunConfig run_config_from_json(const json& j) {
  using detail::get_as;
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"data", "synth", "datasets", "preprocess", "k_outer", "k_inner", "modes", "models",
                               "grids", "hyperparameters", "seed", "out", "threads", "pooled", "top_n", "svg"},
                              "config");
  RunConfig c;
  if (j.contains("data")) {
    const auto& d = j["data"];
    detail::reject_unknown_keys(d, {"esi_pos", "esi_neg", "metadata_pos", "metadata_neg"}, "data");
    DataPaths p;
    p.esi_pos = d.value("esi_pos", "");
    p.esi_neg = d.value("esi_neg", "");
    p.metadata_pos = d.value("metadata_pos", "");
    p.metadata_neg = d.value("metadata_neg", "");
    c.data = p;
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    detail::reject_unknown_keys(s,
                                {"n_samples", "n_features_pos", "n_features_neg", "n_class0", "n_class1",
                                 "n_informative", "effect_size", "seed"},
                                "synth");
    auto& sp = c.synth;
    if (s.contains("n_samples")) sp.n_samples = get_as<std::size_t>(s, "n_samples");
    if (s.contains("n_features_pos")) sp.n_features_pos = get_as<std::size_t>(s, "n_features_pos");
    if (s.contains("n_features_neg")) sp.n_features_neg = get_as<std::size_t>(s, "n_features_neg");
    if (s.contains("n_class0")) sp.n_class0 = get_as<std::size_t>(s, "n_class0");
    if (s.contains("n_class1")) sp.n_class1 = get_as<std::size_t>(s, "n_class1");
    if (s.contains("n_informative")) sp.n_informative = get_as<std::size_t>(s, "n_informative");
    if (s.contains("effect_size")) sp.effect_size = get_as<double>(s, "effect_size");
    if (s.contains("seed")) {
      sp.seed = get_as<std::uint64_t>(s, "seed");
      c.synth_seed_set = true;
    }
  }
  if (j.contains("datasets")) {
    c.datasets.clear();
    for (const auto& d : j["datasets"]) c.datasets.push_back(canonical_dataset(d.get<std::string>()));
  }
  try {
    if (j.contains("preprocess")) c.preprocess = parse_preprocess_mode(j["preprocess"].get<std::string>());
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.detail());
  }
  if (j.contains("k_outer")) c.k_outer = get_as<std::size_t>(j, "k_outer");
  if (j.contains("k_inner")) c.k_inner = get_as<std::size_t>(j, "k_inner");
  if (j.contains("modes")) {
    c.modes.clear();
    for (const auto& m : j["modes"]) c.modes.push_back(parse_run_mode(m.get<std::string>()));
  }
  if (j.contains("models")) {
    c.models.clear();
    for (const auto& m : j["models"]) c.models.push_back(parse_family(m.get<std::string>()));
  }
  if (j.contains("grids"))
    for (const auto& [name, g] : j["grids"].items()) {
      const auto f = parse_family(name);
      c.grids[f] = grid_from_json(f, g);
    }
  if (j.contains("hyperparameters"))
    for (const auto& [name, h] : j["hyperparameters"].items())
      c.hyperparameters[parse_family(name)] = hyperparams_from_json(h);
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("out")) c.out = get_as<std::string>(j, "out");
  if (j.contains("threads")) c.threads = get_as<std::size_t>(j, "threads");
  if (j.contains("pooled")) c.pooled = get_as<bool>(j, "pooled");
  if (j.contains("top_n")) c.top_n = get_as<std::size_t>(j, "top_n");
  if (j.contains("svg")) c.svg = get_as<bool>(j, "svg");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

// The parts of a config that determine results. Thread count and output
// directory are left out so that report.json does not depend on them.
inline json results_echo(const RunConfig& c) {
  json j;
  if (c.data) {
    j["data"] = {{"esi_pos", c.data->esi_pos}, {"esi_neg", c.data->esi_neg}};
    if (!c.data->metadata_pos.empty()) j["data"]["metadata_pos"] = c.data->metadata_pos;
    if (!c.data->metadata_neg.empty()) j["data"]["metadata_neg"] = c.data->metadata_neg;
  } else {
    j["synth"] = to_json(c.effective_synth());
  }
  j["datasets"] = c.datasets;
  j["preprocess"] = std::string(to_string(c.preprocess));
  j["k_outer"] = c.k_outer;
  j["k_inner"] = c.k_inner;
  json modes = json::array();
  for (auto m : c.modes) modes.push_back(std::string(to_string(m)));
  j["modes"] = std::move(modes);
  json models = json::array();
  for (auto f : in_report_order(c.models)) models.push_back(std::string(short_name(f)));
  j["models"] = std::move(models);
  json grids = json::object();
  for (auto f : in_report_order(c.models))
    if (auto g = c.grid_for(f)) grids[std::string(short_name(f))] = to_json(*g);
  j["grids"] = std::move(grids);
  json hps = json::object();
  for (const auto& [f, h] : c.hyperparameters) hps[std::string(short_name(f))] = to_json(h);
  j["hyperparameters"] = std::move(hps);
  j["seed"] = c.seed;
  j["aggregation"] = c.pooled ? "pooled" : "per_fold";
  return j;
}

}  // namespace metabench
