#include "metabench/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<std::string> preprocess;
  std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--preprocess", o.preprocess, "global or fold-safe")
      ->check(CLI::IsMember({"global", "fold-safe"}));
  cmd->add_option("--mode", o.mode, "base, tuned or both")->check(CLI::IsMember({"base", "tuned", "both"}));
}

// Flags win over the config file.
metabench::RunConfig resolve(const Overrides& o) {
  using namespace metabench;
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.preprocess) cfg.preprocess = parse_preprocess_mode(*o.preprocess);
  if (o.mode) {
    if (*o.mode == "both") cfg.modes = {RunMode::Base, RunMode::Tuned};
    else cfg.modes = {parse_run_mode(*o.mode)};
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metabolomics classification benchmark"};
  app.require_subcommand(1);

  Overrides synth_o, bench_o, coeff_o;
  auto* synth = app.add_subcommand("synth", "write a synthetic ESI+/ESI- dataset pair");
  add_common(synth, synth_o);

  std::vector<std::string> paths;
  auto* validate = app.add_subcommand("validate", "check metabolite CSV files");
  validate->add_option("paths", paths, "CSV files")->required();

  auto* bench = app.add_subcommand("benchmark", "cross-validated benchmark of all configured models");
  add_common(bench, bench_o);

  auto* coeffs = app.add_subcommand("coeffs", "rank logistic ridge coefficients");
  add_common(coeffs, coeff_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : metabench::exit_code::config;
  }

  try {
    if (*validate) {
      const auto issues = metabench::cmd_validate(paths, std::cout);
      return issues == 0 ? metabench::exit_code::ok : metabench::exit_code::validation;
    }
    if (*synth) {
      const auto cfg = resolve(synth_o);
      const auto data = metabench::cmd_synth(cfg);
      std::cout << "wrote " << data.pos.rows() << " samples, " << data.pos.cols() << " ESI+ and "
                << data.neg.cols() << " ESI- features to " << cfg.out << '\n';
    } else if (*bench) {
      const auto cfg = resolve(bench_o);
      metabench::cmd_benchmark(cfg, &std::cerr);
      std::cout << "report written to " << cfg.out << '\n';
    } else if (*coeffs) {
      const auto cfg = resolve(coeff_o);
      const auto run = metabench::cmd_coeffs(cfg);
      for (std::size_t i = 0; i < run.all.entries.size() && i < 10; ++i)
        std::cout << i + 1 << ' ' << run.all.entries[i].name << ' '
                  << metabench::csv::g12(run.all.entries[i].coefficient) << '\n';
      std::cout << "coefficients written to " << cfg.out << '\n';
    }
  } catch (const metabench::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return metabench::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return metabench::exit_code::numerical;
  }
  return metabench::exit_code::ok;
}
