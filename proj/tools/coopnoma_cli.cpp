// coopnoma: intercept-probability sweeps, training and comparison runs.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "coopnoma/errors.hpp"
#include "coopnoma/experiments.hpp"
#include "coopnoma/model_io.hpp"
#include "coopnoma/scenario.hpp"

namespace fs = std::filesystem;
using namespace coopnoma;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::string out;
  int workers = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "scenario JSON (or a CSV artifact to rerun)");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--trials", c.trials, "Monte Carlo trials per point");
  cmd->add_option("--out", c.out, "output path");
  cmd->add_option("--workers", c.workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

Scenario scenario_from(const Common& c) {
  Scenario sc = c.config.empty() ? Scenario{} : load_scenario(c.config);
  if (c.seed) {
    sc.seed = *c.seed;
    sc.train.seed = *c.seed;
  }
  if (c.trials) sc.mc_trials = *c.trials;
  sc.validate();
  return sc;
}

void emit(const Common& c, const std::string& fallback, const std::string& command,
          const Scenario& sc, const CsvTable& t) {
  const fs::path out = c.out.empty() ? fs::path(fallback) : fs::path(c.out);
  write_csv(out, command, sc, t);
  std::cout << "wrote " << t.rows.size() << " rows to " << out.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secrecy analysis and learned power allocation for cooperative SWIPT NOMA"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  Common snr_opts, rho_opts, train_opts, compare_opts, selftest_opts;
  std::string model_path;
  double specfun_tol = 0.0;

  auto* snr = app.add_subcommand("intercept-vs-snr", "intercept probability over transmit SNR");
  add_common(snr, snr_opts);
  auto* rho = app.add_subcommand("intercept-vs-rho", "intercept probability over the power-splitting factor");
  add_common(rho, rho_opts);
  auto* trn = app.add_subcommand("train", "generate labelled data and train the allocation network");
  add_common(trn, train_opts);
  auto* cmp = app.add_subcommand("compare", "oracle vs network vs random allocation over rho");
  add_common(cmp, compare_opts);
  cmp->add_option("--model", model_path, "trained model file")->required();
  auto* st = app.add_subcommand("selftest", "run the embedded verification suite");
  add_common(st, selftest_opts);
  st->add_option("--specfun-tolerance", specfun_tol)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*snr) {
      Scenario sc = scenario_from(snr_opts);
      const auto t = run_intercept_vs_snr(sc, {snr_opts.workers});
      emit(snr_opts, "intercept_vs_snr.csv", "intercept-vs-snr", sc, t);
    } else if (*rho) {
      Scenario sc = scenario_from(rho_opts);
      const auto t = run_intercept_vs_rho(sc, {rho_opts.workers});
      emit(rho_opts, "intercept_vs_rho.csv", "intercept-vs-rho", sc, t);
    } else if (*trn) {
      const Scenario sc = scenario_from(train_opts);
      const auto rep = run_train(sc, {train_opts.workers});
      const fs::path out = train_opts.out.empty() ? fs::path("model.json") : fs::path(train_opts.out);
      save_model(rep.model, out);
      fs::path loss = out;
      loss.replace_extension(".loss.csv");
      write_csv(loss, "train", sc, loss_history_table(rep));
      std::cout << "dataset: " << rep.samples_drawn << " drawn, " << rep.samples_excluded
                << " infeasible excluded" << (rep.dataset_from_cache ? " (cached)" : "") << "\n";
      std::cout << "train_mse: " << format_number(rep.train_mse) << "\n";
      std::cout << "validation_mse: " << format_number(rep.validation_mse) << "\n";
      std::cout << "model: " << out.string() << " sha256 " << file_digest(out) << "\n";
      std::cout << "loss history: " << loss.string() << "\n";
    } else if (*cmp) {
      Scenario sc = scenario_from(compare_opts);
      const auto model = load_model(model_path);
      const auto t = run_compare(sc, model, {compare_opts.workers});
      emit(compare_opts, "compare.csv", "compare", sc, t);
    } else if (*st) {
      SelftestOptions opts;
      if (selftest_opts.seed) opts.seed = *selftest_opts.seed;
      opts.specfun_tolerance = specfun_tol;
      const auto items = run_selftest(opts, std::cout);
      for (const auto& it : items)
        if (!it.passed) return 2;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
