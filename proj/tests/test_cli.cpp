#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "coopnoma/experiments.hpp"
#include "coopnoma/model_io.hpp"

namespace fs = std::filesystem;
using namespace coopnoma;

namespace {

struct Run {
  int status;
  std::string output;
};

Run run_cli(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "coopnoma_cli_test.log";
  const std::string cmd = std::string(COOPNOMA_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::ostringstream os;
  os << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, os.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    ++n;
  }
  return n;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("intercept-vs-snr grid") {
  const fs::path out = fs::temp_directory_path() / "cli_snr.csv";
  const auto r = run_cli("intercept-vs-snr --trials 2000 --out " + out.string());
  REQUIRE(r.status == 0);
  const auto text = slurp(out);
  CHECK(data_rows(text) == 28);
  CHECK(text.rfind("# coopnoma intercept-vs-snr", 0) == 0);
  CHECK(text.find("snr_db,eta,alpha_f,p_int_mc,p_int_mc_stderr,p_int_analytical") != std::string::npos);
  CHECK(text.find("\"seed\":1") != std::string::npos);
}

TEST_CASE("intercept-vs-rho grid") {
  const fs::path out = fs::temp_directory_path() / "cli_rho.csv";
  const auto r = run_cli("intercept-vs-rho --trials 2000 --out " + out.string());
  REQUIRE(r.status == 0);
  // 9 rho points for each of the 2 x 2 series
  CHECK(data_rows(slurp(out)) == 36);
}

TEST_CASE("a CSV rerun from its own header is identical apart from the timestamp") {
  const fs::path a = fs::temp_directory_path() / "cli_rerun_a.csv";
  const fs::path b = fs::temp_directory_path() / "cli_rerun_b.csv";
  REQUIRE(run_cli("intercept-vs-snr --trials 3000 --seed 5 --workers 1 --out " + a.string()).status == 0);
  REQUIRE(run_cli("intercept-vs-snr --config " + a.string() + " --workers 2 --out " + b.string()).status == 0);
  CHECK(csv_without_timestamp(slurp(a)) == csv_without_timestamp(slurp(b)));
}

TEST_CASE("analytical failures are recorded per row") {
  const auto cfg = write_config("cli_m15.json", R"({"params": {"m": 1.5}, "mc_trials": 2000,
      "sweep": {"variable": "snr_db", "start": 0, "stop": 5, "step": 5}})");
  const fs::path out = fs::temp_directory_path() / "cli_m15.csv";
  REQUIRE(run_cli("intercept-vs-snr --config " + cfg.string() + " --out " + out.string()).status == 0);
  const auto text = slurp(out);
  CHECK(data_rows(text) == 8);
  CHECK(text.find(",,unsupported_input") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run_cli("no-such-command").status == 1);
  const auto bad = write_config("cli_bad.json", R"({"params": {"eta": 2.0}})");
  const auto r = run_cli("intercept-vs-snr --config " + bad.string());
  CHECK(r.status == 1);
  CHECK(r.output.find("params") != std::string::npos);
  CHECK(run_cli("intercept-vs-snr --trials 10").status == 1);
}

TEST_CASE("selftest") {
  const auto ok = run_cli("selftest");
  CHECK(ok.status == 0);
  CHECK(ok.output.find("seed: 7") != std::string::npos);
  CHECK(ok.output.find("tool_version: ") != std::string::npos);
  CHECK(ok.output.find("FAIL") == std::string::npos);

  const auto broken = run_cli("selftest --specfun-tolerance 0.3");
  CHECK(broken.status != 0);
  CHECK(broken.output.find("FAIL specfun identities") != std::string::npos);
}

TEST_CASE("train and compare on a small configuration") {
  const auto cfg = write_config("cli_small.json", R"({
    "network": {"hidden": [16, 8]},
    "train": {"epochs": 3},
    "dataset": {"train_samples": 2000, "test_samples": 500},
    "sweep": {"variable": "rho", "start": 0.2, "stop": 0.4, "step": 0.1},
    "compare": {"timing_repetitions": 1}
  })");
  const fs::path model = fs::temp_directory_path() / "cli_small_model.json";
  const auto first = run_cli("train --config " + cfg.string() + " --out " + model.string());
  REQUIRE(first.status == 0);
  CHECK(first.output.find("validation_mse") != std::string::npos);
  const auto digest = file_digest(model);
  REQUIRE(run_cli("train --config " + cfg.string() + " --workers 2 --out " + model.string()).status == 0);
  CHECK(file_digest(model) == digest);

  fs::path loss = model;
  loss.replace_extension(".loss.csv");
  CHECK(data_rows(slurp(loss)) == 3);

  const fs::path out = fs::temp_directory_path() / "cli_small_compare.csv";
  REQUIRE(run_cli("compare --config " + cfg.string() + " --model " + model.string() + " --out " + out.string())
              .status == 0);
  const auto text = slurp(out);
  CHECK(data_rows(text) == 3);
  CHECK(text.find("rho,rate_oracle,rate_dl,rate_random,time_oracle_s,time_dl_s") != std::string::npos);

  // A model whose input layer does not match the feature vector.
  const std::array<int, 1> hidden{4};
  StoredModel wrong{Mlp<double>::he_initialized(3, hidden, 1), {}};
  wrong.stats.mean = Vector<double>::Zero(3);
  wrong.stats.scale = Vector<double>::Ones(3);
  const fs::path bad = fs::temp_directory_path() / "cli_wrong_model.json";
  save_model(wrong, bad);
  const auto mismatch = run_cli("compare --config " + cfg.string() + " --model " + bad.string());
  CHECK(mismatch.status == 1);
  CHECK(mismatch.output.find("feature dimension") != std::string::npos);
}
