#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "coopnoma/model_io.hpp"
#include "coopnoma/scenario.hpp"

namespace coopnoma {

inline constexpr const char* kToolVersion = "0.1.0";

/// Columns plus preformatted cells.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column by name; throws if absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

/// Fixed, locale-independent formatting used for every numeric cell.
std::string format_number(double v);

/// Writes `# coopnoma <command>`, tool version, timestamp and the scenario
/// JSON as `#` lines, then the table.
void write_csv(std::ostream& out, const std::string& command, const Scenario& scenario,
               const CsvTable& table);
void write_csv(const std::filesystem::path& path, const std::string& command,
               const Scenario& scenario, const CsvTable& table);

/// Everything in a CSV artifact except the timestamp line.
std::string csv_without_timestamp(const std::string& text);

struct RunOptions {
  int workers = 0;
};

/// Intercept probability over transmit SNR for every (eta, alpha_F) pair.
CsvTable run_intercept_vs_snr(Scenario& scenario, const RunOptions& run = {});

/// Intercept probability over a common rho for every (eta, alpha_F) pair,
/// with the gap between the largest and smallest alpha_F series.
CsvTable run_intercept_vs_rho(Scenario& scenario, const RunOptions& run = {});

struct TrainReport {
  StoredModel model;
  std::vector<double> loss_history;
  std::vector<double> validation_history;
  double train_mse = 0.0;
  double validation_mse = 0.0;
  std::int64_t samples_drawn = 0;
  std::int64_t samples_excluded = 0;
  bool dataset_from_cache = false;
};

/// Generates (or reloads from the cache) the training set and trains the
/// configured network.
TrainReport run_train(const Scenario& scenario, const RunOptions& run = {});

CsvTable loss_history_table(const TrainReport& report);

/// Realizations of the held-out test set (independent stream of the seed).
std::vector<ChannelRealization> test_channels(const Scenario& scenario, int workers = 0);

/// Mean achieved far-user rate per rho under oracle search, model
/// inference and uniform random allocation, with median wall-clock times.
CsvTable run_compare(Scenario& scenario, const StoredModel& model, const RunOptions& run = {});

/// Median wall-clock seconds of `reps` batch-inference passes over the
/// realizations (feature construction included).
double time_inference(const StoredModel& model, const std::vector<ChannelRealization>& channels,
                      const SystemParams& params, const PowerSplit& split, int reps);

struct SelftestOptions {
  std::uint64_t seed = 7;
  /// Test hook: overrides the special-function convergence tolerance.
  double specfun_tolerance = 0.0;
};

struct SelftestItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<SelftestItem> run_selftest(const SelftestOptions& opts, std::ostream& report);

}  // namespace coopnoma
