#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopnoma/optimizer.hpp"
#include "coopnoma/secrecy.hpp"
#include "coopnoma/system_model.hpp"
#include "coopnoma/training.hpp"

namespace coopnoma {

enum class AxisScale { linear, db };

/// One swept variable: start, start + step, ... up to stop (inclusive).
struct SweepAxis {
  std::string variable;  ///< "snr_db" or "rho"
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;
  AxisScale scale = AxisScale::linear;

  std::vector<double> points() const;
  void validate() const;
};

/// Everything one CLI run depends on. Defaults are the nominal operating
/// point: P/N0 = 10 dB, N0 = 1, every mean gain 5 dB, every rho 0.3,
/// eta = 0.7, alpha_F = 0.8, Rayleigh fading.
struct Scenario {
  SystemParams params{};
  PowerAllocation alloc{};
  PowerSplit split{};
  std::optional<SweepAxis> sweep;
  std::vector<double> eta_series{0.5, 0.9};
  std::vector<double> alpha_f_series{0.6, 0.9};
  std::int64_t mc_trials = 1'000'000;
  std::uint64_t seed = 1;

  bool analytical_enabled = true;
  AnalyticalOptions analytical{};

  ObjectiveConfig objective{};
  std::vector<int> hidden{200, 100};
  TrainConfig train{};
  std::int64_t train_samples = 30000;
  std::int64_t test_samples = 6000;
  std::string dataset_cache;  ///< empty = no cache
  int timing_repetitions = 5;

  double snr_db() const { return linear_to_db(params.tx_snr()); }
  void set_snr_db(double db) { params.p_tx = params.n0 * db_to_linear(db); }

  void validate() const;
  /// Canonical, complete JSON form (all fields, fixed key order).
  nlohmann::json to_json() const;
  /// Overlays `j` on the defaults; unknown keys and invalid values raise
  /// ValidationError naming the offending field.
  static Scenario from_json(const nlohmann::json& j);
};

/// Reads a scenario from a JSON config file, or from the `# scenario:`
/// header line of a CSV artifact written by this tool.
Scenario load_scenario(const std::filesystem::path& path);

SweepAxis default_snr_sweep();
SweepAxis default_rho_sweep();

}  // namespace coopnoma
