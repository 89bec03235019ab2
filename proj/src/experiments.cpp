#include "coopnoma/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "coopnoma/errors.hpp"
#include "coopnoma/random.hpp"

namespace coopnoma {

using nlohmann::json;

namespace {

constexpr std::uint64_t kTestStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kRandomStream = 0xC2B2AE3D27D4EB4FULL;
constexpr std::uint64_t kInitStream = 0x165667B19E3779F9ULL;

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <class Fn>
double median_seconds(int reps, Fn&& fn) {
  std::vector<double> t;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

struct AnalyticalCell {
  std::string value;
  std::string status;
};

AnalyticalCell analytical_cell(const Scenario& sc, const SystemParams& p,
                               const PowerAllocation& a, const PowerSplit& s) {
  if (!sc.analytical_enabled) return {"", "disabled"};
  try {
    return {format_number(intercept_probability_analytical(p, a, s, sc.analytical).value), "ok"};
  } catch (const ValidationError&) {
    return {"", "unsupported_input"};
  } catch (const NumericalError&) {
    return {"", "numerical_failure"};
  }
}

json dataset_key(const Scenario& sc) {
  json k = sc.to_json();
  return {{"params", k["params"]}, {"split", k["split"]}, {"objective", k["objective"]},
          {"n", sc.train_samples}, {"seed", sc.seed}};
}

std::optional<Dataset> load_cached_dataset(const Scenario& sc) {
  if (sc.dataset_cache.empty() || !std::filesystem::exists(sc.dataset_cache)) return std::nullopt;
  std::ifstream in(sc.dataset_cache);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (!j.contains("key") || j["key"] != dataset_key(sc)) return std::nullopt;
  std::vector<ChannelRealization> channels;
  std::vector<double> labels = j.at("labels").get<std::vector<double>>();
  for (const auto& c : j.at("channels")) {
    const auto g = c.get<std::vector<double>>();
    require(g.size() == 5, "dataset cache: malformed realization");
    channels.push_back({g[0], g[1], g[2], g[3], g[4]});
  }
  Dataset d = assemble_dataset(std::move(channels),
                               Eigen::Map<const Vector<double>>(labels.data(),
                                                                static_cast<Eigen::Index>(labels.size())),
                               sc.params, sc.split);
  d.drawn = j.at("drawn").get<std::int64_t>();
  d.excluded_infeasible = j.at("excluded_infeasible").get<std::int64_t>();
  return d;
}

void store_dataset(const Scenario& sc, const Dataset& d) {
  json channels = json::array();
  for (const auto& c : d.channels) channels.push_back({c.g_su_n, c.g_su_f, c.g_se, c.g_un_e, c.g_un_uf});
  json j;
  j["key"] = dataset_key(sc);
  j["drawn"] = d.drawn;
  j["excluded_infeasible"] = d.excluded_infeasible;
  j["labels"] = std::vector<double>(d.labels.data(), d.labels.data() + d.labels.size());
  j["channels"] = std::move(channels);
  std::ofstream out(sc.dataset_cache);
  require(static_cast<bool>(out), "cannot write dataset cache " + sc.dataset_cache);
  out << j.dump() << "\n";
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  require(it != columns.end(), "csv: no column named " + name);
  return static_cast<std::size_t>(it - columns.begin());
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const auto& cell = rows.at(row).at(column(name));
  return cell.empty() ? std::nan("") : std::stod(cell);
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_csv(std::ostream& out, const std::string& command, const Scenario& scenario,
               const CsvTable& table) {
  out << "# coopnoma " << command << "\n";
  out << "# tool_version: " << kToolVersion << "\n";
  out << "# timestamp: " << timestamp_utc() << "\n";
  out << "# scenario: " << scenario.to_json().dump() << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_csv(const std::filesystem::path& path, const std::string& command,
               const Scenario& scenario, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path.string());
  write_csv(out, command, scenario, table);
}

std::string csv_without_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# timestamp:", 0) == 0) continue;
    out << line << "\n";
  }
  return out.str();
}

CsvTable run_intercept_vs_snr(Scenario& sc, const RunOptions& run) {
  if (!sc.sweep) sc.sweep = default_snr_sweep();
  require(sc.sweep->variable == "snr_db", "sweep.variable: intercept-vs-snr sweeps snr_db");
  sc.validate();

  CsvTable t;
  t.columns = {"snr_db", "eta", "alpha_f", "p_int_mc", "p_int_mc_stderr", "p_int_analytical",
               "analytical_status"};
  for (double snr_db : sc.sweep->points()) {
    for (double eta : sc.eta_series) {
      for (double af : sc.alpha_f_series) {
        SystemParams p = sc.params;
        p.eta = eta;
        p.p_tx = p.n0 * db_to_linear(snr_db);
        const auto alloc = PowerAllocation::from_far(af);
        const auto mc = intercept_probability_mc(p, alloc, sc.split,
                                                 {sc.mc_trials, sc.seed, run.workers});
        const auto an = analytical_cell(sc, p, alloc, sc.split);
        t.rows.push_back({format_number(snr_db), format_number(eta), format_number(af),
                          format_number(mc.value), format_number(mc.std_error), an.value,
                          an.status});
      }
    }
  }
  return t;
}

CsvTable run_intercept_vs_rho(Scenario& sc, const RunOptions& run) {
  if (!sc.sweep) sc.sweep = default_rho_sweep();
  require(sc.sweep->variable == "rho", "sweep.variable: intercept-vs-rho sweeps rho");
  sc.validate();

  const auto [lo_it, hi_it] = std::minmax_element(sc.alpha_f_series.begin(), sc.alpha_f_series.end());
  const double alpha_lo = *lo_it;
  const double alpha_hi = *hi_it;

  CsvTable t;
  t.columns = {"rho", "eta", "alpha_f", "p_int_mc", "p_int_mc_stderr", "p_int_analytical",
               "analytical_status", "gap_mc"};
  for (double rho : sc.sweep->points()) {
    const auto split = PowerSplit::uniform(rho);
    for (double eta : sc.eta_series) {
      SystemParams p = sc.params;
      p.eta = eta;
      std::vector<std::vector<std::string>> rows;
      double p_lo = 0.0;
      double p_hi = 0.0;
      for (double af : sc.alpha_f_series) {
        const auto alloc = PowerAllocation::from_far(af);
        const auto mc = intercept_probability_mc(p, alloc, split, {sc.mc_trials, sc.seed, run.workers});
        if (af == alpha_lo) p_lo = mc.value;
        if (af == alpha_hi) p_hi = mc.value;
        const auto an = analytical_cell(sc, p, alloc, split);
        rows.push_back({format_number(rho), format_number(eta), format_number(af),
                        format_number(mc.value), format_number(mc.std_error), an.value, an.status});
      }
      // Separation between the largest and smallest alpha_F series.
      for (auto& r : rows) {
        r.push_back(format_number(p_hi - p_lo));
        t.rows.push_back(std::move(r));
      }
    }
  }
  return t;
}

TrainReport run_train(const Scenario& sc, const RunOptions& run) {
  sc.validate();
  TrainReport rep;
  std::optional<Dataset> data = load_cached_dataset(sc);
  rep.dataset_from_cache = data.has_value();
  if (!data) {
    data = generate_dataset(sc.params, sc.split, sc.objective, sc.train_samples, sc.seed, run.workers);
    if (!sc.dataset_cache.empty()) store_dataset(sc, *data);
  }
  rep.samples_drawn = data->drawn;
  rep.samples_excluded = data->excluded_infeasible;

  auto net = Mlp<double>::he_initialized(kFeatureCount, sc.hidden, sc.train.seed ^ kInitStream);
  auto result = train(std::move(net), *data, sc.train);
  rep.model = {std::move(result.net), data->stats};
  rep.loss_history = std::move(result.loss_history);
  rep.validation_history = std::move(result.validation_history);
  rep.train_mse = result.train_mse;
  rep.validation_mse = result.validation_mse;
  return rep;
}

CsvTable loss_history_table(const TrainReport& rep) {
  CsvTable t;
  t.columns = {"epoch", "train_mse", "validation_mse"};
  for (std::size_t e = 0; e < rep.loss_history.size(); ++e) {
    const double v = e < rep.validation_history.size() ? rep.validation_history[e] : std::nan("");
    t.rows.push_back({std::to_string(e + 1), format_number(rep.loss_history[e]), format_number(v)});
  }
  return t;
}

std::vector<ChannelRealization> test_channels(const Scenario& sc, int workers) {
  const std::int64_t n = sc.test_samples;
  std::vector<ChannelRealization> out(static_cast<std::size_t>(n));
  parallel_blocks(block_count(n), workers, [&](std::int64_t b) {
    Rng rng = make_stream(sc.seed ^ kTestStream, static_cast<std::uint64_t>(b));
    const std::int64_t end = std::min(n, (b + 1) * kBlockSize);
    for (std::int64_t i = b * kBlockSize; i < end; ++i)
      out[static_cast<std::size_t>(i)] = sample_channels(sc.params, rng);
  });
  return out;
}

double time_inference(const StoredModel& model, const std::vector<ChannelRealization>& channels,
                      const SystemParams& params, const PowerSplit& split, int reps) {
  double sink = 0.0;
  const double t = median_seconds(reps, [&] {
    sink += forward_batch(model.net, feature_matrix(channels, params, split, model.stats)).sum();
  });
  require(std::isfinite(sink), "inference produced non-finite outputs");
  return t;
}

CsvTable run_compare(Scenario& sc, const StoredModel& model, const RunOptions& run) {
  if (!sc.sweep) sc.sweep = default_rho_sweep();
  require(sc.sweep->variable == "rho", "sweep.variable: compare sweeps rho");
  sc.validate();
  require(model.net.input_dim() == kFeatureCount,
          "model: feature dimension " + std::to_string(model.net.input_dim()) +
              " does not match the scenario's " + std::to_string(kFeatureCount) + " link features");

  const auto channels = test_channels(sc, run.workers);

  CsvTable t;
  t.columns = {"rho",         "rate_oracle",      "rate_dl",          "rate_random",
               "time_oracle_s", "time_dl_s",      "dl_to_oracle",     "n_scored",
               "n_infeasible",  "qos_violation_dl", "qos_violation_random"};
  for (double rho : sc.sweep->points()) {
    const auto split = PowerSplit::uniform(rho);

    std::vector<OptResult> oracle;
    const double time_oracle = median_seconds(sc.timing_repetitions, [&] {
      oracle.clear();
      oracle.reserve(channels.size());
      for (const auto& ch : channels) oracle.push_back(oracle_search(ch, sc.params, split, sc.objective));
    });

    const double time_dl = time_inference(model, channels, sc.params, split, sc.timing_repetitions);
    const auto alphas = forward_batch(model.net, feature_matrix(channels, sc.params, split, model.stats));

    // Realizations with no QoS-feasible allocation are left out of every mean.
    Rng rng = make_stream(sc.seed ^ kRandomStream, 0);
    double oracle_sum = 0.0, dl_sum = 0.0, random_sum = 0.0;
    std::int64_t scored = 0, viol_dl = 0, viol_random = 0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      const double u = random_allocation(rng);
      if (!oracle[i].feasible) continue;
      const auto& ch = channels[i];
      const double a = alphas(static_cast<Eigen::Index>(i));
      ++scored;
      oracle_sum += oracle[i].objective_value;
      dl_sum += far_rate_objective(a, ch, sc.params, split);
      random_sum += far_rate_objective(u, ch, sc.params, split);
      viol_dl += near_rate(a, ch, sc.params, split) < sc.objective.qos_min_rate_near;
      viol_random += near_rate(u, ch, sc.params, split) < sc.objective.qos_min_rate_near;
    }
    require(scored > 0, "compare: no test realization admits a feasible allocation at rho " +
                            format_number(rho));
    const double n = static_cast<double>(scored);
    const double rate_oracle = oracle_sum / n;
    const double rate_dl = dl_sum / n;
    t.rows.push_back({format_number(rho), format_number(rate_oracle), format_number(rate_dl),
                      format_number(random_sum / n), format_number(time_oracle),
                      format_number(time_dl), format_number(rate_dl / rate_oracle),
                      std::to_string(scored),
                      std::to_string(static_cast<std::int64_t>(channels.size()) - scored),
                      format_number(viol_dl / n), format_number(viol_random / n)});
  }
  return t;
}

}  // namespace coopnoma
