#include "coopnoma/scenario.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "coopnoma/errors.hpp"

namespace coopnoma {

using nlohmann::json;

namespace {

const char* relay_name(RelayCdfForm f) {
  switch (f) {
    case RelayCdfForm::decode_conditioned: return "decode_conditioned";
    case RelayCdfForm::printed_closed_form: return "printed_closed_form";
    case RelayCdfForm::unconditioned: return "unconditioned";
  }
  return "";
}

const char* eve_name(EveRelayCdfForm f) {
  return f == EveRelayCdfForm::exact ? "exact" : "printed_linear";
}

/// Reads fields out of one JSON object, remembering which keys were used so
/// leftovers can be reported as unknown.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), path_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  template <class T>
  void read(const char* key, T& out) {
    if (!j_.contains(key)) return;
    used_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(field(key) + ": wrong type");
    }
  }

  void read_db(const char* key, double& linear_out) {
    double db = 0.0;
    if (!j_.contains(key)) return;
    read(key, db);
    linear_out = db_to_linear(db);
  }

  Section sub(const char* key) {
    used_.insert(key);
    return Section(j_.at(key), field(key));
  }

  void ignore(const char* key) { used_.insert(key); }

  std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!used_.count(k)) throw ValidationError(field(k.c_str()) + ": unknown field");
    }
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void rethrow_with_field(const std::string& field, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    throw ValidationError(field + ": " + e.what());
  }
}

SweepAxis parse_sweep(Section s) {
  SweepAxis a;
  std::string scale = "linear";
  s.read("variable", a.variable);
  s.read("start", a.start);
  s.read("stop", a.stop);
  s.read("step", a.step);
  s.read("scale", scale);
  s.finish();
  if (scale == "dB" || scale == "db") {
    a.scale = AxisScale::db;
  } else if (scale == "linear") {
    a.scale = AxisScale::linear;
  } else {
    throw ValidationError(s.field("scale") + ": expected \"linear\" or \"dB\"");
  }
  rethrow_with_field("sweep", [&] { a.validate(); });
  return a;
}

}  // namespace

std::vector<double> SweepAxis::points() const {
  std::vector<double> pts;
  const auto n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
  // Snap to a 1e-12 lattice so 0.1 + 2 * 0.1 prints and compares as 0.3.
  for (int k = 0; k <= n; ++k) pts.push_back(std::round((start + k * step) * 1e12) / 1e12);
  return pts;
}

void SweepAxis::validate() const {
  require(variable == "snr_db" || variable == "rho", "variable: expected \"snr_db\" or \"rho\"");
  require(std::isfinite(step) && step > 0.0, "step: must be positive");
  require(std::isfinite(start) && std::isfinite(stop) && stop >= start,
          "stop: must not be below start");
}

SweepAxis default_snr_sweep() { return {"snr_db", 0.0, 30.0, 5.0, AxisScale::db}; }
SweepAxis default_rho_sweep() { return {"rho", 0.1, 0.9, 0.1, AxisScale::linear}; }

void Scenario::validate() const {
  rethrow_with_field("params", [&] { params.validate(); });
  rethrow_with_field("alloc", [&] { alloc.validate(); });
  rethrow_with_field("split", [&] { split.validate(); });
  if (sweep) rethrow_with_field("sweep", [&] { sweep->validate(); });
  require(!eta_series.empty(), "series.eta: must not be empty");
  for (double e : eta_series) require(e > 0.0 && e <= 1.0, "series.eta: values must lie in (0, 1]");
  require(!alpha_f_series.empty(), "series.alpha_f: must not be empty");
  for (double a : alpha_f_series)
    require(a > 0.5 && a < 1.0, "series.alpha_f: values must lie in (0.5, 1)");
  require(mc_trials >= 1000, "mc_trials: at least 1000 trials are required");
  rethrow_with_field("analytical", [&] { analytical.quadrature.validate(); });
  rethrow_with_field("objective", [&] { objective.validate(); });
  require(!hidden.empty(), "network.hidden: at least one hidden layer is required");
  for (int h : hidden) require(h > 0, "network.hidden: layer widths must be positive");
  rethrow_with_field("train", [&] { train.validate(); });
  require(train_samples >= 1, "dataset.train_samples: must be positive");
  require(test_samples >= 1, "dataset.test_samples: must be positive");
  require(timing_repetitions >= 1, "compare.timing_repetitions: must be positive");
}

json Scenario::to_json() const {
  json j = json::object();
  j["params"] = {{"p_tx", params.p_tx},
                 {"n0", params.n0},
                 {"eta", params.eta},
                 {"m", params.m_shape},
                 {"omega_su_n", params.omega_su_n},
                 {"omega_su_f", params.omega_su_f},
                 {"omega_se", params.omega_se},
                 {"omega_un_e", params.omega_un_e},
                 {"omega_un_uf", params.omega_un_uf}};
  j["split"] = {{"rho_n1", split.rho_n1},
                {"rho_f1", split.rho_f1},
                {"rho_e1", split.rho_e1},
                {"rho_f2", split.rho_f2},
                {"rho_e2", split.rho_e2}};
  j["alloc"] = {{"alpha_f", alloc.alpha_f}};
  if (sweep) {
    j["sweep"] = {{"variable", sweep->variable},
                  {"start", sweep->start},
                  {"stop", sweep->stop},
                  {"step", sweep->step},
                  {"scale", sweep->scale == AxisScale::db ? "dB" : "linear"}};
  }
  j["series"] = {{"eta", eta_series}, {"alpha_f", alpha_f_series}};
  j["mc_trials"] = mc_trials;
  j["seed"] = seed;
  j["analytical"] = {{"enabled", analytical_enabled},
                     {"abs_tol", analytical.quadrature.abs_tol},
                     {"rel_tol", analytical.quadrature.rel_tol},
                     {"max_subdivisions", analytical.quadrature.max_subdivisions},
                     {"relay_cdf", relay_name(analytical.relay)},
                     {"eve_relay_cdf", eve_name(analytical.eve_relay)}};
  j["objective"] = {{"alpha_min", objective.alpha_min},
                    {"alpha_max", objective.alpha_max},
                    {"grid_step", objective.grid_step},
                    {"qos_min_rate_near", objective.qos_min_rate_near}};
  j["network"] = {{"hidden", hidden}};
  j["train"] = {{"epochs", train.epochs},
                {"batch_size", train.batch_size},
                {"learning_rate", train.learning_rate},
                {"decay_rate", train.decay_rate},
                {"validation_fraction", train.validation_fraction},
                {"seed", train.seed}};
  j["dataset"] = {{"train_samples", train_samples},
                  {"test_samples", test_samples},
                  {"cache", dataset_cache}};
  j["compare"] = {{"timing_repetitions", timing_repetitions}};
  return j;
}

Scenario Scenario::from_json(const json& root) {
  Scenario sc;
  Section top(root, "");
  if (top.has("params")) {
    auto s = top.sub("params");
    if (s.has("snr_db") && s.has("p_tx"))
      throw ValidationError("params: give either snr_db or p_tx, not both");
    s.read("n0", sc.params.n0);
    s.read("p_tx", sc.params.p_tx);
    if (s.has("snr_db")) {
      double db = 0.0;
      s.read("snr_db", db);
      sc.set_snr_db(db);
    }
    s.read("eta", sc.params.eta);
    s.read("m", sc.params.m_shape);
    if (s.has("omega_db")) {
      double all = 0.0;
      s.read_db("omega_db", all);
      sc.params.omega_su_n = sc.params.omega_su_f = sc.params.omega_se = sc.params.omega_un_e =
          sc.params.omega_un_uf = all;
    }
    s.read("omega_su_n", sc.params.omega_su_n);
    s.read("omega_su_f", sc.params.omega_su_f);
    s.read("omega_se", sc.params.omega_se);
    s.read("omega_un_e", sc.params.omega_un_e);
    s.read("omega_un_uf", sc.params.omega_un_uf);
    s.read_db("omega_su_n_db", sc.params.omega_su_n);
    s.read_db("omega_su_f_db", sc.params.omega_su_f);
    s.read_db("omega_se_db", sc.params.omega_se);
    s.read_db("omega_un_e_db", sc.params.omega_un_e);
    s.read_db("omega_un_uf_db", sc.params.omega_un_uf);
    s.finish();
  }
  if (top.has("split")) {
    auto s = top.sub("split");
    if (s.has("rho")) {
      double rho = 0.0;
      s.read("rho", rho);
      sc.split = PowerSplit::uniform(rho);
    }
    s.read("rho_n1", sc.split.rho_n1);
    s.read("rho_f1", sc.split.rho_f1);
    s.read("rho_e1", sc.split.rho_e1);
    s.read("rho_f2", sc.split.rho_f2);
    s.read("rho_e2", sc.split.rho_e2);
    s.ignore("rho_n2");  // accepted; it enters no link budget
    s.finish();
  }
  if (top.has("alloc")) {
    auto s = top.sub("alloc");
    double af = sc.alloc.alpha_f;
    s.read("alpha_f", af);
    s.finish();
    sc.alloc = PowerAllocation::from_far(af);
  }
  if (top.has("sweep")) sc.sweep = parse_sweep(top.sub("sweep"));
  if (top.has("series")) {
    auto s = top.sub("series");
    s.read("eta", sc.eta_series);
    s.read("alpha_f", sc.alpha_f_series);
    s.finish();
  }
  top.read("mc_trials", sc.mc_trials);
  top.read("seed", sc.seed);
  if (top.has("analytical")) {
    auto s = top.sub("analytical");
    s.read("enabled", sc.analytical_enabled);
    s.read("abs_tol", sc.analytical.quadrature.abs_tol);
    s.read("rel_tol", sc.analytical.quadrature.rel_tol);
    s.read("max_subdivisions", sc.analytical.quadrature.max_subdivisions);
    std::string relay = relay_name(sc.analytical.relay);
    std::string eve = eve_name(sc.analytical.eve_relay);
    s.read("relay_cdf", relay);
    s.read("eve_relay_cdf", eve);
    s.finish();
    if (relay == "decode_conditioned") {
      sc.analytical.relay = RelayCdfForm::decode_conditioned;
    } else if (relay == "printed_closed_form") {
      sc.analytical.relay = RelayCdfForm::printed_closed_form;
    } else if (relay == "unconditioned") {
      sc.analytical.relay = RelayCdfForm::unconditioned;
    } else {
      throw ValidationError(
          "analytical.relay_cdf: expected decode_conditioned, printed_closed_form or unconditioned");
    }
    if (eve == "exact") {
      sc.analytical.eve_relay = EveRelayCdfForm::exact;
    } else if (eve == "printed_linear") {
      sc.analytical.eve_relay = EveRelayCdfForm::printed_linear;
    } else {
      throw ValidationError("analytical.eve_relay_cdf: expected exact or printed_linear");
    }
  }
  if (top.has("objective")) {
    auto s = top.sub("objective");
    s.read("alpha_min", sc.objective.alpha_min);
    s.read("alpha_max", sc.objective.alpha_max);
    s.read("grid_step", sc.objective.grid_step);
    s.read("qos_min_rate_near", sc.objective.qos_min_rate_near);
    s.finish();
  }
  if (top.has("network")) {
    auto s = top.sub("network");
    s.read("hidden", sc.hidden);
    s.finish();
  }
  if (top.has("train")) {
    auto s = top.sub("train");
    s.read("epochs", sc.train.epochs);
    s.read("batch_size", sc.train.batch_size);
    s.read("learning_rate", sc.train.learning_rate);
    s.read("decay_rate", sc.train.decay_rate);
    s.read("validation_fraction", sc.train.validation_fraction);
    s.read("seed", sc.train.seed);
    s.finish();
  }
  if (top.has("dataset")) {
    auto s = top.sub("dataset");
    s.read("train_samples", sc.train_samples);
    s.read("test_samples", sc.test_samples);
    s.read("cache", sc.dataset_cache);
    s.finish();
  }
  if (top.has("compare")) {
    auto s = top.sub("compare");
    s.read("timing_repetitions", sc.timing_repetitions);
    s.finish();
  }
  top.finish();
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::string body = text;
  if (!text.empty() && text.front() == '#') {
    static const std::string tag = "# scenario: ";
    std::istringstream lines(text);
    std::string line;
    body.clear();
    while (std::getline(lines, line)) {
      if (line.rfind(tag, 0) == 0) {
        body = line.substr(tag.size());
        break;
      }
    }
    require(!body.empty(), path.string() + ": no '# scenario:' header line found");
  }
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": not valid JSON: " + e.what());
  }
  return Scenario::from_json(j);
}

}  // namespace coopnoma
