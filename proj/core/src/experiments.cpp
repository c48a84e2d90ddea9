// Copyright 2026 The seqtherm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "seqtherm/experiments.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "seqtherm/bayes.hpp"
#include "seqtherm/fisher.hpp"
#include "seqtherm/parallel.hpp"
#include "seqtherm/protocol.hpp"

#ifndef SEQTHERM_VERSION
#define SEQTHERM_VERSION "unknown"
#endif

namespace seqtherm {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::pair<Scenario, std::string>>& scenario_names() {
  static const std::vector<std::pair<Scenario, std::string>> names{
      {Scenario::kThermalize, "thermalize"},
      {Scenario::kT95Map, "t95-map"},
      {Scenario::kStaticFi, "static-fi"},
      {Scenario::kQfiScan, "qfi-scan"},
      {Scenario::kWeakRegime, "weak-regime"},
      {Scenario::kIntermediateRegime, "intermediate-regime"},
      {Scenario::kKappaSweep, "kappa-sweep"},
      {Scenario::kNseqStar, "nseq-star"},
      {Scenario::kBayes, "bayes"},
  };
  return names;
}

}  // namespace

std::string to_string(Scenario s) {
  for (const auto& [v, name] : scenario_names()) {
    if (v == s) return name;
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  std::string valid;
  for (const auto& [v, n] : scenario_names()) {
    if (n == name) return v;
    valid += (valid.empty() ? "" : ", ") + n;
  }
  throw ValidationError("field 'scenario': unknown scenario '" + name + "' (valid: " + valid + ")");
}

std::string version() { return SEQTHERM_VERSION; }

// ---------------------------------------------------------------------------
// Validation

namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError("field '" + field + "': " + what);
}

bool needs_tau(Scenario s) {
  return s == Scenario::kWeakRegime || s == Scenario::kIntermediateRegime || s == Scenario::kKappaSweep ||
         s == Scenario::kNseqStar || s == Scenario::kBayes;
}

}  // namespace

void ExperimentConfig::validate() const {
  require(!n_spins.empty(), "n_spins", "must not be empty");
  for (int n : n_spins) ChainParams{n, coupling}.validate();
  require(coupling > 0.0 && std::isfinite(coupling), "coupling", "must be positive");
  const bool t_star_only = include_t_star && temperatures.empty();
  require(!temperatures.empty() || t_star_only, "temperatures", "must not be empty");
  for (double t : temperatures) require(t > 0.0 && std::isfinite(t), "temperatures", "values must be positive");
  require(!kappas.empty(), "kappas", "must not be empty");
  for (double k : kappas) require(k >= 0.0 && std::isfinite(k), "kappas", "values must be >= 0");
  require(!(tau && tau_per_spin), "tau", "give either tau or tau_per_spin, not both");
  if (tau) require(*tau > 0.0 && std::isfinite(*tau), "tau", "must be positive");
  if (tau_per_spin) require(*tau_per_spin > 0.0 && std::isfinite(*tau_per_spin), "tau_per_spin", "must be positive");
  if (needs_tau(scenario)) {
    require(tau.has_value() || tau_per_spin.has_value(), "tau", "scenario " + to_string(scenario) +
                                                                    " needs tau or tau_per_spin");
  }
  require(n_seq >= 1, "n_seq", "must be >= 1");
  require(mc_samples >= 1, "mc_samples", "must be >= 1");
  require(exact_limit >= 1 && exact_limit <= kMaxExactDepth, "exact_limit", "must be in [1, 20]");
  require(dt > 0.0 && t_max > 0.0 && dt <= t_max, "dt", "need 0 < dt <= t_max");
  require(measured_qubits == "all" || measured_qubits == "half", "measured_qubits",
          "must be \"all\" or \"half\"");
  require(posterior_grid.size() == 3, "posterior_grid", "must be [lo, hi, points]");
  require(posterior_grid[0] > 0.0 && posterior_grid[1] > posterior_grid[0], "posterior_grid",
          "need 0 < lo < hi");
  require(posterior_grid[2] >= 2.0 && posterior_grid[2] == std::floor(posterior_grid[2]), "posterior_grid",
          "points must be an integer >= 2");

  if (scenario == Scenario::kThermalize || scenario == Scenario::kT95Map || scenario == Scenario::kBayes) {
    require(!temperatures.empty(), "temperatures", "scenario " + to_string(scenario) + " needs explicit temperatures");
  }

  switch (scenario) {
    case Scenario::kBayes: {
      if (trajectories <= 0) throw ValidationError("field 'trajectories': M must be positive");
      require(datasets >= 1, "datasets", "must be >= 1");
      for (int n : n_values) require(n >= 1 && n <= n_seq, "n_values", "entries must be in [1, n_seq]");
      if (n_seq > kMaxExactDepth) {
        throw ResourceError("field 'n_seq': the Bayesian likelihood needs exact trees; n_seq>20 requires monte-carlo");
      }
      break;
    }
    case Scenario::kIntermediateRegime:
    case Scenario::kKappaSweep:
      if (n_seq > kMaxExactDepth && scenario == Scenario::kKappaSweep) {
        throw ResourceError("field 'n_seq': kappa-sweep uses exact trees; n_seq>20 requires monte-carlo");
      }
      break;
    default:
      break;
  }
}

double ExperimentConfig::tau_for(int n) const {
  if (tau) return *tau;
  if (tau_per_spin) return *tau_per_spin * n / coupling;
  throw ValidationError("field 'tau': not set");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

std::vector<double> read_grid(const Json& v, const std::string& field) {
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& x : v) {
      require(x.is_number(), field, "array entries must be numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  if (v.is_object() && v.size() == 1 && v.contains("linspace")) {
    const auto& l = v["linspace"];
    require(l.is_array() && l.size() == 3 && l[0].is_number() && l[1].is_number() && l[2].is_number_integer(),
            field, "linspace must be [lo, hi, count]");
    const auto count = l[2].get<std::int64_t>();
    require(count >= 1, field, "linspace count must be >= 1");
    return linspace(l[0].get<double>(), l[1].get<double>(), static_cast<std::size_t>(count));
  }
  throw ValidationError("field '" + field + "': expected a number, an array or {\"linspace\": [lo, hi, count]}");
}

template <class T>
T read_as(const Json& v, const std::string& field) {
  try {
    if constexpr (std::is_same_v<T, std::string>) {
      require(v.is_string(), field, "expected a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      require(v.is_boolean(), field, "expected true or false");
    } else if constexpr (std::is_integral_v<T>) {
      require(v.is_number_integer(), field, "expected an integer");
    } else {
      require(v.is_number(), field, "expected a number");
    }
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("field '" + field + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config syntax error at line " + std::to_string(line_of_offset(text, e.byte)) + ": " +
                          e.what());
  }
  require(j.is_object(), "<root>", "config must be a JSON object");

  ExperimentConfig c;
  require(j.contains("scenario"), "scenario", "is required");
  for (const auto& [key, v] : j.items()) {
    if (key == "scenario") {
      c.scenario = parse_scenario(read_as<std::string>(v, key));
    } else if (key == "n_spins") {
      c.n_spins.clear();
      if (v.is_number_integer()) {
        c.n_spins.push_back(v.get<int>());
      } else {
        require(v.is_array(), key, "expected an integer or an array of integers");
        for (const auto& x : v) c.n_spins.push_back(read_as<int>(x, key));
      }
    } else if (key == "coupling") {
      c.coupling = read_as<double>(v, key);
    } else if (key == "temperatures") {
      c.temperatures = read_grid(v, key);
    } else if (key == "include_t_star") {
      c.include_t_star = read_as<bool>(v, key);
    } else if (key == "kappas") {
      c.kappas = read_grid(v, key);
    } else if (key == "tau") {
      if (!v.is_null()) c.tau = read_as<double>(v, key);
    } else if (key == "tau_per_spin") {
      if (!v.is_null()) c.tau_per_spin = read_as<double>(v, key);
    } else if (key == "n_seq") {
      c.n_seq = read_as<int>(v, key);
    } else if (key == "mc_samples") {
      c.mc_samples = read_as<std::int64_t>(v, key);
    } else if (key == "trajectories") {
      c.trajectories = read_as<std::int64_t>(v, key);
    } else if (key == "datasets") {
      c.datasets = read_as<int>(v, key);
    } else if (key == "n_values") {
      require(v.is_array(), key, "expected an array of integers");
      c.n_values.clear();
      for (const auto& x : v) c.n_values.push_back(read_as<int>(x, key));
    } else if (key == "measured_qubits") {
      c.measured_qubits = read_as<std::string>(v, key);
    } else if (key == "t_max") {
      c.t_max = read_as<double>(v, key);
    } else if (key == "dt") {
      c.dt = read_as<double>(v, key);
    } else if (key == "exact_limit") {
      c.exact_limit = read_as<int>(v, key);
    } else if (key == "posterior_grid") {
      c.posterior_grid = read_grid(v, key);
    } else if (key == "jump_grouping") {
      c.jump_grouping = parse_jump_grouping(read_as<std::string>(v, key));
    } else if (key == "seed") {
      require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), key,
              "expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "name") {
      c.name = read_as<std::string>(v, key);
    } else if (key == "unspecified") {
      require(v.is_array(), key, "expected an array of strings");
      c.unspecified.clear();
      for (const auto& x : v) c.unspecified.push_back(read_as<std::string>(x, key));
    } else {
      throw ValidationError("field '" + key + "': unknown field");
    }
  }
  if (c.name.empty()) c.name = to_string(c.scenario);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& c) {
  Json j;
  j["scenario"] = to_string(c.scenario);
  j["n_spins"] = c.n_spins;
  j["coupling"] = c.coupling;
  j["temperatures"] = c.temperatures;
  j["include_t_star"] = c.include_t_star;
  j["kappas"] = c.kappas;
  j["tau"] = c.tau ? Json(*c.tau) : Json(nullptr);
  j["tau_per_spin"] = c.tau_per_spin ? Json(*c.tau_per_spin) : Json(nullptr);
  j["n_seq"] = c.n_seq;
  j["mc_samples"] = c.mc_samples;
  j["trajectories"] = c.trajectories;
  j["datasets"] = c.datasets;
  j["n_values"] = c.n_values;
  j["measured_qubits"] = c.measured_qubits;
  j["t_max"] = c.t_max;
  j["dt"] = c.dt;
  j["exact_limit"] = c.exact_limit;
  j["posterior_grid"] = c.posterior_grid;
  j["jump_grouping"] = to_string(c.jump_grouping);
  j["seed"] = c.seed;
  j["name"] = c.name;
  j["unspecified"] = c.unspecified;
  return j.dump();
}

// ---------------------------------------------------------------------------
// Presets

namespace {

ExperimentConfig make(Scenario s, const std::string& name) {
  ExperimentConfig c;
  c.scenario = s;
  c.name = name;
  return c;
}

}  // namespace

std::vector<std::string> preset_ids() {
  return {"fig1a", "fig1b", "fig3a", "fig3b", "fig4", "fig5", "fig6a", "fig6b", "fig7", "fig8", "figA1", "figA2"};
}

ExperimentConfig preset(const std::string& id, std::uint64_t seed) {
  ExperimentConfig c;
  if (id == "fig1a") {
    c = make(Scenario::kThermalize, id);
    c.n_spins = {4};
    c.temperatures = {1.0};
    c.kappas = {1.0};
    c.t_max = 200.0;
    c.dt = 0.5;
    c.unspecified = {"t_max", "dt", "seed"};
  } else if (id == "fig1b") {
    c = make(Scenario::kT95Map, id);
    c.n_spins = {4};
    c.kappas = linspace(0.5, 3.0, 6);
    c.temperatures = linspace(0.5, 3.0, 6);
    c.t_max = 1000.0;
    c.dt = 0.25;
    c.unspecified = {"kappas", "temperatures", "t_max", "dt"};
  } else if (id == "fig3a") {
    c = make(Scenario::kStaticFi, id);
    c.n_spins = {2, 4, 6, 8};
    c.temperatures = {0.2};
    c.measured_qubits = "all";
    c.unspecified = {"n_spins"};
  } else if (id == "fig3b") {
    c = make(Scenario::kStaticFi, id);
    c.n_spins = {2, 4, 6, 8};
    c.temperatures = linspace(0.05, 2.0, 40);
    c.measured_qubits = "half";
    c.unspecified = {"n_spins", "temperatures"};
  } else if (id == "fig4") {
    c = make(Scenario::kQfiScan, id);
    c.n_spins = {2, 3, 4, 5, 6, 7, 8};
    c.temperatures = linspace(0.02, 2.0, 100);
    c.unspecified = {"n_spins", "temperatures"};
  } else if (id == "fig5") {
    c = make(Scenario::kWeakRegime, id);
    c.n_spins = {2, 3, 4, 5, 6};
    c.temperatures = {0.3};
    c.include_t_star = true;
    c.kappas = {0.0};
    c.tau_per_spin = 1.0;
    c.n_seq = 50;
    c.mc_samples = 1000;
    c.unspecified = {"n_spins", "tau_per_spin", "n_seq", "mc_samples"};
  } else if (id == "fig6a" || id == "fig6b") {
    c = make(Scenario::kIntermediateRegime, id);
    c.n_spins = {4};
    c.kappas = {id == "fig6a" ? 0.5 : 1.0};
    c.tau_per_spin = 1.0;
    c.temperatures = linspace(0.05, 1.0, 39);
    c.n_seq = 10;
    c.unspecified = {"temperatures", "n_seq"};
  } else if (id == "fig7") {
    c = make(Scenario::kKappaSweep, id);
    c.n_spins = {4};
    c.tau_per_spin = 2.0;
    c.temperatures = {0.3};
    c.include_t_star = true;
    c.kappas = linspace(0.1, 5.0, 50);
    c.n_seq = 8;
    c.unspecified = {"kappas", "n_seq"};
  } else if (id == "fig8") {
    c = make(Scenario::kNseqStar, id);
    c.n_spins = {4};
    c.kappas = {1.0};
    c.tau_per_spin = 1.0;
    c.temperatures = linspace(0.1, 1.0, 10);
    c.n_seq = 40;
    c.exact_limit = 12;
    c.mc_samples = 1000;
    c.unspecified = {"temperatures", "n_seq", "exact_limit", "mc_samples"};
  } else if (id == "figA1" || id == "figA2") {
    c = make(Scenario::kBayes, id);
    c.temperatures = {0.3};
    c.tau_per_spin = 1.0;
    if (id == "figA1") {
      c.n_spins = {8};
      c.kappas = {0.0};
      c.trajectories = 5000;
      c.n_seq = 4;
      c.unspecified = {"tau_per_spin", "n_seq", "posterior_grid"};
    } else {
      c.n_spins = {4};
      c.kappas = {1.0};
      c.trajectories = 500;
      c.n_seq = 10;
      c.unspecified = {"tau_per_spin", "n_seq", "posterior_grid"};
    }
  } else {
    std::string valid;
    for (const auto& p : preset_ids()) valid += (valid.empty() ? "" : ", ") + p;
    throw ValidationError("unknown figure id '" + id + "'; valid ids: " + valid);
  }
  c.seed = seed;
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Output

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw ValidationError("table " + name + ": row has " + std::to_string(row.size()) + " values for " +
                          std::to_string(columns.size()) + " columns");
  }
  rows.push_back(std::move(row));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

void write_csv(std::ostream& os, const ResultTable& table, const ExperimentConfig& cfg,
               const std::string& timestamp) {
  os << "# seqtherm " << version() << '\n';
  os << "# table: " << table.name << '\n';
  os << "# config: " << to_json(cfg) << '\n';
  os << "# seed: " << cfg.seed << '\n';
  os << "# timestamp: " << timestamp << '\n';
  os << "# units: temperature and energy in J (k_B = hbar = 1); time in 1/J; Fisher information in 1/J^2\n";
  os << "# logarithms are natural; entropies in nats\n";
  os << "# columns:";
  for (const Column& c : table.columns) os << ' ' << c.name << '[' << c.unit << ']';
  os << '\n';
  if (!cfg.unspecified.empty()) {
    os << "# unspecified by the source, set by default:";
    for (const auto& f : cfg.unspecified) os << ' ' << f;
    os << '\n';
  }
  for (const auto& n : table.notes) os << "# " << n << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << table.columns[i].name;
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i]);
    os << '\n';
  }
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::vector<std::filesystem::path> write_tables(const std::filesystem::path& dir,
                                                const std::vector<ResultTable>& tables,
                                                const ExperimentConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ResourceError("cannot create output directory " + dir.string() + ": " + ec.message());
  const std::string stamp = utc_timestamp();
  std::vector<std::filesystem::path> out;
  for (const ResultTable& t : tables) {
    const auto path = dir / (t.name + ".csv");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ResourceError("cannot write " + path.string());
    write_csv(os, t, cfg, stamp);
    if (!os) throw ResourceError("write failed for " + path.string());
    out.push_back(path);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scenarios

namespace {

const std::vector<double>& t_star_grid() {
  static const std::vector<double> grid = linspace(0.01, 2.0, 400);
  return grid;
}

std::vector<double> temperatures_for(const ExperimentConfig& cfg, int n) {
  std::vector<double> ts = cfg.temperatures;
  if (cfg.include_t_star) ts.push_back(find_t_star(ChainParams{n, cfg.coupling}, t_star_grid()).t_star);
  return ts;
}

ProtocolConfig protocol_for(const ExperimentConfig& cfg, int n, double t, double kappa, int n_seq) {
  ProtocolConfig p;
  p.chain = ChainParams{n, cfg.coupling};
  p.temperature = t;
  p.kappa = kappa;
  p.tau = cfg.tau_for(n);
  p.n_seq = n_seq;
  p.grouping = cfg.jump_grouping;
  return p;
}

double static_cfi(const ChainParams& chain, double t, int n_measured) {
  const DerivativeScheme d = DerivativeScheme::for_temperature(t);
  const ThermalProbe lo(chain, t - d.delta_t);
  const ThermalProbe mid(chain, t);
  const ThermalProbe hi(chain, t + d.delta_t);
  return cfi_static(multi_site_probabilities(lo, n_measured), multi_site_probabilities(mid, n_measured),
                    multi_site_probabilities(hi, n_measured), d);
}

std::vector<ResultTable> run_thermalize(const ExperimentConfig& cfg) {
  const ChainParams chain{cfg.n_spins.front(), cfg.coupling};
  const LindbladModel model(chain, cfg.kappas.front(), cfg.temperatures.front(), cfg.jump_grouping);
  const auto steps = static_cast<std::size_t>(std::floor(cfg.t_max / cfg.dt + 1e-9));
  const auto down = DensityMatrix::basis_state(chain.n_spins, static_cast<std::size_t>(chain.dim() - 1));
  const auto random = random_density_matrix(chain.n_spins, cfg.seed);
  const auto f_down = fidelity_trace(model, down, cfg.dt, steps);
  const auto f_rand = fidelity_trace(model, random, cfg.dt, steps);

  ResultTable t{cfg.name, {{"t", "1/J"}, {"fidelity_down_state", "1"}, {"fidelity_random_state", "1"}}, {}, {}};
  t.notes.push_back("down state: all spins in the sigma_z = -1 state; random state: Ginibre, seed " +
                    std::to_string(cfg.seed));
  for (std::size_t k = 0; k <= steps; ++k) t.add_row({static_cast<double>(k) * cfg.dt, f_down[k], f_rand[k]});
  return {t};
}

std::vector<ResultTable> run_t95_map(const ExperimentConfig& cfg) {
  const ChainParams chain{cfg.n_spins.front(), cfg.coupling};
  const auto down = DensityMatrix::basis_state(chain.n_spins, static_cast<std::size_t>(chain.dim() - 1));
  const std::size_t nk = cfg.kappas.size();
  std::vector<double> t95(nk * cfg.temperatures.size(), kNaN);
  parallel_for(t95.size(), [&](std::size_t i) {
    const double kappa = cfg.kappas[i / cfg.temperatures.size()];
    const double temp = cfg.temperatures[i % cfg.temperatures.size()];
    if (kappa == 0.0) return;  // never thermalizes
    const LindbladModel model(chain, kappa, temp, cfg.jump_grouping);
    if (auto v = thermalization_time_t95(model, down, cfg.t_max, cfg.dt)) t95[i] = *v;
  });
  ResultTable t{cfg.name, {{"kappa", "J"}, {"T", "J"}, {"t95", "1/J"}}, {}, {}};
  t.notes.push_back("t95 = nan when fidelity 0.95 is not reached by t_max");
  for (std::size_t i = 0; i < t95.size(); ++i) {
    t.add_row({cfg.kappas[i / cfg.temperatures.size()], cfg.temperatures[i % cfg.temperatures.size()], t95[i]});
  }
  return {t};
}

std::vector<ResultTable> run_static_fi(const ExperimentConfig& cfg) {
  struct Job {
    int n;
    double t;
    int n_m;
  };
  std::vector<Job> jobs;
  for (int n : cfg.n_spins) {
    for (double t : temperatures_for(cfg, n)) {
      if (cfg.measured_qubits == "half") {
        jobs.push_back({n, t, std::max(1, n / 2)});
      } else {
        for (int m = 1; m <= n; ++m) jobs.push_back({n, t, m});
      }
    }
  }
  std::vector<double> f(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    f[i] = static_cfi(ChainParams{jobs[i].n, cfg.coupling}, jobs[i].t, jobs[i].n_m);
  });
  ResultTable t{cfg.name, {{"N", "1"}, {"T", "J"}, {"N_m", "1"}, {"F", "1/J^2"}}, {}, {}};
  t.notes.push_back("sigma_z measurement of sites 1..N_m on the Gibbs state");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    t.add_row({static_cast<double>(jobs[i].n), jobs[i].t, static_cast<double>(jobs[i].n_m), f[i]});
  }
  return {t};
}

std::vector<ResultTable> run_qfi_scan(const ExperimentConfig& cfg) {
  struct Job {
    int n;
    double t;
  };
  std::vector<Job> jobs;
  for (int n : cfg.n_spins) {
    for (double t : temperatures_for(cfg, n)) jobs.push_back({n, t});
  }
  std::vector<std::array<double, 3>> vals(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    const ChainParams chain{jobs[i].n, cfg.coupling};
    const ThermalProbe tp(chain, jobs[i].t);
    vals[i] = {qfi_thermal(tp), heat_capacity(tp), static_cfi(chain, jobs[i].t, jobs[i].n)};
  });
  ResultTable scan{cfg.name, {{"N", "1"}, {"T", "J"}, {"Q", "1/J^2"}, {"C_T", "1"}, {"F_full", "1/J^2"}}, {}, {}};
  scan.notes.push_back("F_full: every site measured in the computational basis");
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    scan.add_row({static_cast<double>(jobs[i].n), jobs[i].t, vals[i][0], vals[i][1], vals[i][2]});
  }

  std::vector<std::array<double, 3>> peaks(cfg.n_spins.size());
  parallel_for(cfg.n_spins.size(), [&](std::size_t i) {
    const ChainParams chain{cfg.n_spins[i], cfg.coupling};
    const TStarResult r = find_t_star(chain, t_star_grid());
    peaks[i] = {r.t_star, r.q_max, static_cfi(chain, r.t_star, chain.n_spins)};
  });
  ResultTable star{cfg.name + "_tstar", {{"N", "1"}, {"T_star", "J"}, {"Q_max", "1/J^2"}, {"F_full", "1/J^2"}},
                   {},
                   {"T_star: argmax of Q on 400 points in [0.01, 2] J plus one local refinement"}};
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    star.add_row({static_cast<double>(cfg.n_spins[i]), peaks[i][0], peaks[i][1], peaks[i][2]});
  }
  return {scan, star};
}

std::vector<ResultTable> run_weak_regime(const ExperimentConfig& cfg) {
  struct Job {
    int n;
    double t;
  };
  std::vector<Job> jobs;
  for (int n : cfg.n_spins) {
    for (double t : temperatures_for(cfg, n)) jobs.push_back({n, t});
  }
  std::vector<McSequentialResult> res(jobs.size());
  // Each job parallelizes over its samples.
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const ProtocolConfig p = protocol_for(cfg, jobs[i].n, jobs[i].t, 0.0, cfg.n_seq);
    res[i] = mc_sequential_run(p, DerivativeScheme::for_temperature(jobs[i].t),
                               static_cast<std::size_t>(cfg.mc_samples), cfg.seed, true);
  }
  ResultTable t{cfg.name,
                {{"N", "1"},
                 {"T", "J"},
                 {"n_seq", "1"},
                 {"F", "1/J^2"},
                 {"F_se", "1/J^2"},
                 {"dF", "1/J^2"},
                 {"S_mean", "nats"},
                 {"S_se", "nats"}},
                {},
                {"unitary evolution between measurements (kappa = 0); Monte-Carlo over mc_samples runs"}};
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = res[i];
    t.add_row({static_cast<double>(jobs[i].n), jobs[i].t, 0.0, 0.0, 0.0, 0.0, r.entropy_mean[0], 0.0});
    for (int k = 1; k <= cfg.n_seq; ++k) {
      const auto u = static_cast<std::size_t>(k - 1);
      t.add_row({static_cast<double>(jobs[i].n), jobs[i].t, static_cast<double>(k), r.fisher.values[u],
                 r.fisher.value_std_errors[u], r.fisher.increments[u], r.entropy_mean[u + 1],
                 r.entropy_std_error[u + 1]});
    }
  }
  return {t};
}

FisherSeries sequential_series(const ExperimentConfig& cfg, const ProtocolConfig& p) {
  if (p.n_seq <= cfg.exact_limit) return exact_sequential_cfi(p);
  return mc_sequential_cfi(p, DerivativeScheme::for_temperature(p.temperature),
                           static_cast<std::size_t>(cfg.mc_samples), cfg.seed);
}

std::vector<ResultTable> run_intermediate(const ExperimentConfig& cfg) {
  const int n = cfg.n_spins.front();
  const double kappa = cfg.kappas.front();
  const auto temps = temperatures_for(cfg, n);
  std::vector<FisherSeries> series(temps.size());
  std::vector<double> q(temps.size());
  parallel_for(temps.size(), [&](std::size_t i) {
    series[i] = sequential_series(cfg, protocol_for(cfg, n, temps[i], kappa, cfg.n_seq));
    q[i] = qfi_thermal(ThermalProbe(ChainParams{n, cfg.coupling}, temps[i]));
  });
  ResultTable t{cfg.name,
                {{"T", "J"}, {"n_seq", "1"}, {"F", "1/J^2"}, {"F_se", "1/J^2"}, {"Q", "1/J^2"}},
                {},
                {"F_se = 0 for exact values"}};
  for (std::size_t i = 0; i < temps.size(); ++i) {
    for (int k = 1; k <= cfg.n_seq; ++k) {
      const auto u = static_cast<std::size_t>(k - 1);
      const double se = series[i].value_std_errors.empty() ? 0.0 : series[i].value_std_errors[u];
      t.add_row({temps[i], static_cast<double>(k), series[i].values[u], se, q[i]});
    }
  }
  return {t};
}

std::vector<ResultTable> run_kappa_sweep(const ExperimentConfig& cfg) {
  const int n = cfg.n_spins.front();
  const auto temps = temperatures_for(cfg, n);
  const std::size_t nk = cfg.kappas.size();
  std::vector<FisherSeries> series(temps.size() * nk);
  std::vector<std::vector<double>> entropy(series.size());
  parallel_for(series.size(), [&](std::size_t i) {
    const ProtocolConfig p = protocol_for(cfg, n, temps[i / nk], cfg.kappas[i % nk], cfg.n_seq);
    series[i] = exact_sequential_cfi(p);
    entropy[i] = exact_average_entropy(build_protocol_model(p), cfg.n_seq);
  });
  ResultTable t{cfg.name,
                {{"T", "J"}, {"kappa", "J"}, {"n_seq", "1"}, {"F", "1/J^2"}, {"S_mean", "nats"}},
                {},
                {"exact outcome-tree averages"}};
  for (std::size_t i = 0; i < series.size(); ++i) {
    for (int k = 1; k <= cfg.n_seq; ++k) {
      const auto u = static_cast<std::size_t>(k - 1);
      t.add_row({temps[i / nk], cfg.kappas[i % nk], static_cast<double>(k), series[i].values[u], entropy[i][u]});
    }
  }
  return {t};
}

std::vector<ResultTable> run_nseq_star(const ExperimentConfig& cfg) {
  const int n = cfg.n_spins.front();
  const double kappa = cfg.kappas.front();
  const auto temps = temperatures_for(cfg, n);
  std::vector<NseqStar> res(temps.size());
  std::vector<double> q(temps.size());
  for (std::size_t i = 0; i < temps.size(); ++i) {
    q[i] = qfi_thermal(ThermalProbe(ChainParams{n, cfg.coupling}, temps[i]));
    res[i] = find_nseq_star(protocol_for(cfg, n, temps[i], kappa, cfg.n_seq), q[i], cfg.n_seq,
                            static_cast<std::size_t>(cfg.mc_samples), cfg.seed, cfg.exact_limit);
  }
  ResultTable star{cfg.name,
                   {{"T", "J"}, {"Q", "1/J^2"}, {"n_star", "1"}, {"F", "1/J^2"}, {"ratio", "1"}, {"monte_carlo", "1"}},
                   {},
                   {"n_star = nan when F never exceeds Q up to n_seq; F and ratio then refer to n_seq",
                    "monte_carlo = 1 when the search went beyond exact_limit (criterion F - 3 SE > Q)"}};
  ResultTable series{cfg.name + "_series", {{"T", "J"}, {"n_seq", "1"}, {"F", "1/J^2"}, {"F_se", "1/J^2"}}, {}, {}};
  for (std::size_t i = 0; i < temps.size(); ++i) {
    const NseqStar& r = res[i];
    star.add_row({temps[i], q[i], r.n_star ? static_cast<double>(*r.n_star) : kNaN, r.fisher, r.ratio,
                  r.used_monte_carlo ? 1.0 : 0.0});
    for (std::size_t k = 0; k < r.series.values.size(); ++k) {
      const double se = r.series.value_std_errors.empty() ? 0.0 : r.series.value_std_errors[k];
      series.add_row({temps[i], static_cast<double>(k + 1), r.series.values[k], se});
    }
  }
  return {star, series};
}

std::vector<ResultTable> run_bayes(const ExperimentConfig& cfg) {
  const int n = cfg.n_spins.front();
  const double t_true = cfg.temperatures.front();
  const ProtocolConfig p = protocol_for(cfg, n, t_true, cfg.kappas.front(), cfg.n_seq);
  std::vector<int> ns = cfg.n_values;
  if (ns.empty()) {
    ns.resize(static_cast<std::size_t>(cfg.n_seq));
    std::iota(ns.begin(), ns.end(), 1);
  }

  const auto grid = linspace(cfg.posterior_grid[0], cfg.posterior_grid[1],
                             static_cast<std::size_t>(cfg.posterior_grid[2]));
  const LikelihoodTable full = build_likelihood_table(p, grid);
  const FisherSeries fisher = exact_sequential_cfi(p);
  const ProtocolModel truth = build_protocol_model(p);

  ResultTable post{cfg.name + "_posterior", {{"n_seq", "1"}, {"T", "J"}, {"posterior", "1/J"}}, {}, {}};
  post.notes.push_back("dataset 0; uniform prior on the grid, trapezoidal normalization");
  ResultTable summary{cfg.name,
                      {{"dataset", "1"},
                       {"n_seq", "1"},
                       {"mean", "J"},
                       {"var", "J^2"},
                       {"mode", "J"},
                       {"M_var", "J^2"},
                       {"inv_F", "J^2"},
                       {"resolution_limited", "1"}},
                      {},
                      {}};
  summary.notes.push_back("true T = " + format_number(t_true) + " J; M = " + std::to_string(cfg.trajectories) +
                          " runs per dataset; dataset d sampled with seed mix64(seed + d)");
  summary.notes.push_back("resolution_limited = 1 when the posterior std is below 3 grid steps");
  ResultTable crb{cfg.name + "_crb", {{"n_seq", "1"}, {"M_var_mean", "J^2"}, {"inv_F", "J^2"}, {"rel_dev", "1"}},
                  {},
                  {"M_var_mean averaged over datasets; rel_dev = M_var_mean * F - 1"}};

  std::vector<LikelihoodTable> tables;
  for (int k : ns) tables.push_back(marginalize(full, k));
  std::vector<double> mvar_sum(ns.size(), 0.0);
  for (int d = 0; d < cfg.datasets; ++d) {
    const TrajectoryCounts counts =
        simulate_counts(truth, cfg.n_seq, cfg.trajectories, mix64(cfg.seed + static_cast<std::uint64_t>(d)));
    for (std::size_t a = 0; a < ns.size(); ++a) {
      const PosteriorGrid pg = posterior(counts.prefix(ns[a]), tables[a]);
      const PosteriorMoments m = posterior_moments(pg);
      const double inv_f = 1.0 / fisher.at(ns[a]);
      const double mvar = static_cast<double>(cfg.trajectories) * m.variance;
      mvar_sum[a] += mvar;
      summary.add_row({static_cast<double>(d), static_cast<double>(ns[a]), m.mean, m.variance, m.mode, mvar, inv_f,
                       m.resolution_limited ? 1.0 : 0.0});
      if (d == 0) {
        for (std::size_t i = 0; i < pg.t_grid.size(); ++i) {
          post.add_row({static_cast<double>(ns[a]), pg.t_grid[i], pg.density[i]});
        }
      }
    }
  }
  for (std::size_t a = 0; a < ns.size(); ++a) {
    const double mean = mvar_sum[a] / cfg.datasets;
    const double f = fisher.at(ns[a]);
    crb.add_row({static_cast<double>(ns[a]), mean, 1.0 / f, mean * f - 1.0});
  }
  return {summary, post, crb};
}

}  // namespace

std::vector<ResultTable> run(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.scenario) {
    case Scenario::kThermalize:
      return run_thermalize(cfg);
    case Scenario::kT95Map:
      return run_t95_map(cfg);
    case Scenario::kStaticFi:
      return run_static_fi(cfg);
    case Scenario::kQfiScan:
      return run_qfi_scan(cfg);
    case Scenario::kWeakRegime:
      return run_weak_regime(cfg);
    case Scenario::kIntermediateRegime:
      return run_intermediate(cfg);
    case Scenario::kKappaSweep:
      return run_kappa_sweep(cfg);
    case Scenario::kNseqStar:
      return run_nseq_star(cfg);
    case Scenario::kBayes:
      return run_bayes(cfg);
  }
  throw ValidationError("unhandled scenario");
}

}  // namespace seqtherm
