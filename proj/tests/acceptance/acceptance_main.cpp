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
// Acceptance suite: one PASS/FAIL line per criterion.
//
//   seqtherm_acceptance [ID...]
//
// With no arguments every check runs. Exit status is 0 only if all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "seqtherm/bayes.hpp"
#include "seqtherm/experiments.hpp"
#include "seqtherm/fisher.hpp"
#include "seqtherm/open_dynamics.hpp"
#include "seqtherm/protocol.hpp"
#include "seqtherm/spin_model.hpp"

namespace {

using namespace seqtherm;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Check {
  std::string id;
  std::string title;
  double budget_s;  // 0 = no runtime limit
  std::function<Outcome()> body;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ProtocolConfig protocol(int n, double temp, double kappa, double tau, int n_seq) {
  ProtocolConfig cfg;
  cfg.chain = {n, 1.0};
  cfg.temperature = temp;
  cfg.kappa = kappa;
  cfg.tau = tau;
  cfg.n_seq = n_seq;
  return cfg;
}

double t_star(int n) { return find_t_star({n, 1.0}, linspace(0.01, 2.0, 400)).t_star; }

double static_cfi(int n, double temp, int n_measured) {
  const ChainParams p{n, 1.0};
  const auto s = DerivativeScheme::for_temperature(temp);
  return cfi_static(multi_site_probabilities(gibbs_state(p, temp - s.delta_t), n_measured),
                    multi_site_probabilities(gibbs_state(p, temp), n_measured),
                    multi_site_probabilities(gibbs_state(p, temp + s.delta_t), n_measured), s);
}

Outcome closed_form_qfi() {
  double worst = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double t = 0.1 * k;
    worst = std::max(worst, std::abs(qfi_thermal(gibbs_state({2, 1.0}, t)) / closed_form::qfi_n2(1.0, t) - 1.0));
    worst = std::max(worst, std::abs(qfi_thermal(gibbs_state({3, 1.0}, t)) / closed_form::qfi_n3(1.0, t) - 1.0));
  }
  return {worst <= 1e-8, "max relative deviation " + fmt(worst) + " (limit 1e-8)"};
}

Outcome gibbs_stationarity() {
  double worst = 0.0;
  for (int n : {2, 3, 4}) {
    for (double t : {0.2, 0.5, 1.0}) {
      for (double k : {0.1, 1.0, 5.0}) {
        const LindbladModel m({n, 1.0}, k, t);
        worst = std::max(worst, m.apply(m.gibbs().matrix()).norm());
      }
    }
  }
  return {worst < 1e-8, "max ||L[rho_th]||_F = " + fmt(worst) + " (limit 1e-8)"};
}

Outcome thermalization() {
  const LindbladModel m({4, 1.0}, 1.0, 1.0);
  const auto down = DensityMatrix::basis_state(4, 15);
  const auto random = random_density_matrix(4, 2026);
  const double f_down = fidelity(m.propagate(down, 400.0), m.gibbs());
  const double f_rand = fidelity(m.propagate(random, 400.0), m.gibbs());
  bool ok = f_down >= 0.999 && f_rand >= 0.999;
  std::ostringstream os;
  os << "F(t=400): down " << fmt(f_down) << ", random " << fmt(f_rand) << "; t95 over kappa {1,2,4,8}:";
  auto t95 = [&](double kappa, double temp) {
    return thermalization_time_t95(LindbladModel({4, 1.0}, kappa, temp), down, 1000.0, 0.25);
  };
  auto scan = [&](const std::vector<std::pair<double, double>>& pts) {
    std::optional<double> prev;
    for (auto [kappa, temp] : pts) {
      const auto t = t95(kappa, temp);
      os << ' ' << (t ? fmt(*t) : "none");
      if (!t || (prev && !(*t < *prev))) ok = false;
      prev = t;
    }
  };
  scan({{1, 1}, {2, 1}, {4, 1}, {8, 1}});
  os << "; over T {1,2,4,8}:";
  scan({{1, 1}, {1, 2}, {1, 4}, {1, 8}});
  return {ok, os.str()};
}

Outcome zero_single_qubit_cfi() {
  double worst = 0.0;
  for (int n : {2, 4, 6}) {
    for (double t : {0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0}) worst = std::max(worst, std::abs(static_cfi(n, t, 1)));
  }
  return {worst <= 1e-10, "max |F(N_m=1)| = " + fmt(worst) + " (limit 1e-10)"};
}

Outcome equilibrium_gap() {
  const double t = t_star(4);
  const double f = static_cfi(4, t, 4);
  const double q = qfi_thermal(gibbs_state({4, 1.0}, t));
  const double r = f / q;
  return {r >= 0.03 && r <= 0.5, "T* = " + fmt(t) + ", F/Q = " + fmt(r) + " (band [0.03, 0.5])"};
}

Outcome exact_vs_mc() {
  const auto cfg = protocol(3, 0.3, 1.0, 3.0, 8);
  const auto s = DerivativeScheme::for_temperature(cfg.temperature);
  const auto exact = exact_sequential_cfi(cfg, s);
  const auto mc = mc_sequential_cfi(cfg, s, 2000, 1);
  bool ok = true;
  double worst = 0.0;
  for (std::size_t k = 0; k < exact.values.size(); ++k) {
    const double dev = std::abs(mc.values[k] - exact.values[k]);
    const double se = mc.value_std_errors[k];
    // Both sides vanish identically at n = 1; allow for round-off there.
    const bool within = dev <= 3.0 * se || dev < 1e-10;
    ok = ok && within;
    if (se > 0.0) worst = std::max(worst, dev / se);
  }
  return {ok, "T=0.3, n<=8: max |MC - exact| / SE = " + fmt(worst) + " (limit 3)"};
}

Outcome weak_regime() {
  const auto cfg = protocol(4, 0.3, 0.0, 4.0, 50);
  const auto r = mc_sequential_run(cfg, DerivativeScheme::for_temperature(0.3), 1000, 1, true);
  const auto& s = r.entropy_mean;
  const auto& se = r.entropy_std_error;
  bool monotone = true;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s[k] > s[k - 1] + se[k] + se[k - 1]) monotone = false;
  }
  const double d2 = r.fisher.increments[1];
  const double d50 = r.fisher.increments[49];
  const bool ok = monotone && s[50] < 0.05 && d50 < 0.1 * d2;
  return {ok, std::string("S monotone ") + (monotone ? "yes" : "no") + ", S(50) = " + fmt(s[50]) +
                  " (limit 0.05), dF50/dF2 = " + fmt(d50 / d2) + " (limit 0.1)"};
}

Outcome main_result() {
  bool ok = true;
  std::ostringstream os;
  for (double t : {0.2, 0.3, 0.5}) {
    const double q = qfi_thermal(gibbs_state({4, 1.0}, t));
    const auto f = exact_sequential_cfi(protocol(4, t, 1.0, 4.0, 12));
    std::optional<int> star;
    for (int n = 1; n <= 12 && !star; ++n) {
      if (f.at(n) > q) star = n;
    }
    if (!star) {
      ok = false;
      os << "T=" << fmt(t) << ": F(12)/Q=" << fmt(f.at(12) / q) << " no crossing; ";
      continue;
    }
    const double r = f.at(*star) / q;
    ok = ok && r >= 1.0 && r <= 1.5;
    os << "T=" << fmt(t) << ": n*=" << *star << " F/Q=" << fmt(r) << "; ";
  }
  os << "ratio band [1.0, 1.5]";
  return {ok, os.str()};
}

Outcome kappa_optimum() {
  const double t = t_star(4);
  const auto kappas = linspace(0.1, 5.0, 50);
  std::vector<double> f(kappas.size());
  for (std::size_t i = 0; i < kappas.size(); ++i) f[i] = exact_sequential_cfi(protocol(4, t, kappas[i], 8.0, 6)).at(6);
  const auto best = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
  const bool interior = best > 0 && best + 1 < f.size();
  return {interior, "T* = " + fmt(t) + ", argmax kappa = " + fmt(kappas[best]) + " on [0.1, 5] (F6 " +
                        fmt(f.front()) + " .. " + fmt(f[best]) + " .. " + fmt(f.back()) + ")"};
}

Outcome bayes_crb() {
  const int n_seq = 10;
  const std::int64_t m = 500;
  const int seeds = 10;
  const auto cfg = protocol(4, 0.3, 1.0, 4.0, n_seq);
  const auto full = build_likelihood_table(cfg, linspace(0.01, 2.0, 400));
  const auto fisher = exact_sequential_cfi(cfg);
  const auto truth = build_protocol_model(cfg);
  std::vector<double> mvar(n_seq + 1, 0.0);
  for (int s = 0; s < seeds; ++s) {
    const auto counts = simulate_counts(truth, n_seq, m, mix64(static_cast<std::uint64_t>(s) + 1));
    for (int n = 8; n <= n_seq; ++n) {
      const auto pm = posterior_moments(posterior(counts.prefix(n), marginalize(full, n)));
      mvar[static_cast<std::size_t>(n)] += static_cast<double>(m) * pm.variance / seeds;
    }
  }
  bool ok = true;
  std::ostringstream os;
  for (int n = 8; n <= n_seq; ++n) {
    const double rel = mvar[static_cast<std::size_t>(n)] * fisher.at(n) - 1.0;
    ok = ok && std::abs(rel) <= 0.25;
    os << "n=" << n << ": M*Var*F-1 = " << fmt(rel) << "; ";
  }
  os << "limit 0.25";
  return {ok, os.str()};
}

std::string csv_body(const ResultTable& t, const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_csv(os, t, cfg, "-");
  std::istringstream in(os.str());
  std::string line;
  std::string body;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] != '#') body += line + '\n';
  }
  return body;
}

Outcome determinism() {
  std::vector<std::string> differing;
  for (const auto& id : preset_ids()) {
    const ExperimentConfig cfg = preset(id, 7);
    const auto a = run(cfg);
    const auto b = run(cfg);
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) same = csv_body(a[i], cfg) == csv_body(b[i], cfg);
    if (!same) differing.push_back(id);
    std::cerr << "  determinism: " << id << (same ? " identical" : " DIFFERS") << '\n';
  }
  std::string d = std::to_string(preset_ids().size()) + " presets rerun with seed 7";
  for (const auto& id : differing) d += ", differs: " + id;
  return {differing.empty(), d};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Check> checks{
      {"C1", "closed-form QFI, N=2,3", 1.0, closed_form_qfi},
      {"C2", "Gibbs stationarity of the Lindbladian", 30.0, gibbs_stationarity},
      {"C3", "thermalization and t95 trends", 120.0, thermalization},
      {"C4", "zero single-qubit static CFI", 0.0, zero_single_qubit_cfi},
      {"C5", "equilibrium CFI/QFI gap at T*", 0.0, equilibrium_gap},
      {"C6", "exact vs Monte-Carlo sequential CFI", 300.0, exact_vs_mc},
      {"C7", "weak-regime purification", 0.0, weak_regime},
      {"C8", "sequential CFI surpasses QFI", 900.0, main_result},
      {"C9", "interior optimum in kappa", 0.0, kappa_optimum},
      {"C10", "Bayesian variance vs Cramer-Rao bound", 600.0, bayes_crb},
      {"C11", "preset determinism", 0.0, determinism},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted) {
    if (std::none_of(checks.begin(), checks.end(), [&](const Check& c) { return c.id == w; })) {
      std::cerr << "unknown check '" << w << "'\n";
      return 2;
    }
  }
  int failures = 0;
  for (const Check& c : checks) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt(secs) + " s";
    if (c.budget_s > 0.0) {
      timing += " (budget " + fmt(c.budget_s) + " s)";
      if (secs >= c.budget_s) o.pass = false;
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << ' ' << c.title << ": " << o.detail << " [" << timing
              << "]" << std::endl;
  }
  std::cout << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
