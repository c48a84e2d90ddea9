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

#include "seqtherm/fisher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "seqtherm/parallel.hpp"

namespace seqtherm {

DerivativeScheme DerivativeScheme::for_temperature(double t) { return {std::max(1e-4, t / 1e4)}; }

void DerivativeScheme::validate(double t) const {
  if (!(delta_t > 0.0)) throw ValidationError("derivative step must be positive");
  if (delta_t > t / 100.0) {
    throw ValidationError("derivative step " + std::to_string(delta_t) + " exceeds T/100 at T=" +
                          std::to_string(t));
  }
}

std::string to_string(FisherMethod m) { return m == FisherMethod::kExact ? "exact" : "monte-carlo"; }

double cfi_static(std::span<const double> p_minus, std::span<const double> p_center,
                  std::span<const double> p_plus, const DerivativeScheme& scheme) {
  if (p_minus.size() != p_center.size() || p_plus.size() != p_center.size() || p_center.empty()) {
    throw ValidationError("cfi_static: outcome sets differ in size");
  }
  for (auto p : {p_minus, p_center, p_plus}) {
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-10) {
      throw ValidationError("cfi_static: distribution sums to " + std::to_string(s));
    }
  }
  if (!(scheme.delta_t > 0.0)) throw ValidationError("cfi_static: derivative step must be positive");
  double f = 0.0;
  for (std::size_t j = 0; j < p_center.size(); ++j) {
    if (p_center[j] < kFisherProbabilityFloor) continue;
    const double d = (p_plus[j] - p_minus[j]) / (2.0 * scheme.delta_t);
    f += d * d / p_center[j];
  }
  return f;
}

namespace {

struct Triple {
  std::array<ProtocolModel, 3> models;  // T - dT, T, T + dT
};

Triple build_triple(const ProtocolConfig& cfg, const DerivativeScheme& scheme) {
  cfg.validate();
  scheme.validate(cfg.temperature);
  const double t = cfg.temperature;
  const double d = scheme.delta_t;
  std::array<double, 3> temps{t - d, t, t + d};
  std::array<std::optional<ProtocolModel>, 3> built;
  parallel_for(3, [&](std::size_t k) { built[k] = build_protocol_model(cfg, temps[k]); });
  return Triple{{std::move(*built[0]), std::move(*built[1]), std::move(*built[2])}};
}

using States = std::array<ComplexMatrix, 3>;

struct StepOutcome {
  States evolved;
  std::array<std::array<double, 2>, 3> prob;  // [temperature][outcome]
  double fisher = 0.0;                        // conditional Fisher information of this step
};

StepOutcome advance(const Triple& tr, const States& states, double delta_t) {
  StepOutcome out;
  for (int k = 0; k < 3; ++k) {
    out.evolved[k] = tr.models[k].step.apply(states[k]);
    const double norm = out.evolved[k].trace().real();
    for (int g = 0; g < 2; ++g) out.prob[k][g] = tr.models[k].povm.probability(out.evolved[k], g) / norm;
  }
  for (int g = 0; g < 2; ++g) {
    const double pc = out.prob[1][g];
    if (pc < kFisherProbabilityFloor) continue;
    const double d = (out.prob[2][g] - out.prob[0][g]) / (2.0 * delta_t);
    out.fisher += d * d / pc;
  }
  return out;
}

States collapse(const Triple& tr, const StepOutcome& step, int g) {
  States next;
  for (int k = 0; k < 3; ++k) {
    const double p = std::max(step.prob[k][g], std::numeric_limits<double>::min());
    next[k] = tr.models[k].povm.project(step.evolved[k], g) / (p * step.evolved[k].trace().real());
  }
  return next;
}

struct ExactWalker {
  const Triple& tr;
  double delta_t;
  int depth;
  std::vector<double> increments;
  double pruned = 0.0;

  void visit(const States& states, double prob, int level) {
    const StepOutcome step = advance(tr, states, delta_t);
    increments[static_cast<std::size_t>(level)] += prob * step.fisher;
    if (level + 1 == depth) return;
    for (int g = 0; g < 2; ++g) {
      const double p = step.prob[1][g];
      if (p < kBranchFloor) {
        pruned += prob * std::max(p, 0.0);
        continue;
      }
      visit(collapse(tr, step, g), prob * p, level + 1);
    }
  }
};

void accumulate_values(FisherSeries& s) {
  s.values.resize(s.increments.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < s.increments.size(); ++k) {
    acc += s.increments[k];
    s.values[k] = acc;
  }
}

}  // namespace

FisherSeries exact_sequential_cfi(const ProtocolConfig& cfg, const DerivativeScheme& scheme) {
  if (cfg.n_seq > kMaxExactDepth) {
    throw ResourceError("exact Fisher information is limited to n_seq <= 20 (got " +
                        std::to_string(cfg.n_seq) + "); n_seq>20 requires monte-carlo");
  }
  const Triple tr = build_triple(cfg, scheme);
  ExactWalker walker{tr, scheme.delta_t, cfg.n_seq, std::vector<double>(static_cast<std::size_t>(cfg.n_seq), 0.0)};
  walker.visit({tr.models[0].initial, tr.models[1].initial, tr.models[2].initial}, 1.0, 0);

  FisherSeries s;
  s.method = FisherMethod::kExact;
  s.increments = std::move(walker.increments);
  s.pruned_mass = walker.pruned;
  accumulate_values(s);
  return s;
}

FisherSeries exact_sequential_cfi(const ProtocolConfig& cfg) {
  return exact_sequential_cfi(cfg, DerivativeScheme::for_temperature(cfg.temperature));
}

McSequentialResult mc_sequential_run(const ProtocolConfig& cfg, const DerivativeScheme& scheme,
                                     std::size_t mu, std::uint64_t master_seed, bool track_entropy) {
  if (mu < 1) throw ValidationError("Monte-Carlo sample count must be >= 1");
  const Triple tr = build_triple(cfg, scheme);
  const auto n = static_cast<std::size_t>(cfg.n_seq);

  // Per-sample step Fisher terms and entropies, reduced afterwards in index order.
  std::vector<double> terms(mu * n, 0.0);
  std::vector<double> entropies(track_entropy ? mu * n : 0, 0.0);

  parallel_for(mu, [&](std::size_t i) {
    RngStream rng(master_seed, i);
    States states{tr.models[0].initial, tr.models[1].initial, tr.models[2].initial};
    for (std::size_t k = 0; k < n; ++k) {
      const StepOutcome step = advance(tr, states, scheme.delta_t);
      terms[i * n + k] = step.fisher;
      const int g = rng.uniform() < step.prob[1][0] ? 0 : 1;
      states = collapse(tr, step, g);
      if (track_entropy) {
        ComplexMatrix h = 0.5 * (states[1] + states[1].adjoint());
        h /= h.trace().real();
        entropies[i * n + k] = von_neumann_entropy(DensityMatrix::trusted(std::move(h)));
      }
    }
  });

  McSequentialResult out;
  FisherSeries& s = out.fisher;
  s.method = FisherMethod::kMonteCarlo;
  s.mc_samples = mu;
  s.increments.assign(n, 0.0);
  s.increment_std_errors.assign(n, 0.0);
  s.value_std_errors.assign(n, 0.0);
  const double m = static_cast<double>(mu);

  auto mean_se = [&](auto&& value_of) {
    double mean = 0.0;
    for (std::size_t i = 0; i < mu; ++i) mean += value_of(i);
    mean /= m;
    double ss = 0.0;
    for (std::size_t i = 0; i < mu; ++i) {
      const double d = value_of(i) - mean;
      ss += d * d;
    }
    const double se = mu > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
    return std::pair{mean, se};
  };

  std::vector<double> cumulative(mu, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    auto [inc, inc_se] = mean_se([&](std::size_t i) { return terms[i * n + k]; });
    s.increments[k] = inc;
    s.increment_std_errors[k] = inc_se;
    for (std::size_t i = 0; i < mu; ++i) cumulative[i] += terms[i * n + k];
    s.value_std_errors[k] = mean_se([&](std::size_t i) { return cumulative[i]; }).second;
  }
  accumulate_values(s);

  if (track_entropy) {
    ComplexMatrix g0 = tr.models[1].initial;
    const double s0 = von_neumann_entropy(DensityMatrix::trusted(0.5 * (g0 + g0.adjoint())));
    out.entropy_mean.push_back(s0);
    out.entropy_std_error.push_back(0.0);
    for (std::size_t k = 0; k < n; ++k) {
      auto [mean, se] = mean_se([&](std::size_t i) { return entropies[i * n + k]; });
      out.entropy_mean.push_back(mean);
      out.entropy_std_error.push_back(se);
    }
  }
  return out;
}

FisherSeries mc_sequential_cfi(const ProtocolConfig& cfg, const DerivativeScheme& scheme, std::size_t mu,
                               std::uint64_t master_seed) {
  return mc_sequential_run(cfg, scheme, mu, master_seed, false).fisher;
}

NseqStar find_nseq_star(const ProtocolConfig& cfg, double q_reference, int n_max, std::size_t mu,
                        std::uint64_t master_seed, int exact_limit) {
  if (n_max < 1) throw ValidationError("find_nseq_star: n_max must be >= 1");
  if (exact_limit < 1 || exact_limit > kMaxExactDepth) {
    throw ValidationError("find_nseq_star: exact_limit must be in [1, 20]");
  }
  if (!(q_reference > 0.0)) throw ValidationError("find_nseq_star: reference QFI must be positive");
  ProtocolConfig c = cfg;
  c.n_seq = std::min(n_max, exact_limit);
  NseqStar out;
  out.series = exact_sequential_cfi(c);
  for (int n = 1; n <= c.n_seq; ++n) {
    if (out.series.at(n) > q_reference) {
      out.n_star = n;
      out.fisher = out.series.at(n);
      out.ratio = out.fisher / q_reference;
      return out;
    }
  }
  out.fisher = out.series.values.back();
  out.ratio = out.fisher / q_reference;
  if (n_max <= exact_limit) return out;

  c.n_seq = n_max;
  out.used_monte_carlo = true;
  out.series = mc_sequential_cfi(c, DerivativeScheme::for_temperature(c.temperature), mu, master_seed);
  for (int n = exact_limit + 1; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    if (out.series.values[k] - 3.0 * out.series.value_std_errors[k] > q_reference) {
      out.n_star = n;
      out.fisher = out.series.values[k];
      out.ratio = out.fisher / q_reference;
      return out;
    }
  }
  out.fisher = out.series.values.back();
  out.ratio = out.fisher / q_reference;
  return out;
}

}  // namespace seqtherm
