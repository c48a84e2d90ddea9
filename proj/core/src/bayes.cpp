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

#include "seqtherm/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqtherm/parallel.hpp"

namespace seqtherm {

std::int64_t TrajectoryCounts::total() const {
  std::int64_t m = 0;
  for (const auto& [idx, k] : counts) m += k;
  return m;
}

void TrajectoryCounts::add(std::span<const int> outcomes) {
  if (static_cast<int>(outcomes.size()) != n_seq) {
    throw ValidationError("TrajectoryCounts::add: record length " + std::to_string(outcomes.size()) +
                          " differs from n_seq " + std::to_string(n_seq));
  }
  ++counts[outcome_index(outcomes)];
}

TrajectoryCounts TrajectoryCounts::prefix(int n) const {
  if (n < 1 || n > n_seq) throw ValidationError("prefix length " + std::to_string(n) + " outside [1, n_seq]");
  TrajectoryCounts out{n, {}};
  for (const auto& [idx, k] : counts) out.counts[idx >> (n_seq - n)] += k;
  return out;
}

std::string TrajectoryCounts::key(std::uint64_t index) const {
  std::string s(static_cast<std::size_t>(n_seq), '0');
  for (int k = 0; k < n_seq; ++k) {
    if ((index >> (n_seq - 1 - k)) & 1U) s[static_cast<std::size_t>(k)] = '1';
  }
  return s;
}

std::uint64_t TrajectoryCounts::parse_key(const std::string& bits) {
  if (bits.empty() || bits.size() > 63) throw ValidationError("outcome record must have 1..63 bits");
  std::uint64_t idx = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ValidationError("outcome record '" + bits + "' is not a bit string");
    idx = (idx << 1) | static_cast<std::uint64_t>(c - '0');
  }
  return idx;
}

TrajectoryCounts simulate_counts(const ProtocolModel& model, int n_seq, std::int64_t m, std::uint64_t seed) {
  if (m <= 0) throw ValidationError("M must be positive");
  std::vector<std::uint64_t> records(static_cast<std::size_t>(m));
  parallel_for(records.size(), [&](std::size_t k) {
    RngStream rng(seed, k);
    records[k] = outcome_index(sample_trajectory(model, n_seq, rng).outcomes);
  });
  TrajectoryCounts out{n_seq, {}};
  for (std::uint64_t r : records) ++out.counts[r];
  return out;
}

LikelihoodTable build_likelihood_table(const ProtocolConfig& cfg, std::span<const double> t_grid) {
  if (t_grid.empty()) throw ValidationError("likelihood table: empty temperature grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw ValidationError("temperature grid must be strictly ascending");
  }
  LikelihoodTable table{cfg.n_seq, {t_grid.begin(), t_grid.end()}, std::vector<std::vector<double>>(t_grid.size())};
  parallel_for(t_grid.size(), [&](std::size_t i) {
    table.probs[i] = trajectory_probabilities(build_protocol_model(cfg, t_grid[i]), cfg.n_seq);
  });
  return table;
}

LikelihoodTable marginalize(const LikelihoodTable& table, int n) {
  if (n < 1 || n > table.n_seq) throw ValidationError("marginalize: prefix length outside [1, n_seq]");
  LikelihoodTable out{n, table.t_grid, std::vector<std::vector<double>>(table.probs.size())};
  const int shift = table.n_seq - n;
  for (std::size_t i = 0; i < table.probs.size(); ++i) {
    out.probs[i].assign(std::size_t{1} << n, 0.0);
    for (std::size_t idx = 0; idx < table.probs[i].size(); ++idx) out.probs[i][idx >> shift] += table.probs[i][idx];
  }
  return out;
}

double log_likelihood(const TrajectoryCounts& counts, std::span<const double> probs) {
  double ll = 0.0;
  for (const auto& [idx, k] : counts.counts) {
    if (idx >= probs.size()) {
      throw ValidationError("observed record " + counts.key(idx) + " is not in the model tree (n_seq mismatch?)");
    }
    if (k == 0) continue;
    const double p = probs[idx];
    if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += static_cast<double>(k) * std::log(p);
  }
  return ll;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("trapezoid: size mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

PosteriorGrid posterior_from_log_likelihood(std::span<const double> t_grid, std::span<const double> log_like) {
  if (t_grid.size() != log_like.size() || t_grid.size() < 2) {
    throw ValidationError("posterior: grid and likelihood sizes differ or grid has < 2 points");
  }
  const double peak = *std::max_element(log_like.begin(), log_like.end());
  if (!std::isfinite(peak)) throw NumericalError("degenerate posterior: likelihood is zero on the whole grid");
  PosteriorGrid pg{{t_grid.begin(), t_grid.end()}, std::vector<double>(t_grid.size())};
  for (std::size_t i = 0; i < t_grid.size(); ++i) pg.density[i] = std::exp(log_like[i] - peak);
  const double z = trapezoid(pg.t_grid, pg.density);
  if (!(z > 0.0)) throw NumericalError("degenerate posterior: zero normalization");
  for (double& d : pg.density) d /= z;
  return pg;
}

PosteriorGrid posterior(const TrajectoryCounts& counts, const LikelihoodTable& table) {
  if (counts.n_seq != table.n_seq) {
    throw ValidationError("counts have n_seq " + std::to_string(counts.n_seq) + " but the model has " +
                          std::to_string(table.n_seq));
  }
  std::vector<double> ll(table.t_grid.size());
  for (std::size_t i = 0; i < ll.size(); ++i) ll[i] = log_likelihood(counts, table.probs[i]);
  return posterior_from_log_likelihood(table.t_grid, ll);
}

PosteriorMoments posterior_moments(const PosteriorGrid& pg) {
  const auto& x = pg.t_grid;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * pg.density[i];
  const double mean = trapezoid(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) * (x[i] - mean) * pg.density[i];
  const double var = std::max(trapezoid(x, y), 0.0);
  const auto mode_it = std::max_element(pg.density.begin(), pg.density.end());
  const double mode = x[static_cast<std::size_t>(mode_it - pg.density.begin())];

  double min_step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < x.size(); ++i) min_step = std::min(min_step, x[i] - x[i - 1]);
  return {mean, var, mode, std::sqrt(var) < 3.0 * min_step};
}

}  // namespace seqtherm
