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

#include "seqtherm/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "seqtherm/open_dynamics.hpp"

namespace seqtherm {

LocalPovm::LocalPovm(int site, int n_qubits) : site_(site), n_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw ValidationError("LocalPovm: bad register size");
  if (site < 1 || site > n_qubits) {
    throw ValidationError("LocalPovm: site " + std::to_string(site) + " outside [1, " +
                          std::to_string(n_qubits) + "]");
  }
}

ComplexMatrix LocalPovm::projector(int outcome) const {
  const Eigen::Index d = Eigen::Index{1} << n_;
  ComplexMatrix p = ComplexMatrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (bit(i) == outcome) p(i, i) = 1.0;
  }
  return p;
}

double LocalPovm::probability(const ComplexMatrix& rho, int outcome) const {
  double p = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    if (bit(i) == outcome) p += rho(i, i).real();
  }
  return p;
}

ComplexMatrix LocalPovm::project(const ComplexMatrix& rho, int outcome) const {
  ComplexMatrix out = rho;
  const Eigen::Index d = rho.rows();
  for (Eigen::Index c = 0; c < d; ++c) {
    if (bit(c) != outcome) {
      out.col(c).setZero();
      continue;
    }
    for (Eigen::Index r = 0; r < d; ++r) {
      if (bit(r) != outcome) out(r, c) = 0.0;
    }
  }
  return out;
}

namespace {

ComplexMatrix normalized(const ComplexMatrix& m, double trace) {
  ComplexMatrix out = m / trace;
  return out;
}

DensityMatrix to_state(const ComplexMatrix& m) {
  ComplexMatrix h = 0.5 * (m + m.adjoint());
  h /= h.trace().real();
  return DensityMatrix::trusted(std::move(h));
}

}  // namespace

std::array<Branch, 2> measure_site(const DensityMatrix& rho, const LocalPovm& povm) {
  if (rho.n_qubits() != povm.n_qubits()) throw ValidationError("measure_site: register size mismatch");
  std::array<Branch, 2> out;
  for (int g = 0; g < 2; ++g) {
    out[g].outcome = g;
    out[g].probability = povm.probability(rho.matrix(), g);
    if (out[g].probability >= kBranchFloor) {
      out[g].post_state = to_state(povm.project(rho.matrix(), g));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void ProtocolConfig::validate() const {
  chain.validate();
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ValidationError("temperature must be positive");
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ValidationError("kappa must be >= 0");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be positive");
  if (n_seq < 1) throw ValidationError("n_seq must be >= 1");
  if (measured_site < 0 || measured_site > chain.n_spins) {
    throw ValidationError("measured_site " + std::to_string(measured_site) + " outside [1, " +
                          std::to_string(chain.n_spins) + "]");
  }
}

ComplexMatrix StepChannel::apply(const ComplexMatrix& rho) const {
  return std::visit(
      [&](const auto& impl) -> ComplexMatrix {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, Unitary>) {
          if (impl.sectors.empty()) return impl.u * rho * impl.u.adjoint();
          ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
          for (std::size_t a = 0; a < impl.sectors.size(); ++a) {
            const auto& rows = impl.sectors[a];
            for (std::size_t b = 0; b < impl.sectors.size(); ++b) {
              const auto& cols = impl.sectors[b];
              const ComplexMatrix block = rho(rows, cols);
              if (block.cwiseAbs2().maxCoeff() == 0.0) continue;
              out(rows, cols) = impl.blocks[a] * block * impl.blocks[b].adjoint();
            }
          }
          return out;
        } else if constexpr (std::is_same_v<T, Lindblad>) {
          if (impl.support.empty()) return apply_superop(impl.propagator, rho);
          const Eigen::Index d = rho.rows();
          ComplexVector v(static_cast<Eigen::Index>(impl.support.size()));
          for (std::size_t k = 0; k < impl.support.size(); ++k) {
            v(static_cast<Eigen::Index>(k)) = rho.data()[impl.support[k]];
          }
          const double outside = std::abs(rho.squaredNorm() - v.squaredNorm());
          if (outside > 1e-20 * std::max(1.0, rho.squaredNorm())) {
            throw ValidationError("StepChannel: state has coherences between magnetization sectors");
          }
          const ComplexVector w = impl.reduced * v;
          ComplexMatrix out = ComplexMatrix::Zero(d, d);
          for (std::size_t k = 0; k < impl.support.size(); ++k) {
            out.data()[impl.support[k]] = w(static_cast<Eigen::Index>(k));
          }
          return out;
        } else {
          return impl.gibbs * rho.trace().real();
        }
      },
      impl_);
}

ProtocolModel build_protocol_model(const ProtocolConfig& cfg, std::optional<double> t) {
  cfg.validate();
  const double temp = t.value_or(cfg.temperature);
  if (!(temp > 0.0)) throw ValidationError("build_protocol_model: temperature must be positive");
  LocalPovm povm(cfg.site(), cfg.chain.n_spins);

  if (cfg.dynamics == StepDynamics::kReset) {
    ThermalProbe probe(cfg.chain, temp);
    return {temp, probe.gibbs().matrix(), StepChannel(StepChannel::Reset{probe.gibbs().matrix()}), povm};
  }
  if (cfg.kappa == 0.0) {
    ThermalProbe probe(cfg.chain, temp);
    const double tau = cfg.tau;
    ComplexMatrix u = operator_function(probe.spectrum(),
                                        [tau](double e) { return std::exp(Complex(0.0, -e * tau)); });
    auto sectors = magnetization_sectors(cfg.chain.n_spins);
    // H conserves magnetization; drop round-off that leaks between sectors.
    ComplexMatrix masked = ComplexMatrix::Zero(u.rows(), u.cols());
    std::vector<ComplexMatrix> blocks;
    for (const auto& idx : sectors) {
      blocks.emplace_back(u(idx, idx));
      masked(idx, idx) = blocks.back();
    }
    return {temp, probe.gibbs().matrix(),
            StepChannel(StepChannel::Unitary{std::move(masked), std::move(sectors), std::move(blocks)}), povm};
  }
  LindbladModel model(cfg.chain, cfg.kappa, temp, cfg.grouping);
  const ComplexMatrix& l = model.superoperator();
  const Eigen::Index d = model.gibbs().matrix().rows();
  std::vector<Eigen::Index> support;
  std::vector<char> in_support(static_cast<std::size_t>(d * d), 0);
  for (Eigen::Index c = 0; c < d; ++c) {
    for (Eigen::Index r = 0; r < d; ++r) {
      if (std::popcount(static_cast<std::uint64_t>(r)) == std::popcount(static_cast<std::uint64_t>(c))) {
        support.push_back(r + c * d);
        in_support[static_cast<std::size_t>(r + c * d)] = 1;
      }
    }
  }
  double leak = 0.0;
  for (Eigen::Index j : support) {
    for (Eigen::Index i = 0; i < d * d; ++i) {
      if (!in_support[static_cast<std::size_t>(i)]) leak = std::max(leak, std::abs(l(i, j)));
    }
  }
  if (leak > 1e-12 * std::max(1.0, l.cwiseAbs().maxCoeff())) {
    return {temp, model.gibbs().matrix(), StepChannel(StepChannel::Lindblad{model.propagator(cfg.tau), {}, {}}),
            povm};
  }
  ComplexMatrix reduced = (l(support, support) * cfg.tau).exp();
  return {temp, model.gibbs().matrix(),
          StepChannel(StepChannel::Lindblad{{}, std::move(support), std::move(reduced)}), povm};
}

std::vector<std::vector<Eigen::Index>> magnetization_sectors(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) throw ValidationError("magnetization_sectors: bad register size");
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(n_qubits) + 1);
  const Eigen::Index d = Eigen::Index{1} << n_qubits;
  for (Eigen::Index i = 0; i < d; ++i) {
    out[static_cast<std::size_t>(std::popcount(static_cast<std::uint64_t>(i)))].push_back(i);
  }
  return out;
}

std::uint64_t outcome_index(std::span<const int> outcomes) {
  std::uint64_t idx = 0;
  for (int g : outcomes) idx = (idx << 1) | static_cast<std::uint64_t>(g & 1);
  return idx;
}

// ---------------------------------------------------------------------------
// Exact tree

namespace {

void check_depth(int n_seq) {
  if (n_seq < 1) throw ValidationError("n_seq must be >= 1");
  if (n_seq > kMaxExactDepth) {
    throw ResourceError("exact trajectory enumeration is limited to n_seq <= " +
                        std::to_string(kMaxExactDepth) + " (got " + std::to_string(n_seq) +
                        "); n_seq>20 requires monte-carlo");
  }
}

struct TreeWalker {
  const ProtocolModel& model;
  int depth;
  TrajectoryTree& tree;
  std::vector<int> outcomes;
  std::vector<double> step_probs;

  // `rho` is normalized; `prob` is the joint probability of the prefix.
  void visit(const ComplexMatrix& rho, double prob) {
    if (static_cast<int>(outcomes.size()) == depth) {
      tree.leaves.push_back({outcomes, prob, step_probs, to_state(rho)});
      return;
    }
    const ComplexMatrix evolved = model.step.apply(rho);
    for (int g = 0; g < 2; ++g) {
      const double p = model.povm.probability(evolved, g);
      if (p < kBranchFloor) {
        tree.pruned_mass += prob * std::max(p, 0.0);
        continue;
      }
      outcomes.push_back(g);
      step_probs.push_back(p);
      visit(normalized(model.povm.project(evolved, g), p), prob * p);
      outcomes.pop_back();
      step_probs.pop_back();
    }
  }
};

void fill_probabilities(const ProtocolModel& model, int depth, const ComplexMatrix& rho, double prob,
                        std::uint64_t prefix, int level, std::vector<double>& out) {
  if (level == depth) {
    out[prefix] = prob;
    return;
  }
  const ComplexMatrix evolved = model.step.apply(rho);
  for (int g = 0; g < 2; ++g) {
    const double p = model.povm.probability(evolved, g);
    if (p < kBranchFloor) continue;
    fill_probabilities(model, depth, normalized(model.povm.project(evolved, g), p), prob * p,
                       (prefix << 1) | static_cast<std::uint64_t>(g), level + 1, out);
  }
}

}  // namespace

TrajectoryTree enumerate_trajectory_tree(const ProtocolConfig& cfg, const ProtocolModel& model) {
  check_depth(cfg.n_seq);
  TrajectoryTree tree;
  TreeWalker walker{model, cfg.n_seq, tree, {}, {}};
  walker.visit(model.initial, 1.0);
  return tree;
}

TrajectoryTree enumerate_trajectory_tree(const ProtocolConfig& cfg) {
  return enumerate_trajectory_tree(cfg, build_protocol_model(cfg));
}

std::vector<double> trajectory_probabilities(const ProtocolModel& model, int n_seq) {
  check_depth(n_seq);
  std::vector<double> out(std::size_t{1} << n_seq, 0.0);
  fill_probabilities(model, n_seq, model.initial, 1.0, 0, 0, out);
  return out;
}

Trajectory sample_trajectory(const ProtocolModel& model, int n_seq, RngStream& rng) {
  if (n_seq < 0) throw ValidationError("n_seq must be >= 0");
  Trajectory tr{{}, 1.0, {}, to_state(model.initial)};
  ComplexMatrix rho = model.initial;
  tr.outcomes.reserve(static_cast<std::size_t>(n_seq));
  for (int k = 0; k < n_seq; ++k) {
    const ComplexMatrix evolved = model.step.apply(rho);
    const double p0 = model.povm.probability(evolved, 0);
    const int g = rng.uniform() < p0 ? 0 : 1;
    const double p = g == 0 ? p0 : model.povm.probability(evolved, 1);
    tr.outcomes.push_back(g);
    tr.step_probabilities.push_back(p);
    tr.probability *= p;
    rho = normalized(model.povm.project(evolved, g), p);
  }
  tr.final_state = to_state(rho);
  return tr;
}

std::vector<double> multi_site_probabilities(const ThermalProbe& tp, int n_measured) {
  const int n = tp.params().n_spins;
  if (n_measured < 1 || n_measured > n) {
    throw ValidationError("number of measured qubits " + std::to_string(n_measured) +
                          " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<int> sites(static_cast<std::size_t>(n_measured));
  std::iota(sites.begin(), sites.end(), 1);
  const DensityMatrix reduced = partial_trace(tp.gibbs(), sites);
  std::vector<double> out(static_cast<std::size_t>(reduced.dim()));
  for (Eigen::Index i = 0; i < reduced.dim(); ++i) out[static_cast<std::size_t>(i)] = reduced.matrix()(i, i).real();
  return out;
}

namespace {

void entropy_walk(const ProtocolModel& model, int depth, const ComplexMatrix& rho, double prob, int level,
                  std::vector<double>& out) {
  const ComplexMatrix evolved = model.step.apply(rho);
  for (int g = 0; g < 2; ++g) {
    const double p = model.povm.probability(evolved, g);
    if (p < kBranchFloor) continue;
    const ComplexMatrix next = normalized(model.povm.project(evolved, g), p);
    out[static_cast<std::size_t>(level)] += prob * p * von_neumann_entropy(to_state(next));
    if (level + 1 < depth) entropy_walk(model, depth, next, prob * p, level + 1, out);
  }
}

}  // namespace

std::vector<double> exact_average_entropy(const ProtocolModel& model, int n_seq) {
  check_depth(n_seq);
  std::vector<double> out(static_cast<std::size_t>(n_seq), 0.0);
  entropy_walk(model, n_seq, model.initial, 1.0, 0, out);
  return out;
}

SampleMean average_entropy(std::span<const Trajectory> samples) {
  if (samples.empty()) throw ValidationError("average_entropy: empty sample set");
  std::vector<double> s;
  s.reserve(samples.size());
  for (const Trajectory& t : samples) s.push_back(von_neumann_entropy(t.final_state));
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  if (s.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace seqtherm
