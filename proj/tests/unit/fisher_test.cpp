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
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "seqtherm/fisher.hpp"
#include "seqtherm/spin_model.hpp"

namespace seqtherm {
namespace {

ProtocolConfig make_config(int n, double temp, double kappa, double tau, int n_seq) {
  ProtocolConfig cfg;
  cfg.chain = {n, 1.0};
  cfg.temperature = temp;
  cfg.kappa = kappa;
  cfg.tau = tau;
  cfg.n_seq = n_seq;
  return cfg;
}

TEST(CfiStatic, UnbiasedCoinHasNoInformation) {
  const std::vector<double> p{0.5, 0.5};
  EXPECT_EQ(cfi_static(p, p, p, {1e-3}), 0.0);
}

TEST(CfiStatic, BernoulliClosedForm) {
  const double t = 0.25;
  const double d = 1e-4;
  const std::vector<double> lo{t - d, 1.0 - t + d};
  const std::vector<double> mid{t, 1.0 - t};
  const std::vector<double> hi{t + d, 1.0 - t - d};
  EXPECT_NEAR(cfi_static(lo, mid, hi, {d}), 16.0 / 3.0, 1e-10);
}

TEST(CfiStatic, Validation) {
  const std::vector<double> two{0.5, 0.5};
  const std::vector<double> three{0.2, 0.3, 0.5};
  const std::vector<double> bad{0.5, 0.6};
  EXPECT_THROW(cfi_static(two, three, two, {1e-3}), ValidationError);
  EXPECT_THROW(cfi_static(two, bad, two, {1e-3}), ValidationError);
  EXPECT_THROW(cfi_static(two, two, two, {0.0}), ValidationError);
}

TEST(CfiStatic, SingleSiteIsZeroForEveryChain) {
  for (int n : {2, 4, 6}) {
    const double t = 0.3;
    const auto s = DerivativeScheme::for_temperature(t);
    const auto lo = multi_site_probabilities(gibbs_state({n, 1.0}, t - s.delta_t), 1);
    const auto mid = multi_site_probabilities(gibbs_state({n, 1.0}, t), 1);
    const auto hi = multi_site_probabilities(gibbs_state({n, 1.0}, t + s.delta_t), 1);
    EXPECT_LT(cfi_static(lo, mid, hi, s), 1e-10) << "N=" << n;
  }
}

TEST(CfiStatic, FullRegisterBelowQfi) {
  const ChainParams p{4, 1.0};
  const double t = find_t_star(p, linspace(0.01, 2.0, 400)).t_star;
  const auto s = DerivativeScheme::for_temperature(t);
  const double f = cfi_static(multi_site_probabilities(gibbs_state(p, t - s.delta_t), 4),
                              multi_site_probabilities(gibbs_state(p, t), 4),
                              multi_site_probabilities(gibbs_state(p, t + s.delta_t), 4), s);
  const double q = qfi_thermal(gibbs_state(p, t));
  EXPECT_GT(f, 0.0);
  EXPECT_LT(f, q);
}

TEST(DerivativeScheme, DefaultsAndValidation) {
  EXPECT_DOUBLE_EQ(DerivativeScheme::for_temperature(0.3).delta_t, 1e-4);
  EXPECT_DOUBLE_EQ(DerivativeScheme::for_temperature(10.0).delta_t, 1e-3);
  EXPECT_THROW(DerivativeScheme{0.01}.validate(0.3), ValidationError);
  EXPECT_THROW(DerivativeScheme{-1e-4}.validate(0.3), ValidationError);
  EXPECT_NO_THROW(DerivativeScheme{1e-4}.validate(0.3));
}

TEST(ExactCfi, FirstMeasurementCarriesNoInformation) {
  const auto f = exact_sequential_cfi(make_config(4, 0.3, 1.0, 4.0, 1));
  EXPECT_LT(f.at(1), 1e-10);
}

TEST(ExactCfi, NonDecreasing) {
  for (double kappa : {0.0, 0.5, 1.0, 3.0}) {
    const auto f = exact_sequential_cfi(make_config(3, 0.4, kappa, 3.0, 8));
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      EXPECT_GE(f.increments[k], -1e-12) << "kappa " << kappa;
      if (k > 0) {
        EXPECT_GE(f.values[k], f.values[k - 1] - 1e-12);
      }
    }
  }
}

TEST(ExactCfi, ExceedsQfiWithinAFewSteps) {
  const ChainParams p{4, 1.0};
  const double t = find_t_star(p, linspace(0.01, 2.0, 400)).t_star;
  const auto f = exact_sequential_cfi(make_config(4, t, 1.0, 4.0, 8));
  EXPECT_GT(f.at(8), qfi_thermal(gibbs_state(p, t)));
}

TEST(ExactCfi, ResetMakesIncrementsAdditive) {
  auto cfg = make_config(3, 0.4, 1.0, 3.0, 6);
  cfg.dynamics = StepDynamics::kReset;
  const auto f = exact_sequential_cfi(cfg);
  // A reset step measures the Gibbs state, whose single-site marginal is
  // T-independent, so F(1) vanishes and additivity holds trivially.
  for (int n = 1; n <= 6; ++n) EXPECT_NEAR(f.at(n), n * f.at(1), 1e-8);
}

TEST(ExactCfi, ChainRuleMatchesFlatDistribution) {
  // F(n) equals the static Fisher information of the full record distribution.
  const auto cfg = make_config(3, 0.5, 1.0, 3.0, 6);
  const auto s = DerivativeScheme::for_temperature(cfg.temperature);
  const auto f = exact_sequential_cfi(cfg, s);
  for (int n = 1; n <= 6; ++n) {
    const auto lo = trajectory_probabilities(build_protocol_model(cfg, cfg.temperature - s.delta_t), n);
    const auto mid = trajectory_probabilities(build_protocol_model(cfg, cfg.temperature), n);
    const auto hi = trajectory_probabilities(build_protocol_model(cfg, cfg.temperature + s.delta_t), n);
    EXPECT_NEAR(cfi_static(lo, mid, hi, s), f.at(n), 1e-7 * std::max(1.0, f.at(n))) << "n " << n;
  }
}

TEST(ExactCfi, RobustToStepSize) {
  const auto cfg = make_config(4, 0.3, 1.0, 4.0, 8);
  const auto a = exact_sequential_cfi(cfg, {1e-4});
  const auto b = exact_sequential_cfi(cfg, {5e-5});
  for (int n = 2; n <= 8; ++n) EXPECT_NEAR(b.at(n) / a.at(n), 1.0, 5e-3) << "n " << n;
}

TEST(McCfi, AgreesWithExactTree) {
  const auto cfg = make_config(3, 0.4, 1.0, 3.0, 6);
  const auto s = DerivativeScheme::for_temperature(cfg.temperature);
  const auto exact = exact_sequential_cfi(cfg, s);
  const auto mc = mc_sequential_cfi(cfg, s, 2000, 11);
  for (int n = 2; n <= 6; ++n) {
    const auto k = static_cast<std::size_t>(n - 1);
    EXPECT_LT(std::abs(mc.values[k] - exact.values[k]), 3.0 * mc.value_std_errors[k] + 1e-12) << "n " << n;
  }
}

TEST(McCfi, DeterministicForSeed) {
  const auto cfg = make_config(3, 0.4, 1.0, 3.0, 4);
  const auto s = DerivativeScheme::for_temperature(cfg.temperature);
  EXPECT_EQ(mc_sequential_cfi(cfg, s, 200, 3).values, mc_sequential_cfi(cfg, s, 200, 3).values);
}

TEST(McCfi, SingleSampleEstimatesAverageToExact) {
  const auto cfg = make_config(2, 0.5, 1.0, 2.0, 3);
  const auto s = DerivativeScheme::for_temperature(cfg.temperature);
  const auto exact = exact_sequential_cfi(cfg, s);
  double sum = 0.0;
  double sum2 = 0.0;
  const int seeds = 200;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto mc = mc_sequential_cfi(cfg, s, 1, static_cast<std::uint64_t>(seed));
    ASSERT_TRUE(std::isfinite(mc.at(3)));
    sum += mc.at(3);
    sum2 += mc.at(3) * mc.at(3);
  }
  const double mean = sum / seeds;
  const double se = std::sqrt((sum2 / seeds - mean * mean) / (seeds - 1));
  EXPECT_LT(std::abs(mean - exact.at(3)), 4.0 * se);
}

TEST(McCfi, ResetIncrementsAreConstant) {
  auto cfg = make_config(3, 0.4, 1.0, 3.0, 5);
  cfg.dynamics = StepDynamics::kReset;
  const auto mc = mc_sequential_cfi(cfg, DerivativeScheme::for_temperature(0.4), 500, 2);
  for (std::size_t k = 1; k < mc.increments.size(); ++k) {
    EXPECT_NEAR(mc.increments[k], mc.increments[0],
                3.0 * (mc.increment_std_errors[k] + mc.increment_std_errors[0]) + 1e-12);
  }
}

TEST(NseqStar, RatioAtThresholdExceedsOne) {
  const double t = 0.5;
  const double q = qfi_thermal(gibbs_state({4, 1.0}, t));
  const auto r = find_nseq_star(make_config(4, t, 1.0, 4.0, 1), q, 16);
  ASSERT_TRUE(r.n_star.has_value());
  EXPECT_GE(r.ratio, 1.0);
  if (*r.n_star > 1) {
    EXPECT_LE(r.series.at(*r.n_star - 1), q);
  }
}

TEST(NseqStar, MissingThresholdReportsAchievedValue) {
  const double q = qfi_thermal(gibbs_state({3, 1.0}, 0.4));
  const auto r = find_nseq_star(make_config(3, 0.4, 0.05, 3.0, 1), 1e6 * q, 4);
  EXPECT_FALSE(r.n_star.has_value());
  EXPECT_GT(r.fisher, 0.0);
  EXPECT_NEAR(r.ratio, r.fisher / (1e6 * q), 1e-15);
}

TEST(NseqStar, ThresholdFallsAsTemperatureRises) {
  std::optional<int> prev;
  for (double t : {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    const double q = qfi_thermal(gibbs_state({4, 1.0}, t));
    const auto r = find_nseq_star(make_config(4, t, 1.0, 4.0, 1), q, 12);
    ASSERT_TRUE(r.n_star.has_value()) << "T=" << t;
    if (prev) {
      EXPECT_LE(*r.n_star, *prev) << "T=" << t;
    }
    prev = r.n_star;
  }
}

}  // namespace
}  // namespace seqtherm
