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

#include <atomic>
#include <stdexcept>
#include <vector>

#include "seqtherm/parallel.hpp"
#include "seqtherm/rng.hpp"

namespace seqtherm {
namespace {

TEST(ParallelFor, VisitsEveryIndexOnce) {
  for (unsigned workers : {1U, 3U}) {
    set_worker_count(workers);
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i].fetch_add(1); });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  set_worker_count(0);
}

TEST(ParallelFor, NestedCallsComplete) {
  set_worker_count(4);
  std::atomic<int> total{0};
  parallel_for(8, [&](std::size_t) { parallel_for(8, [&](std::size_t) { total.fetch_add(1); }); });
  EXPECT_EQ(total.load(), 64);
  set_worker_count(0);
}

TEST(ParallelFor, PropagatesExceptions) {
  set_worker_count(2);
  EXPECT_THROW(parallel_for(10,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  set_worker_count(0);
}

TEST(ParallelFor, ResultsIndependentOfWorkerCount) {
  auto draw = [] {
    std::vector<double> v(64);
    parallel_for(v.size(), [&](std::size_t i) { v[i] = RngStream(9, i).uniform(); });
    return v;
  };
  set_worker_count(1);
  const auto a = draw();
  set_worker_count(4);
  const auto b = draw();
  set_worker_count(0);
  EXPECT_EQ(a, b);
}

TEST(RngStream, DistinctStreamsDiffer) {
  EXPECT_NE(RngStream(1, 0).next_u64(), RngStream(1, 1).next_u64());
  EXPECT_NE(RngStream(1, 0).next_u64(), RngStream(2, 0).next_u64());
  EXPECT_EQ(RngStream(5, 3).next_u64(), RngStream(5, 3).next_u64());
}

}  // namespace
}  // namespace seqtherm
