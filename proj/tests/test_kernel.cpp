/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rapu/kernel.hpp"

using rapu::EventKernel;
using rapu::Millis;

namespace {

std::vector<int> payloads(const std::vector<rapu::TimedEvent<int>>& evs) {
  std::vector<int> out;
  for (const auto& e : evs) out.push_back(e.payload);
  return out;
}

}  // namespace

TEST(Kernel, ZeroDelayFiresOnNextAdvance) {
  EventKernel<int> k;
  k.advance_until(Millis(250));
  k.schedule(7, k.now());
  auto fired = k.advance_until(k.now());
  ASSERT_EQ(fired.size(), 1u);
  EXPECT_EQ(fired[0].at, Millis(250));
}

TEST(Kernel, BoundaryIsInclusive) {
  EventKernel<int> k;
  k.schedule(1, Millis(10'000));
  EXPECT_TRUE(k.advance_until(Millis(9'999)).empty());
  EXPECT_EQ(payloads(k.advance_until(Millis(10'000))), std::vector<int>{1});
}

TEST(Kernel, EmptyQueueStillMovesClock) {
  EventKernel<int> k;
  EXPECT_TRUE(k.advance_until(Millis(500)).empty());
  EXPECT_EQ(k.now(), Millis(500));
}

TEST(Kernel, SameInstantIsFifo) {
  EventKernel<int> k;
  k.schedule(100, Millis(100));  // A
  k.schedule(101, Millis(100));  // B
  k.schedule(50, Millis(50));
  EXPECT_EQ(payloads(k.advance_until(Millis(1000))), (std::vector<int>{50, 100, 101}));
}

TEST(Kernel, CancelSemantics) {
  EventKernel<int> k;
  auto a = k.schedule(1, Millis(10));
  auto b = k.schedule(2, Millis(20));
  auto c = k.schedule(3, Millis(30));
  EXPECT_TRUE(k.cancel(b));
  EXPECT_FALSE(k.cancel(b));
  EXPECT_EQ(payloads(k.advance_until(Millis(40))), (std::vector<int>{1, 3}));
  EXPECT_FALSE(k.cancel(a));
  EXPECT_FALSE(k.cancel(c));
}

TEST(Kernel, CallbackSeesEventTimeAndSameInstantReschedule) {
  EventKernel<int> k;
  k.schedule(1, Millis(100));
  std::vector<std::pair<int, Millis>> seen;
  auto fired = k.advance_until(Millis(200), [&](const rapu::TimedEvent<int>& ev) {
    seen.emplace_back(ev.payload, k.now());
    if (ev.payload == 1) k.schedule(2, k.now());
  });
  ASSERT_EQ(seen.size(), 2u);
  EXPECT_EQ(seen[0], std::pair(1, Millis(100)));
  EXPECT_EQ(seen[1], std::pair(2, Millis(100)));
  EXPECT_EQ(fired.size(), 2u);
  EXPECT_EQ(k.now(), Millis(200));
}

TEST(Kernel, Errors) {
  EventKernel<int> k;
  k.advance_until(Millis(100));
  EXPECT_THROW(k.schedule(1, Millis(99)), rapu::PastDeadline);
  EXPECT_THROW(k.advance_until(Millis(50)), rapu::TimeReversal);
}

// Random schedule/cancel/advance programs agree with the naive queue model,
// fired timestamps never go backwards, and fired = scheduled - cancelled.
TEST(Kernel, MatchesNaiveQueueModel) {
  std::mt19937 rng(20260101);
  for (int round = 0; round < 300; ++round) {
    EventKernel<int> k;
    rapu::oracle::NaiveQueue<int> model;
    std::vector<rapu::EventHandle> handles;
    std::vector<std::uint64_t> model_ids;
    std::vector<int> got, want;
    std::size_t scheduled = 0, cancelled = 0;
    std::int64_t last_fire = -1;
    int next_payload = 0;

    for (int op = 0; op < 60; ++op) {
      const int kind = std::uniform_int_distribution<int>(0, 9)(rng);
      if (kind < 6) {
        const auto at = k.now().count() + std::uniform_int_distribution<int>(0, 30)(rng);
        handles.push_back(k.schedule(next_payload, Millis(at)));
        model_ids.push_back(model.schedule(next_payload, at));
        ++next_payload;
        ++scheduled;
      } else if (kind < 8 && !handles.empty()) {
        const auto i = std::uniform_int_distribution<std::size_t>(0, handles.size() - 1)(rng);
        const bool a = k.cancel(handles[i]);
        const bool b = model.cancel(model_ids[i]);
        ASSERT_EQ(a, b);
        cancelled += a ? 1 : 0;
      } else {
        const auto t = k.now().count() + std::uniform_int_distribution<int>(0, 40)(rng);
        for (const auto& e : k.advance_until(Millis(t))) {
          ASSERT_GE(e.at.count(), last_fire);
          last_fire = e.at.count();
          got.push_back(e.payload);
        }
        for (const auto& e : model.advance_until(t)) want.push_back(e.payload);
      }
    }
    for (const auto& e : k.advance_until(k.now() + Millis(1000))) got.push_back(e.payload);
    for (const auto& e : model.advance_until(k.now().count())) want.push_back(e.payload);
    ASSERT_EQ(got, want);
    ASSERT_EQ(got.size(), scheduled - cancelled);
    ASSERT_EQ(k.pending(), 0u);
  }
}
