/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "rapu/sensors.hpp"

using rapu::Millis;

namespace {

rapu::Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return rapu::ingest_scenario(in);
}

std::string reason_of(const std::string& text) {
  try {
    parse(text);
  } catch (const rapu::ParseError& e) {
    return e.reason();
  }
  return "<no error>";
}

std::size_t line_of(const std::string& text) {
  try {
    parse(text);
  } catch (const rapu::ParseError& e) {
    return e.line_no();
  }
  return 0;
}

}  // namespace

TEST(Ingest, EmptyStreamIsVacuousScenario) {
  auto sc = parse("");
  EXPECT_EQ(sc.duration, Millis(0));
  EXPECT_TRUE(sc.ir.empty() && sc.accel.empty() && sc.gas.empty() && sc.events.empty());
  auto f = rapu::sample_at(sc, Millis(0));
  EXPECT_FALSE(f.ir_closed);
  EXPECT_EQ(f.accel, (rapu::Accel{0, 0, 1}));
  EXPECT_EQ(f.gas, 0.0);
}

TEST(Ingest, SingleGasPoint) {
  auto sc = parse(R"({"t_ms":0,"ch":"gas","v":0.9})");
  ASSERT_EQ(sc.gas.size(), 1u);
  EXPECT_EQ(sc.gas[0].t, Millis(0));
  EXPECT_EQ(sc.gas[0].value, 0.9);
}

TEST(Ingest, RejectsOutOfRangeValues) {
  EXPECT_EQ(reason_of(R"({"t_ms":0,"ch":"gas","v":1.5})"), "gas out of range");
  EXPECT_EQ(reason_of(R"({"t_ms":0,"ch":"gas","v":-0.1})"), "gas out of range");
  EXPECT_EQ(reason_of(R"({"t_ms":0,"ch":"accel","v":[0,2.01,0]})"), "accel out of range");
  EXPECT_EQ(reason_of(R"({"t_ms":0,"ch":"ir","v":2})"), "ir value must be 0 or 1");
}

TEST(Ingest, RejectsStructuralProblems) {
  EXPECT_EQ(line_of("{\"t_ms\":0,\"ch\":\"gas\",\"v\":0.1}\n{not json"), 2u);
  EXPECT_EQ(reason_of(R"({"t_ms":0,"ch":"gas","v":0.1,"extra":1})"), "unknown key \"extra\"");
  EXPECT_EQ(reason_of(R"({"t_ms":-5,"ch":"gas","v":0.1})"), "t_ms must be non-negative");
  EXPECT_EQ(reason_of(R"({"t_ms":1.5,"ch":"gas","v":0.1})"), "t_ms must be an integer");
  EXPECT_EQ(reason_of("{\"t_ms\":10,\"ch\":\"gas\",\"v\":0.1}\n{\"t_ms\":10,\"ch\":\"gas\",\"v\":0.2}"),
            "non-increasing timestamp");
  EXPECT_EQ(reason_of("{\"t_ms\":10,\"ch\":\"gas\",\"v\":0.1}\n{\"meta\":{\"name\":\"x\"}}"),
            "meta must be the first line");
  EXPECT_EQ(reason_of(R"({"t_ms":1,"ev":"horn"})"), "unknown event kind");
  EXPECT_EQ(reason_of("{\"meta\":{\"duration_ms\":100}}\n{\"t_ms\":200,\"ev\":\"button\"}"),
            "timestamp beyond duration_ms");
}

TEST(Ingest, InterleavedChannelsAndMeta) {
  auto sc = parse(
      "{\"meta\":{\"name\":\"mix\",\"duration_ms\":5000}}\n"
      "{\"t_ms\":0,\"ch\":\"ir\",\"v\":1}\n"
      "\n"
      "{\"t_ms\":100,\"ch\":\"accel\",\"v\":[0.1,0,0.9]}\n"
      "{\"t_ms\":50,\"ch\":\"gas\",\"v\":0.3}\n"
      "{\"t_ms\":70,\"ev\":\"button\"}\n"
      "{\"t_ms\":70,\"ev\":\"nmea\",\"v\":\"$GPGSV*00\"}\n");
  EXPECT_EQ(sc.name, "mix");
  EXPECT_EQ(sc.duration, Millis(5000));
  EXPECT_EQ(sc.ir.size(), 1u);
  EXPECT_EQ(sc.accel.size(), 1u);
  EXPECT_EQ(sc.gas.size(), 1u);
  ASSERT_EQ(sc.events.size(), 2u);
  EXPECT_EQ(sc.events[1].kind, rapu::ScenarioEvent::Kind::Nmea);
}

TEST(Ingest, DurationDefaultsToLatestTimestamp) {
  auto sc = parse("{\"t_ms\":300,\"ch\":\"ir\",\"v\":1}\n{\"t_ms\":900,\"ev\":\"button\"}");
  EXPECT_EQ(sc.duration, Millis(900));
}

TEST(SampleAt, ZeroOrderHold) {
  auto sc = parse(
      "{\"t_ms\":0,\"ch\":\"gas\",\"v\":0.2}\n"
      "{\"t_ms\":1000,\"ch\":\"gas\",\"v\":0.8}\n"
      "{\"t_ms\":2000,\"ch\":\"accel\",\"v\":[0.5,0,0.86]}");
  EXPECT_EQ(rapu::sample_at(sc, Millis(999)).gas, 0.2);
  EXPECT_EQ(rapu::sample_at(sc, Millis(1000)).gas, 0.8);
  EXPECT_EQ(rapu::sample_at(sc, Millis(2500)).accel, (rapu::Accel{0.5, 0, 0.86}));
  EXPECT_EQ(rapu::sample_at(sc, Millis(1999)).accel, (rapu::Accel{0, 0, 1}));
  EXPECT_EQ(rapu::sample_at(rapu::Scenario{}, Millis(5000)), (rapu::SensorFrame{Millis(5000)}));
}

// sample_at agrees with a linear scan over all points, for random tracks.
TEST(SampleAt, MatchesLinearScanOracle) {
  std::mt19937 rng(7);
  for (int round = 0; round < 200; ++round) {
    rapu::Scenario sc;
    std::int64_t t = 0;
    const int n = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int i = 0; i < n; ++i) {
      t += std::uniform_int_distribution<int>(1, 400)(rng);
      const int ch = std::uniform_int_distribution<int>(0, 2)(rng);
      const double u = std::uniform_real_distribution<double>(0, 1)(rng);
      if (ch == 0) sc.ir.push_back({Millis(t), u < 0.5});
      if (ch == 1) sc.accel.push_back({Millis(t), {u, -u, 1 - u}});
      if (ch == 2) sc.gas.push_back({Millis(t), u});
    }
    for (std::int64_t q = 0; q <= t + 500; q += 37) {
      const auto f = rapu::sample_at(sc, Millis(q));
      ASSERT_EQ(f.ir_closed, rapu::oracle::zoh_scan(sc.ir, q, false));
      ASSERT_EQ(f.accel, rapu::oracle::zoh_scan(sc.accel, q, rapu::Accel{}));
      ASSERT_EQ(f.gas, rapu::oracle::zoh_scan(sc.gas, q, 0.0));
      ASSERT_EQ(f, rapu::sample_at(sc, Millis(q)));
    }
  }
}

TEST(Scenario, WriteThenIngestIsIdentity) {
  std::mt19937 rng(11);
  for (int round = 0; round < 50; ++round) {
    rapu::Scenario sc;
    sc.name = "r" + std::to_string(round);
    std::int64_t t = 0;
    for (int i = 0; i < 20; ++i) {
      t += std::uniform_int_distribution<int>(1, 100)(rng);
      const double u = std::uniform_real_distribution<double>(0, 1)(rng);
      sc.ir.push_back({Millis(t), u < 0.3});
      sc.accel.push_back({Millis(t), {u * 2 - 1, 0.25, -u}});
      sc.gas.push_back({Millis(t), u});
      if (u < 0.2) sc.events.push_back({Millis(t), rapu::ScenarioEvent::Kind::Button, {}});
    }
    sc.duration = Millis(t + 10);
    std::stringstream ss;
    rapu::write_scenario(sc, ss);
    EXPECT_EQ(rapu::ingest_scenario(ss), sc);
  }
}

TEST(Hold, OverwritesSameInstant) {
  std::vector<rapu::TrackPoint<double>> track;
  rapu::hold(track, Millis(10), 0.1);
  rapu::hold(track, Millis(10), 0.4);
  rapu::hold(track, Millis(20), 0.5);
  ASSERT_EQ(track.size(), 2u);
  EXPECT_EQ(track[0].value, 0.4);
  EXPECT_THROW(rapu::hold(track, Millis(5), 0.1), rapu::TimeReversal);
}
