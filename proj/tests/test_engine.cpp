/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "rapu/engine.hpp"

using namespace rapu;

namespace {

const std::string kFix = "$GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W*6A";
const std::string kVoid = "$GPRMC,123519,V,,,,,,,230394,,*33";

// Poll-grid arithmetic kept separate from the engine.
std::int64_t first_grid_at_or_after(std::int64_t t, std::int64_t period) {
  return (t + period - 1) / period * period;
}

Scenario eyes_closed_from(std::int64_t t, std::int64_t duration) {
  Scenario sc;
  sc.name = "fatigue";
  sc.ir.push_back({Millis(t), true});
  sc.duration = Millis(duration);
  return sc;
}

void add_button(Scenario& sc, std::int64_t t) {
  sc.events.push_back({Millis(t), ScenarioEvent::Kind::Button, {}});
}

template <class T>
std::vector<T> all_of(const Report& r) {
  std::vector<T> out;
  for (const auto& rec : r.records) {
    if (const auto* x = std::get_if<T>(&rec)) out.push_back(*x);
  }
  return out;
}

std::vector<CommandRecord> sms_commands(const Report& r) {
  std::vector<CommandRecord> out;
  for (const auto& c : all_of<CommandRecord>(r)) {
    if (std::holds_alternative<SendSms>(c.command)) out.push_back(c);
  }
  return out;
}

}  // namespace

TEST(Harness, NominalMinute) {
  Scenario sc;
  sc.name = "nominal";
  sc.duration = Millis(60'000);
  const auto r = run_scenario(Config{}, sc);
  EXPECT_EQ(r.final_state.phase, Phase::Monitoring);
  EXPECT_EQ(count_records<TriggerRecord>(r), 0u);
  EXPECT_EQ(count_sms_commands(r), 0u);
  EXPECT_EQ(count_records<PollRecord>(r), std::size_t(60'000 / 160 + 1));
  ASSERT_TRUE(r.reference);
  EXPECT_EQ(r.reference->pose(), (Accel{0, 0, 1}));
  EXPECT_EQ(r.reference->completed_at, Millis(31 * 160));

  const auto trans = all_of<TransitionRecord>(r);
  ASSERT_EQ(trans.size(), 1u);
  EXPECT_EQ(trans[0].t, Millis(32 * 160 - 160));
  EXPECT_EQ(trans[0].to, Phase::Monitoring);
}

TEST(Harness, PollCountConservation) {
  for (std::int64_t period : {1, 7, 100, 160, 333}) {
    for (std::int64_t d : {0, 1, 159, 160, 161, 9'999, 10'000, 12'345}) {
      Config c;
      c.sample_period_ms = period;
      Scenario sc;
      sc.duration = Millis(d);
      const auto r = run_scenario(c, sc);
      ASSERT_EQ(count_records<PollRecord>(r), std::size_t(d / period + 1)) << period << " " << d;
      for (const auto& p : all_of<PollRecord>(r)) ASSERT_EQ(p.frame.t.count() % period, 0);
    }
  }
}

TEST(Harness, FatigueEscalates) {
  const auto r = run_scenario(Config{}, eyes_closed_from(10'000, 30'000));
  const auto first_closed = first_grid_at_or_after(10'000, 160);
  const auto alert_at = first_closed + 14 * 160;
  ASSERT_EQ(first_closed, 10'080);
  ASSERT_EQ(alert_at, 12'320);

  const auto trans = all_of<TransitionRecord>(r);
  ASSERT_EQ(trans.size(), 3u);
  EXPECT_EQ(trans[1].t, Millis(alert_at));
  EXPECT_EQ(trans[1].to, Phase::FatigueAlert);
  EXPECT_EQ(trans[1].cause, TriggerCause::EyesClosed);
  EXPECT_EQ(trans[2].t, Millis(alert_at + 10'000));
  EXPECT_EQ(trans[2].to, Phase::Distress);

  const auto sms = sms_commands(r);
  ASSERT_EQ(sms.size(), 1u);
  EXPECT_EQ(sms[0].t, Millis(22'320));
  EXPECT_EQ(std::get<SendSms>(sms[0].command), (SendSms{TriggerCause::EyesClosed, Millis(22'320)}));
  EXPECT_EQ(r.final_state.phase, Phase::Distress);

  const auto done = all_of<SmsRecord>(r);
  ASSERT_EQ(done.size(), 1u);
  EXPECT_EQ(done[0].status, ModemSession::Phase::Done);
  EXPECT_EQ(done[0].body, "RAPU ALERT EYES_CLOSED LOC=UNKNOWN T=22320");
  EXPECT_EQ(done[0].t, Millis(22'320));
}

TEST(Harness, EscapeWithEyesOpenStaysNominal) {
  auto sc = eyes_closed_from(10'000, 30'000);
  sc.ir.push_back({Millis(17'320), false});
  add_button(sc, 12'320 + 5'000);
  const auto r = run_scenario(Config{}, sc);
  EXPECT_EQ(r.final_state.phase, Phase::Monitoring);
  EXPECT_EQ(count_sms_commands(r), 0u);
  const auto trans = all_of<TransitionRecord>(r);
  ASSERT_EQ(trans.size(), 3u);
  EXPECT_EQ(trans[2].t, Millis(17'320));
  EXPECT_EQ(trans[2].to, Phase::Monitoring);
}

// Eyes that stay shut re-arm the alarm on the next complete window.
TEST(Harness, EscapeWithEyesStillClosedRealerts) {
  auto sc = eyes_closed_from(10'000, 25'000);
  add_button(sc, 17'320);
  const auto r = run_scenario(Config{}, sc);
  const auto trans = all_of<TransitionRecord>(r);
  ASSERT_EQ(trans.size(), 4u);
  // windows keep completing every 15 polls after 12320
  EXPECT_EQ(trans[3].t, Millis(12'320 + 3 * 15 * 160));
  EXPECT_EQ(trans[3].to, Phase::FatigueAlert);
  EXPECT_EQ(count_sms_commands(r), 0u);
}

TEST(Harness, ButtonBeforeAndAtDeadline) {
  for (std::int64_t offset : {9'999, 10'000}) {
    auto sc = eyes_closed_from(10'000, 12'320 + 10'500);
    add_button(sc, 12'320 + offset);
    const auto r = run_scenario(Config{}, sc);
    const auto sms = sms_commands(r);
    if (offset < 10'000) {
      EXPECT_TRUE(sms.empty());
    } else {
      ASSERT_EQ(sms.size(), 1u);
      EXPECT_EQ(sms[0].t, Millis(22'320));
      EXPECT_EQ(r.final_state.phase, Phase::Distress);
    }
  }
}

TEST(Harness, AlcoholLocksDown) {
  Scenario sc;
  sc.gas.push_back({Millis(8'000), 0.9});
  sc.duration = Millis(20'000);
  for (int i = 0; i < 50; ++i) add_button(sc, 8'000 + i * 100);
  const auto r = run_scenario(Config{}, sc);
  const auto sms = sms_commands(r);
  ASSERT_EQ(sms.size(), 1u);
  EXPECT_EQ(sms[0].t, Millis(8'000));
  EXPECT_EQ(r.final_state.phase, Phase::Distress);
  EXPECT_EQ(count_records<TransitionRecord>(r), 2u);
}

TEST(Harness, AlcoholDuringCalibrationWaitsForMonitoring) {
  Scenario sc;
  sc.gas.push_back({Millis(0), 0.9});
  sc.duration = Millis(6'000);
  const auto r = run_scenario(Config{}, sc);
  const auto sms = sms_commands(r);
  ASSERT_EQ(sms.size(), 1u);
  EXPECT_EQ(sms[0].t, Millis(32 * 160));
}

TEST(Harness, SmsUsesLatestValidFix) {
  Scenario sc;
  sc.gas.push_back({Millis(9'000), 0.9});
  sc.duration = Millis(10'000);
  sc.events.push_back({Millis(1'000), ScenarioEvent::Kind::Nmea, kFix});
  sc.events.push_back({Millis(2'000), ScenarioEvent::Kind::Nmea, kVoid});
  sc.events.push_back({Millis(3'000), ScenarioEvent::Kind::Nmea, "$GPRMC*garbage"});
  const auto r = run_scenario(Config{}, sc);
  const auto done = all_of<SmsRecord>(r);
  ASSERT_EQ(done.size(), 1u);
  EXPECT_EQ(done[0].body, "RAPU ALERT ALCOHOL LAT=48.117300 LON=11.516667 T=9120");
  const auto nmea = all_of<NmeaRecord>(r);
  ASSERT_EQ(nmea.size(), 3u);
  EXPECT_TRUE(std::holds_alternative<std::string>(nmea[2].outcome));
}

TEST(Harness, ModemFaultsShowUpInTranscript) {
  Config c;
  c.modem_fault_script = ModemFaults{false, {}};
  c.modem_latency_ms = 50;
  Scenario sc;
  sc.gas.push_back({Millis(6'000), 0.9});
  sc.duration = Millis(10'000);
  const auto r = run_scenario(c, sc);
  const auto done = all_of<SmsRecord>(r);
  ASSERT_EQ(done.size(), 1u);
  EXPECT_EQ(done[0].status, ModemSession::Phase::Failed);
  const auto io = all_of<ModemRecord>(r);
  ASSERT_FALSE(io.empty());
  EXPECT_EQ(io.front().t, Millis(6'080 + 50));
  EXPECT_EQ(io.front().bytes, "AT\r\n");
  for (std::size_t i = 1; i < io.size(); ++i) EXPECT_EQ(io[i].t - io[i - 1].t, Millis(50));
}

TEST(Harness, DialogueCutShortByScenarioEnd) {
  Config c;
  c.modem_latency_ms = 100;
  Scenario sc;
  sc.gas.push_back({Millis(6'000), 0.9});
  sc.duration = Millis(6'080 + 250);
  const auto r = run_scenario(c, sc);
  EXPECT_EQ(count_sms_commands(r), 1u);
  const auto done = all_of<SmsRecord>(r);
  ASSERT_EQ(done.size(), 1u);
  EXPECT_EQ(done[0].status, ModemSession::Phase::Failed);
  EXPECT_EQ(done[0].t, Millis(6'330));
  EXPECT_EQ(all_of<ModemRecord>(r).size(), 2u);  // AT out at 6180, OK back at 6280
}

TEST(Harness, RecordsAreTimeOrdered) {
  auto sc = eyes_closed_from(10'000, 30'000);
  sc.events.push_back({Millis(500), ScenarioEvent::Kind::Nmea, kFix});
  const auto r = run_scenario(Config{}, sc);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    ASSERT_LE(record_time(r.records[i - 1]), record_time(r.records[i]));
  }
}

TEST(Report, EmptyIsSummaryOnly) {
  const std::string text = emit_report(Report{});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(text.rfind("{\"summary\":{\"transitions\":0,", 0), 0u);
}

TEST(Report, TransitionPrecedesSummary) {
  Report r;
  r.records.push_back(TransitionRecord{Millis(5), Phase::Calibrating, Phase::Monitoring, {}});
  const std::string text = emit_report(r);
  std::istringstream in(text);
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(first, R"({"record":"transition","t_ms":5,"from":"CALIBRATING","to":"MONITORING","cause":null})");
  EXPECT_EQ(second.rfind("{\"summary\":{\"transitions\":1,", 0), 0u);
}

TEST(Report, Deterministic) {
  auto sc = eyes_closed_from(10'000, 30'000);
  sc.events.push_back({Millis(500), ScenarioEvent::Kind::Nmea, kFix});
  const auto a = emit_report(run_scenario(Config{}, sc));
  const auto b = emit_report(run_scenario(Config{}, sc));
  EXPECT_EQ(a, b);
}

TEST(Engine, LiveRecordingReplaysIdentically) {
  Engine live(Config{}, Scenario{}, true);
  live.advance_to(Millis(6'000));
  live.deliver(NmeaLine{kFix});
  live.deliver(UiInjection{true});
  live.advance_to(Millis(9'000));
  live.deliver(UiInjection{false});
  live.advance_to(Millis(10'000));
  live.deliver(UiInjection{0.7});
  live.advance_to(Millis(12'000));

  auto replay = run_scenario(Config{}, live.recording());
  std::vector<Record> filtered;
  for (const auto& rec : live.records()) {
    if (!std::holds_alternative<InjectRecord>(rec)) filtered.push_back(rec);
  }
  auto a = make_report(live, "x");
  a.records = filtered;
  replay.scenario_name = "x";
  EXPECT_EQ(emit_report(a), emit_report(replay));
  EXPECT_EQ(replay.final_state.phase, Phase::Distress);
}

TEST(Config, DefaultWindowSpansTwoToThreeSeconds) {
  const Config c;
  const auto span = std::int64_t(c.window_n) * c.sample_period_ms;
  EXPECT_GE(span, 2'000);
  EXPECT_LE(span, 3'000);
  EXPECT_EQ(c.closed_k, 12u);
  EXPECT_EQ(c.window_n, 15u);
  EXPECT_EQ(c.escape_window_ms, 10'000);
}

TEST(Config, Validation) {
  EXPECT_NO_THROW(validate(Config{}));
  auto bad = [](auto mutate) {
    Config c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(validate(bad([](Config& c) { c.closed_k = 16; })), ConfigInvalid);
  EXPECT_THROW(validate(bad([](Config& c) { c.sample_period_ms = 0; })), ConfigInvalid);
  EXPECT_THROW(validate(bad([](Config& c) { c.alcohol_threshold = 1.2; })), ConfigInvalid);
  EXPECT_THROW(validate(bad([](Config& c) { c.tilt_threshold_g = 0; })), ConfigInvalid);
  EXPECT_THROW(validate(bad([](Config& c) { c.recipient = "abc"; })), ConfigInvalid);
  EXPECT_THROW(validate(bad([](Config& c) { c.distress_text = "SOS!"; })), ConfigInvalid);
  EXPECT_THROW(run_scenario(bad([](Config& c) { c.window_n = 0; }), Scenario{}), ConfigInvalid);
}

TEST(Config, JsonOverlay) {
  std::istringstream in(R"({"escape_window_ms":5000,"modem_fault_script":{"error_counts":{"AT":1}}})");
  const auto c = load_config(in);
  EXPECT_EQ(c.escape_window_ms, 5000);
  ASSERT_TRUE(c.modem_fault_script);
  EXPECT_EQ(c.modem_fault_script->error_counts.at("AT"), 1);
  EXPECT_TRUE(c.modem_fault_script->registered);

  std::istringstream unknown(R"({"colour":"red"})");
  EXPECT_THROW(load_config(unknown), ConfigInvalid);
  std::istringstream negative(R"({"window_n":-3})");
  EXPECT_THROW(load_config(negative), ConfigInvalid);
  std::istringstream typed(R"({"window_n":"15"})");
  EXPECT_THROW(load_config(typed), ConfigInvalid);
  std::istringstream broken("{");
  EXPECT_THROW(load_config(broken), ConfigInvalid);
}
