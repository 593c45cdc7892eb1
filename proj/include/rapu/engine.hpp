/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rapu/calibration.hpp"
#include "rapu/config.hpp"
#include "rapu/detectors.hpp"
#include "rapu/escalation.hpp"
#include "rapu/kernel.hpp"
#include "rapu/modem.hpp"
#include "rapu/nmea.hpp"
#include "rapu/report.hpp"
#include "rapu/sensors.hpp"

namespace rapu {

// Kernel event payloads.
struct SensorPoll {};
struct NmeaLine {
  std::string sentence;
};
struct UiInjection {
  std::variant<bool, Accel, double> value;  // ir_closed, accel, gas
};

using EnginePayload = std::variant<SensorPoll, ButtonPress, NmeaLine, UiInjection, TimerExpiry>;

/**
 * The assembled device: kernel, sampling, calibration, detectors, alarm FSM,
 * actuators and the SMS pipeline. Replay and live sessions both drive this
 * class; replay reads stimuli from a scenario, live sessions write UI
 * injections into the same tracks.
 *
 * Ordering at one instant: internal timers, then the grid poll, then
 * external inputs in delivery order.
 */
class Engine {
 public:
  using StateObserver = std::function<void(const SystemState&, Millis)>;

  explicit Engine(Config config, Scenario stimuli = {}, bool record_inputs = false)
      : config_(std::move(config)), stimuli_(std::move(stimuli)), record_inputs_(record_inputs) {
    validate(config_);
    lcd_ = render_lcd(state_, Millis{0});
  }

  Millis now() const noexcept { return kernel_.now(); }
  const Config& config() const noexcept { return config_; }
  const SystemState& state() const noexcept { return state_; }
  const std::vector<Record>& records() const noexcept { return records_; }
  const std::optional<CalibrationReference>& reference() const noexcept { return reference_; }
  const DetectorStates& detector_states() const noexcept { return detectors_; }
  const std::optional<GeoFix>& last_fix() const noexcept { return last_fix_; }
  const std::optional<GeoFix>& last_valid_fix() const noexcept { return last_valid_fix_; }
  bool speaker_on() const noexcept { return speaker_; }
  bool relay_on() const noexcept { return relay_; }
  const std::string& display_text() const noexcept { return display_; }
  const LcdLines& lcd() const noexcept { return lcd_; }
  const std::optional<ModemSession>& sms_session() const noexcept { return session_; }
  std::size_t polls() const noexcept { return polls_; }
  std::size_t calibration_progress() const noexcept { return calib_buffer_.size(); }

  /// Live sessions record what they were fed; this is that recording.
  Scenario recording() const {
    Scenario sc = stimuli_;
    sc.duration = std::max(sc.duration, now());
    if (!sc.ir.empty()) sc.duration = std::max(sc.duration, sc.ir.back().t);
    if (!sc.accel.empty()) sc.duration = std::max(sc.duration, sc.accel.back().t);
    if (!sc.gas.empty()) sc.duration = std::max(sc.duration, sc.gas.back().t);
    return sc;
  }

  void set_state_observer(StateObserver obs) { observer_ = std::move(obs); }

  /// Closes an SMS dialogue still in flight at the end of a replay so every
  /// SendSms has an outcome in the report.
  void abandon_pending_sms() {
    using P = ModemSession::Phase;
    if (!session_ || session_->phase == P::Done || session_->phase == P::Failed) return;
    session_->phase = P::Failed;
    finish_sms("scenario ended before the modem dialogue finished");
  }

  /// Virtual time of poll number k (0-based) on the grid.
  Millis grid_point(std::size_t k) const {
    return Millis(static_cast<std::int64_t>(k) * config_.sample_period_ms);
  }

  /// Runs every grid poll and internal timer up to and including t.
  void advance_to(Millis t) {
    while (grid_point(polls_) <= t) {
      const Millis g = grid_point(polls_);
      run_until(g);
      deliver(SensorPoll{});
    }
    run_until(t);
  }

  /// Enqueues an input at the current instant and processes it immediately,
  /// together with anything it schedules for the same instant.
  Millis deliver(EnginePayload payload) {
    const Millis t = now();
    kernel_.schedule(std::move(payload), t);
    run_until(t);
    return t;
  }

 private:
  void run_until(Millis t) {
    kernel_.advance_until(t, [this](const TimedEvent<EnginePayload>& ev) { dispatch(ev); });
  }

  void dispatch(const TimedEvent<EnginePayload>& ev) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, SensorPoll>) on_poll();
          else if constexpr (std::is_same_v<T, ButtonPress>) on_button();
          else if constexpr (std::is_same_v<T, NmeaLine>) on_nmea(p.sentence);
          else if constexpr (std::is_same_v<T, UiInjection>) on_injection(p);
          else if constexpr (std::is_same_v<T, TimerExpiry>) on_timer(p);
        },
        ev.payload);
  }

  void on_poll() {
    const Millis t = now();
    ++polls_;
    const SensorFrame frame = sample_at(stimuli_, t);
    const bool calibrating = state_.phase == Phase::Calibrating;
    records_.push_back(PollRecord{frame, calibrating});

    if (calibrating) {
      calib_buffer_.push_back({t, frame.accel});
      if (calib_buffer_.size() == config_.calib_samples) {
        reference_ = calibrate(calib_buffer_, config_.calib_samples);
        records_.push_back(CalibrationRecord{*reference_});
        apply(CalibrationDone{});
      }
      return;
    }

    auto result = detect(frame, std::move(detectors_), reference_, config_.detector_params());
    detectors_ = std::move(result.states);
    for (const auto& trig : result.triggers) {
      records_.push_back(TriggerRecord{trig});
      apply(trig);
    }
  }

  void on_button() {
    const Millis t = now();
    if (record_inputs_) stimuli_.events.push_back({t, ScenarioEvent::Kind::Button, {}});
    records_.push_back(ButtonRecord{t});
    apply(ButtonPress{});
  }

  void on_nmea(const std::string& sentence) {
    const Millis t = now();
    if (record_inputs_) stimuli_.events.push_back({t, ScenarioEvent::Kind::Nmea, sentence});
    NmeaRecord rec{t, sentence, Ignored{}};
    try {
      std::visit([&](auto&& r) { rec.outcome = r; }, parse_nmea(sentence, t));
      if (const auto* fix = std::get_if<GeoFix>(&rec.outcome)) {
        last_fix_ = *fix;
        if (fix->valid) last_valid_fix_ = *fix;
      }
    } catch (const NmeaError& e) {
      rec.outcome = std::string(e.what());
    }
    records_.push_back(std::move(rec));
  }

  void on_injection(const UiInjection& inj) {
    const Millis t = now();
    // If this instant's poll already ran, the value is first seen by the next
    // poll; record it one tick later so a replay samples it at the same poll.
    const bool polled_now = polls_ > 0 && grid_point(polls_ - 1) == t;
    const Millis at = polled_now ? t + Millis(1) : t;
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, bool>) {
            hold(stimuli_.ir, at, v);
            records_.push_back(InjectRecord{t, "ir", v ? 1 : 0});
          } else if constexpr (std::is_same_v<T, Accel>) {
            hold(stimuli_.accel, at, v);
            records_.push_back(InjectRecord{t, "accel", {v.x, v.y, v.z}});
          } else {
            hold(stimuli_.gas, at, v);
            records_.push_back(InjectRecord{t, "gas", v});
          }
        },
        inj.value);
  }

  void on_timer(const TimerExpiry& timer) {
    if (timer.kind == TimerKind::Escape) {
      escape_timer_.reset();
      apply(timer);
    } else {
      modem_io();
    }
  }

  void apply(const FsmInput& input) {
    const Millis t = now();
    const SystemState before = state_;
    Transition tr = fsm_step(state_, input, t, config_.escalation_params());
    state_ = std::move(tr.state);

    if (before.phase != state_.phase) {
      records_.push_back(TransitionRecord{t, before.phase, state_.phase, state_.cause});
    }
    if (state_.phase == Phase::FatigueAlert && before.phase != Phase::FatigueAlert) {
      escape_timer_ = kernel_.schedule(TimerExpiry{TimerKind::Escape}, *state_.alert_deadline);
    }
    if (before.phase == Phase::FatigueAlert && state_.phase != Phase::FatigueAlert &&
        escape_timer_) {
      kernel_.cancel(*escape_timer_);
      escape_timer_.reset();
    }
    for (auto& cmd : tr.commands) {
      records_.push_back(CommandRecord{t, cmd});
      actuate(cmd);
    }
    if (observer_) observer_(state_, t);
  }

  void actuate(const Command& cmd) {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, SpeakerOn>) speaker_ = true;
          else if constexpr (std::is_same_v<T, SpeakerOff>) speaker_ = false;
          else if constexpr (std::is_same_v<T, RelayOn>) relay_ = true;
          else if constexpr (std::is_same_v<T, DisplayShow>) display_ = c.text;
          else if constexpr (std::is_same_v<T, LcdStatus>) lcd_ = {c.line1, c.line2};
          else if constexpr (std::is_same_v<T, SendSms>) start_sms(c);
        },
        cmd);
  }

  // --- SMS pipeline -------------------------------------------------------

  static constexpr int kMaxExchanges = 40;

  void start_sms(const SendSms& cmd) {
    const std::string body = compose_sms(cmd.cause, last_valid_fix_, cmd.at);
    session_ = open_session(config_.recipient, body, config_.sms_retries);
    modem_ = make_sim_modem(config_.modem_fault_script.value_or(ModemFaults{}));
    exchanges_ = 0;
    session_step(SessionStart{});
    schedule_modem_io();
  }

  void schedule_modem_io() {
    if (to_modem_.empty() && to_device_.empty()) return;
    kernel_.schedule(TimerExpiry{TimerKind::ModemIo}, now() + Millis(config_.modem_latency_ms));
  }

  void session_step(const SessionStimulus& stimulus) {
    using P = ModemSession::Phase;
    ++exchanges_;
    try {
      auto step = modem_session_step(std::move(*session_), stimulus);
      session_ = std::move(step.session);
      if (!step.outbound.empty()) to_modem_.push_back(std::move(step.outbound));
    } catch (const ProtocolViolation& e) {
      session_->phase = P::Failed;
      finish_sms(e.what());
      return;
    }
    if (session_->phase == P::Done || session_->phase == P::Failed) {
      finish_sms({});
    } else if (exchanges_ >= kMaxExchanges) {
      session_->phase = P::Failed;
      finish_sms("exchange limit reached");
    }
  }

  void finish_sms(std::string detail) {
    to_modem_.clear();
    to_device_.clear();
    records_.push_back(SmsRecord{now(), session_->phase, session_->recipient, session_->body,
                                 session_->message_ref, std::move(detail)});
  }

  void modem_io() {
    using P = ModemSession::Phase;
    if (!session_ || session_->phase == P::Done || session_->phase == P::Failed) return;
    if (!to_modem_.empty()) {
      std::string bytes = std::move(to_modem_.front());
      to_modem_.pop_front();
      records_.push_back(ModemRecord{now(), Direction::ToModem, bytes});
      auto reply = sim_modem_step(std::move(modem_), bytes);
      modem_ = std::move(reply.modem);
      for (auto& line : reply.responses) to_device_.push_back(std::move(line));
    } else if (!to_device_.empty()) {
      std::string line = std::move(to_device_.front());
      to_device_.pop_front();
      records_.push_back(ModemRecord{now(), Direction::FromModem, line});
      session_step(ModemLine{std::move(line)});
    }
    schedule_modem_io();
  }

  Config config_;
  Scenario stimuli_;
  bool record_inputs_;
  EventKernel<EnginePayload> kernel_;
  std::vector<Record> records_;
  StateObserver observer_;

  std::size_t polls_ = 0;
  std::vector<TimedAccel> calib_buffer_;
  std::optional<CalibrationReference> reference_;
  DetectorStates detectors_;
  SystemState state_;
  std::optional<EventHandle> escape_timer_;

  std::optional<GeoFix> last_fix_;
  std::optional<GeoFix> last_valid_fix_;

  bool speaker_ = false;
  bool relay_ = false;
  std::string display_ = "    ";
  LcdLines lcd_;

  std::optional<ModemSession> session_;
  SimModem modem_;
  std::deque<std::string> to_modem_;
  std::deque<std::string> to_device_;
  int exchanges_ = 0;
};

inline Report make_report(const Engine& e, std::string scenario_name) {
  return Report{e.config(), std::move(scenario_name), e.now(), e.records(), e.state(),
                e.reference()};
}

/**
 * Replays a scenario from reset to its duration. `pace`, when given, is
 * called with each virtual instant before the engine reaches it (the CLI
 * uses it to sleep in realtime mode).
 */
inline Report run_scenario(const Config& config, const Scenario& scenario,
                           const std::function<void(Millis)>& pace = {},
                           const Engine::StateObserver& observer = {}) {
  validate(config);
  Engine engine(config, scenario);
  if (observer) engine.set_state_observer(observer);

  auto step_to = [&](Millis t) {
    if (pace) {
      for (Millis g = engine.grid_point(engine.polls()); g <= t;
           g = engine.grid_point(engine.polls())) {
        pace(g);
        engine.advance_to(g);
      }
      pace(t);
    }
    engine.advance_to(t);
  };

  for (const auto& ev : scenario.events) {
    step_to(ev.t);
    if (ev.kind == ScenarioEvent::Kind::Button) {
      engine.deliver(ButtonPress{});
    } else {
      engine.deliver(NmeaLine{ev.nmea});
    }
  }
  step_to(scenario.duration);
  engine.abandon_pending_sms();
  return make_report(engine, scenario.name);
}

}  // namespace rapu
