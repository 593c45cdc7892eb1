/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rapu/engine.hpp"
#include "rapu/errors.hpp"
#include "rapu/report.hpp"

namespace rapu {

// Inbound cockpit frames.
struct InjectIr {
  bool closed = false;
};
struct InjectAccel {
  Accel accel;
};
struct InjectGas {
  double level = 0.0;
};
struct PressButton {};
struct InjectNmea {
  std::string sentence;
};
struct ResetSession {};

using UiInbound = std::variant<InjectIr, InjectAccel, InjectGas, PressButton, InjectNmea, ResetSession>;

/// Malformed inbound frame (bad JSON, unknown type, missing field).
class FrameError : public Error {
 public:
  using Error::Error;
};

/**
 * Decodes one inbound text frame. Structural problems raise FrameError;
 * values outside the channel ranges raise RangeError, mirroring scenario
 * validation.
 */
inline UiInbound parse_ui_message(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw FrameError("malformed JSON");
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw FrameError("frame must be an object with a string \"type\"");
  }
  const auto type = j["type"].get<std::string>();
  auto value = [&]() -> const nlohmann::json& {
    if (!j.contains("v")) throw FrameError(type + " requires \"v\"");
    return j["v"];
  };

  if (type == "inject_ir") {
    const auto& v = value();
    if (v.is_boolean()) return InjectIr{v.get<bool>()};
    if (!v.is_number_integer()) throw FrameError("inject_ir value must be 0 or 1");
    if (v != 0 && v != 1) throw RangeError("ir value must be 0 or 1");
    return InjectIr{v == 1};
  }
  if (type == "inject_accel") {
    // either "v": [ax, ay, az] or separate "ax", "ay", "az" fields
    nlohmann::json v;
    if (!j.contains("v") && j.contains("ax") && j.contains("ay") && j.contains("az")) {
      v = nlohmann::json::array({j["ax"], j["ay"], j["az"]});
    } else {
      v = value();
    }
    if (!v.is_array() || v.size() != 3 ||
        !std::all_of(v.begin(), v.end(), [](const auto& c) { return c.is_number(); })) {
      throw FrameError("inject_accel value must be [ax, ay, az]");
    }
    Accel a{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    if (auto why = accel_problem(a)) throw RangeError(*why);
    return InjectAccel{a};
  }
  if (type == "inject_gas") {
    const auto& v = value();
    if (!v.is_number()) throw FrameError("inject_gas value must be a number");
    const double g = v.get<double>();
    if (auto why = gas_problem(g)) throw RangeError(*why);
    return InjectGas{g};
  }
  if (type == "press_button") return PressButton{};
  if (type == "inject_nmea") {
    const auto& v = value();
    if (!v.is_string()) throw FrameError("inject_nmea value must be a string");
    return InjectNmea{v.get<std::string>()};
  }
  if (type == "reset") return ResetSession{};
  throw FrameError("unknown frame type \"" + type + "\"");
}

inline std::string_view frame_type(const UiInbound& msg) {
  return std::visit(
      [](const auto& m) -> std::string_view {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, InjectIr>) return "inject_ir";
        else if constexpr (std::is_same_v<T, InjectAccel>) return "inject_accel";
        else if constexpr (std::is_same_v<T, InjectGas>) return "inject_gas";
        else if constexpr (std::is_same_v<T, PressButton>) return "press_button";
        else if constexpr (std::is_same_v<T, InjectNmea>) return "inject_nmea";
        else return "reset";
      },
      msg);
}

/**
 * One cockpit client's simulator. Session time is wall time since connect
 * (supplied by the caller); engine time restarts at zero on every reset.
 */
class LiveSession {
 public:
  explicit LiveSession(Config config)
      : config_(std::move(config)), engine_(std::make_unique<Engine>(config_, Scenario{}, true)) {}

  const Engine& engine() const noexcept { return *engine_; }
  Millis engine_time(Millis session_elapsed) const { return session_elapsed - epoch_; }

  /// Brings the engine up to the given session time.
  void advance_to(Millis session_elapsed) {
    if (session_elapsed < elapsed_) session_elapsed = elapsed_;
    elapsed_ = session_elapsed;
    engine_->advance_to(engine_time(elapsed_));
  }

  /// Enqueues the message at the current virtual time; returns the ack frame.
  nlohmann::ordered_json apply_ui_event(const UiInbound& msg) {
    Millis t = engine_->now();
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, InjectIr>) t = engine_->deliver(UiInjection{m.closed});
          else if constexpr (std::is_same_v<T, InjectAccel>) {
            t = engine_->deliver(UiInjection{m.accel});
          } else if constexpr (std::is_same_v<T, InjectGas>) {
            t = engine_->deliver(UiInjection{m.level});
          } else if constexpr (std::is_same_v<T, PressButton>) {
            t = engine_->deliver(ButtonPress{});
          } else if constexpr (std::is_same_v<T, InjectNmea>) {
            t = engine_->deliver(NmeaLine{m.sentence});
          } else {
            reset();
            t = Millis{0};
          }
        },
        msg);
    return {{"type", "ack"}, {"for", std::string(frame_type(msg))}, {"t_ms", t.count()}};
  }

  /// Parses and applies one inbound text frame, returning the reply frame
  /// (ack, or error with the reason). The session stays usable either way.
  nlohmann::ordered_json handle_frame(std::string_view text) {
    try {
      return apply_ui_event(parse_ui_message(text));
    } catch (const RangeError& e) {
      return {{"type", "error"}, {"error", "RangeError"}, {"reason", e.what()}};
    } catch (const FrameError& e) {
      return {{"type", "error"}, {"error", "FrameError"}, {"reason", e.what()}};
    }
  }

  nlohmann::ordered_json snapshot() const {
    using nlohmann::ordered_json;
    const Engine& e = *engine_;
    const auto& s = e.state();
    const Millis now = e.now();
    const auto lcd = render_lcd(s, now);

    ordered_json j;
    j["type"] = "snapshot";
    j["t_ms"] = now.count();
    j["phase"] = std::string(to_string(s.phase));
    j["cause"] = cause_json(s.cause);
    j["countdown_ms"] = s.alert_deadline
                            ? ordered_json(std::max<std::int64_t>(0, (*s.alert_deadline - now).count()))
                            : ordered_json(nullptr);
    j["lcd"] = {lcd.line1, lcd.line2};
    j["display"] = e.display_text();
    j["speaker"] = e.speaker_on();
    j["relay"] = e.relay_on();
    j["last_fix"] = e.last_fix() ? to_json(*e.last_fix()) : ordered_json(nullptr);
    j["window_fill"] = {{"blink", e.detector_states().blink.collected()},
                        {"tilt", e.detector_states().tilt.collected()},
                        {"window_n", e.config().window_n}};
    j["calibration"] = {{"collected", e.calibration_progress()},
                        {"required", e.config().calib_samples}};
    if (const auto& ref = e.reference()) {
      j["reference"] = {ref->x0, ref->y0, ref->z0};
    } else {
      j["reference"] = nullptr;
    }
    if (const auto& sms = e.sms_session()) {
      j["sms"] = {{"status", std::string(to_string(sms->phase))}, {"body", sms->body}};
    } else {
      j["sms"] = nullptr;
    }
    return j;
  }

  /// Event frames for records produced since the previous call. Sensor polls
  /// are left out; snapshots already carry their effect.
  std::vector<nlohmann::ordered_json> drain_events() {
    std::vector<nlohmann::ordered_json> out;
    const auto& recs = engine_->records();
    for (; emitted_ < recs.size(); ++emitted_) {
      if (std::holds_alternative<PollRecord>(recs[emitted_])) continue;
      out.push_back({{"type", "event"}, {"record", to_json(recs[emitted_])}});
    }
    return out;
  }

  /// True once per phase change, so the caller can push an extra snapshot.
  bool take_phase_change() {
    const Phase p = engine_->state().phase;
    const bool changed = p != reported_phase_ || resets_ != reported_resets_;
    reported_phase_ = p;
    reported_resets_ = resets_;
    return changed;
  }

 private:
  void reset() {
    epoch_ = elapsed_;
    engine_ = std::make_unique<Engine>(config_, Scenario{}, true);
    emitted_ = 0;
    ++resets_;
  }

  Config config_;
  std::unique_ptr<Engine> engine_;
  Millis elapsed_{0};
  Millis epoch_{0};
  std::size_t emitted_ = 0;
  Phase reported_phase_ = Phase::Calibrating;
  std::size_t resets_ = 0;
  std::size_t reported_resets_ = 0;
};

}  // namespace rapu
