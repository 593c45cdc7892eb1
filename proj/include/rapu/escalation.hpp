/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "rapu/detectors.hpp"
#include "rapu/errors.hpp"
#include "rapu/kernel.hpp"

namespace rapu {

enum class Phase { Calibrating, Monitoring, FatigueAlert, Distress };

constexpr std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Calibrating: return "CALIBRATING";
    case Phase::Monitoring: return "MONITORING";
    case Phase::FatigueAlert: return "FATIGUE_ALERT";
    case Phase::Distress: return "DISTRESS";
  }
  return "?";
}

struct SystemState {
  Phase phase = Phase::Calibrating;
  std::optional<TriggerCause> cause;
  std::optional<Millis> alert_deadline;  // only while FatigueAlert
  bool latched = false;                  // only while Distress
  bool sms_sent = false;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

inline bool invariants_hold(const SystemState& s) {
  if (s.alert_deadline.has_value() != (s.phase == Phase::FatigueAlert)) return false;
  if (s.latched != (s.phase == Phase::Distress)) return false;
  if (s.sms_sent && s.phase != Phase::Distress) return false;
  if (s.phase == Phase::FatigueAlert && s.cause == TriggerCause::Alcohol) return false;
  return true;
}

// Actuator commands.

struct SpeakerOn {
  friend bool operator==(const SpeakerOn&, const SpeakerOn&) = default;
};
struct SpeakerOff {
  friend bool operator==(const SpeakerOff&, const SpeakerOff&) = default;
};
enum class RelayTarget { DisplayBoard };
struct RelayOn {
  RelayTarget target = RelayTarget::DisplayBoard;
  friend bool operator==(const RelayOn&, const RelayOn&) = default;
};
struct LcdStatus {
  std::string line1;  // 16 chars, space padded
  std::string line2;
  friend bool operator==(const LcdStatus&, const LcdStatus&) = default;
};
struct DisplayShow {
  std::string text;  // 4 glyphs
  friend bool operator==(const DisplayShow&, const DisplayShow&) = default;
};
struct SendSms {
  TriggerCause cause = TriggerCause::Alcohol;
  Millis at{0};
  friend bool operator==(const SendSms&, const SendSms&) = default;
};

using Command = std::variant<SpeakerOn, SpeakerOff, RelayOn, LcdStatus, DisplayShow, SendSms>;

inline std::string_view command_name(const Command& c) {
  return std::visit(
      [](const auto& cmd) -> std::string_view {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, SpeakerOn>) return "SpeakerOn";
        if constexpr (std::is_same_v<T, SpeakerOff>) return "SpeakerOff";
        if constexpr (std::is_same_v<T, RelayOn>) return "RelayOn";
        if constexpr (std::is_same_v<T, LcdStatus>) return "LcdStatus";
        if constexpr (std::is_same_v<T, DisplayShow>) return "DisplayShow";
        if constexpr (std::is_same_v<T, SendSms>) return "SendSms";
      },
      c);
}

// FSM inputs.

struct ButtonPress {};
struct CalibrationDone {};
enum class TimerKind { Escape, ModemIo };
struct TimerExpiry {
  TimerKind kind = TimerKind::Escape;
};

using FsmInput = std::variant<Trigger, ButtonPress, TimerExpiry, CalibrationDone>;

struct EscalationParams {
  Millis escape_window{10'000};
  std::string distress_text = "HELP";
};

struct Transition {
  SystemState state;
  std::vector<Command> commands;
};

// ---------------------------------------------------------------------------
// LCD and display board

inline std::string pad16(std::string s) {
  s.resize(16, ' ');
  return s;
}

struct LcdLines {
  std::string line1;
  std::string line2;

  friend bool operator==(const LcdLines&, const LcdLines&) = default;
};

/// Two 16-character HD44780 lines for the state as seen at `now`.
inline LcdLines render_lcd(const SystemState& s, Millis now) {
  switch (s.phase) {
    case Phase::Calibrating: return {pad16("CALIBRATING"), pad16("HOLD STILL")};
    case Phase::Monitoring: return {pad16("MONITORING"), pad16("ALL NOMINAL")};
    case Phase::FatigueAlert: {
      const Millis deadline = s.alert_deadline.value_or(now);
      const auto remaining = std::max<std::int64_t>(0, (deadline - now).count());
      return {pad16("FATIGUE ALERT"),
              pad16("PRESS BTN " + std::to_string(remaining / 1000) + "s")};
    }
    case Phase::Distress: return {pad16("DISTRESS"), pad16("SMS SENT")};
  }
  return {pad16(""), pad16("")};
}

/// Segment mask for one glyph, bit 0 = segment a through bit 6 = segment g.
inline std::uint8_t glyph_segments(char c) {
  switch (c) {
    case ' ': return 0x00;
    case '0': return 0x3F;
    case '1': return 0x06;
    case '2': return 0x5B;
    case '3': return 0x4F;
    case '4': return 0x66;
    case '5': return 0x6D;
    case '6': return 0x7D;
    case '7': return 0x07;
    case '8': return 0x7F;
    case '9': return 0x6F;
    case 'E': return 0x79;
    case 'H': return 0x76;
    case 'L': return 0x38;
    case 'P': return 0x73;
    default: throw UnrenderableGlyph(c);
  }
}

inline std::array<std::uint8_t, 4> render_display(std::string_view text) {
  if (text.size() != 4) throw OutOfRange("display board shows exactly 4 glyphs");
  std::array<std::uint8_t, 4> masks{};
  for (std::size_t i = 0; i < 4; ++i) masks[i] = glyph_segments(text[i]);
  return masks;
}

// ---------------------------------------------------------------------------
// Alarm FSM

namespace detail {

inline Transition enter_distress(SystemState s, TriggerCause cause, Millis t,
                                 const EscalationParams& p, bool speaker_already_on) {
  s.phase = Phase::Distress;
  s.cause = cause;
  s.alert_deadline.reset();
  s.latched = true;
  s.sms_sent = true;
  Transition out{s, {}};
  if (!speaker_already_on) out.commands.emplace_back(SpeakerOn{});
  out.commands.emplace_back(RelayOn{RelayTarget::DisplayBoard});
  out.commands.emplace_back(DisplayShow{p.distress_text});
  out.commands.emplace_back(SendSms{cause, t});
  auto lcd = render_lcd(s, t);
  out.commands.emplace_back(LcdStatus{lcd.line1, lcd.line2});
  return out;
}

inline Command lcd_command(const SystemState& s, Millis t) {
  auto lcd = render_lcd(s, t);
  return LcdStatus{std::move(lcd.line1), std::move(lcd.line2)};
}

}  // namespace detail

/**
 * Alarm state machine. Total over all inputs; inputs that do not apply to the
 * current phase leave the state unchanged and emit nothing. Distress is
 * latched until the whole system is reset.
 */
inline Transition fsm_step(const SystemState& s, const FsmInput& input, Millis t,
                           const EscalationParams& p = {}) {
  Transition unchanged{s, {}};
  switch (s.phase) {
    case Phase::Calibrating:
      if (std::holds_alternative<CalibrationDone>(input)) {
        SystemState next;
        next.phase = Phase::Monitoring;
        return {next, {detail::lcd_command(next, t)}};
      }
      return unchanged;

    case Phase::Monitoring:
      if (const auto* trig = std::get_if<Trigger>(&input)) {
        if (trig->cause == TriggerCause::Alcohol) {
          return detail::enter_distress(s, TriggerCause::Alcohol, t, p, false);
        }
        SystemState next = s;
        next.phase = Phase::FatigueAlert;
        next.cause = trig->cause;
        next.alert_deadline = t + p.escape_window;
        return {next, {SpeakerOn{}, detail::lcd_command(next, t)}};
      }
      return unchanged;

    case Phase::FatigueAlert:
      if (const auto* trig = std::get_if<Trigger>(&input)) {
        if (trig->cause == TriggerCause::Alcohol) {
          return detail::enter_distress(s, TriggerCause::Alcohol, t, p, true);
        }
        return unchanged;
      }
      if (std::holds_alternative<ButtonPress>(input)) {
        if (t >= *s.alert_deadline) return unchanged;
        SystemState next;
        next.phase = Phase::Monitoring;
        return {next, {SpeakerOff{}, detail::lcd_command(next, t)}};
      }
      if (const auto* timer = std::get_if<TimerExpiry>(&input)) {
        if (timer->kind == TimerKind::Escape && t >= *s.alert_deadline) {
          return detail::enter_distress(s, *s.cause, t, p, true);
        }
      }
      return unchanged;

    case Phase::Distress:
      return unchanged;
  }
  return unchanged;
}

/// The escape button: one press is all it takes.
inline Transition press_escape(const SystemState& s, Millis t, const EscalationParams& p = {}) {
  return fsm_step(s, ButtonPress{}, t, p);
}

}  // namespace rapu
