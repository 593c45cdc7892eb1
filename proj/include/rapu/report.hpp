/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rapu/calibration.hpp"
#include "rapu/config.hpp"
#include "rapu/detectors.hpp"
#include "rapu/escalation.hpp"
#include "rapu/modem.hpp"
#include "rapu/nmea.hpp"
#include "rapu/sensors.hpp"

namespace rapu {

struct PollRecord {
  SensorFrame frame;
  bool calibrating = false;
};
struct CalibrationRecord {
  CalibrationReference reference;
};
struct TriggerRecord {
  Trigger trigger;
};
struct TransitionRecord {
  Millis t{0};
  Phase from = Phase::Calibrating;
  Phase to = Phase::Calibrating;
  std::optional<TriggerCause> cause;
};
struct CommandRecord {
  Millis t{0};
  Command command;
};
struct ButtonRecord {
  Millis t{0};
};
struct NmeaRecord {
  Millis t{0};
  std::string sentence;
  std::variant<GeoFix, Ignored, std::string> outcome;  // string = parse error
};
struct InjectRecord {
  Millis t{0};
  std::string channel;  // "ir", "accel", "gas"
  nlohmann::ordered_json value;
};
struct ModemRecord {
  Millis t{0};
  Direction dir = Direction::ToModem;
  std::string bytes;
};
struct SmsRecord {
  Millis t{0};
  ModemSession::Phase status = ModemSession::Phase::Failed;
  std::string recipient;
  std::string body;
  std::optional<int> message_ref;
  std::string detail;
};

using Record = std::variant<PollRecord, CalibrationRecord, TriggerRecord, TransitionRecord,
                            CommandRecord, ButtonRecord, NmeaRecord, InjectRecord, ModemRecord,
                            SmsRecord>;

inline Millis record_time(const Record& r) {
  return std::visit(
      [](const auto& rec) -> Millis {
        using T = std::decay_t<decltype(rec)>;
        if constexpr (std::is_same_v<T, PollRecord>) return rec.frame.t;
        else if constexpr (std::is_same_v<T, CalibrationRecord>) return rec.reference.completed_at;
        else if constexpr (std::is_same_v<T, TriggerRecord>) return rec.trigger.at;
        else return rec.t;
      },
      r);
}

struct Report {
  Config config;
  std::string scenario_name;
  Millis end{0};
  std::vector<Record> records;  // ordered by t, then emission order
  SystemState final_state;
  std::optional<CalibrationReference> reference;
};

template <class T>
std::size_t count_records(const Report& r) {
  std::size_t n = 0;
  for (const auto& rec : r.records) n += std::holds_alternative<T>(rec) ? 1 : 0;
  return n;
}

inline std::size_t count_sms_commands(const Report& r) {
  std::size_t n = 0;
  for (const auto& rec : r.records) {
    if (const auto* c = std::get_if<CommandRecord>(&rec)) {
      n += std::holds_alternative<SendSms>(c->command) ? 1 : 0;
    }
  }
  return n;
}

// ---------------------------------------------------------------------------
// JSON encoding

inline nlohmann::ordered_json cause_json(const std::optional<TriggerCause>& c) {
  if (!c) return nullptr;
  return std::string(to_string(*c));
}

inline nlohmann::ordered_json to_json(const SystemState& s) {
  nlohmann::ordered_json j;
  j["phase"] = std::string(to_string(s.phase));
  j["cause"] = cause_json(s.cause);
  j["alert_deadline_ms"] =
      s.alert_deadline ? nlohmann::ordered_json(s.alert_deadline->count()) : nullptr;
  j["latched"] = s.latched;
  j["sms_sent"] = s.sms_sent;
  return j;
}

inline nlohmann::ordered_json to_json(const GeoFix& f) {
  return {{"lat", f.lat},
          {"lon", f.lon},
          {"valid", f.valid},
          {"source_time", f.source_time},
          {"received_at_ms", f.received_at.count()}};
}

inline nlohmann::ordered_json command_payload(const Command& c) {
  return std::visit(
      [](const auto& cmd) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(cmd)>;
        if constexpr (std::is_same_v<T, RelayOn>) {
          return {{"target", "DISPLAY_BOARD"}};
        } else if constexpr (std::is_same_v<T, LcdStatus>) {
          return {{"line1", cmd.line1}, {"line2", cmd.line2}};
        } else if constexpr (std::is_same_v<T, DisplayShow>) {
          nlohmann::ordered_json segs = nlohmann::ordered_json::array();
          for (auto m : render_display(cmd.text)) segs.push_back(m);
          return {{"text", cmd.text}, {"segments", segs}};
        } else if constexpr (std::is_same_v<T, SendSms>) {
          return {{"cause", std::string(to_string(cmd.cause))}, {"at_ms", cmd.at.count()}};
        } else {
          return nlohmann::ordered_json::object();
        }
      },
      c);
}

inline nlohmann::ordered_json to_json(const Record& r) {
  using nlohmann::ordered_json;
  return std::visit(
      [](const auto& rec) -> ordered_json {
        using T = std::decay_t<decltype(rec)>;
        ordered_json j;
        if constexpr (std::is_same_v<T, PollRecord>) {
          j["record"] = "poll";
          j["t_ms"] = rec.frame.t.count();
          j["stage"] = rec.calibrating ? "calibration" : "monitoring";
          j["ir"] = rec.frame.ir_closed ? 1 : 0;
          j["accel"] = {rec.frame.accel.x, rec.frame.accel.y, rec.frame.accel.z};
          j["gas"] = rec.frame.gas;
        } else if constexpr (std::is_same_v<T, CalibrationRecord>) {
          j["record"] = "calibration";
          j["t_ms"] = rec.reference.completed_at.count();
          j["reference"] = {rec.reference.x0, rec.reference.y0, rec.reference.z0};
          j["samples"] = rec.reference.sample_count;
        } else if constexpr (std::is_same_v<T, TriggerRecord>) {
          j["record"] = "trigger";
          j["t_ms"] = rec.trigger.at.count();
          j["cause"] = std::string(to_string(rec.trigger.cause));
        } else if constexpr (std::is_same_v<T, TransitionRecord>) {
          j["record"] = "transition";
          j["t_ms"] = rec.t.count();
          j["from"] = std::string(to_string(rec.from));
          j["to"] = std::string(to_string(rec.to));
          j["cause"] = cause_json(rec.cause);
        } else if constexpr (std::is_same_v<T, CommandRecord>) {
          j["record"] = "command";
          j["t_ms"] = rec.t.count();
          j["kind"] = std::string(command_name(rec.command));
          j["payload"] = command_payload(rec.command);
        } else if constexpr (std::is_same_v<T, ButtonRecord>) {
          j["record"] = "button";
          j["t_ms"] = rec.t.count();
        } else if constexpr (std::is_same_v<T, NmeaRecord>) {
          j["record"] = "nmea";
          j["t_ms"] = rec.t.count();
          j["sentence"] = rec.sentence;
          if (const auto* fix = std::get_if<GeoFix>(&rec.outcome)) {
            j["result"] = "fix";
            j["fix"] = to_json(*fix);
          } else if (std::holds_alternative<Ignored>(rec.outcome)) {
            j["result"] = "ignored";
          } else {
            j["result"] = "error";
            j["error"] = std::get<std::string>(rec.outcome);
          }
        } else if constexpr (std::is_same_v<T, InjectRecord>) {
          j["record"] = "inject";
          j["t_ms"] = rec.t.count();
          j["ch"] = rec.channel;
          j["v"] = rec.value;
        } else if constexpr (std::is_same_v<T, ModemRecord>) {
          j["record"] = "modem";
          j["t_ms"] = rec.t.count();
          j["dir"] = rec.dir == Direction::ToModem ? "tx" : "rx";
          j["bytes"] = rec.bytes;
        } else if constexpr (std::is_same_v<T, SmsRecord>) {
          j["record"] = "sms";
          j["t_ms"] = rec.t.count();
          j["status"] = std::string(to_string(rec.status));
          j["recipient"] = rec.recipient;
          j["body"] = rec.body;
          j["message_ref"] = rec.message_ref ? ordered_json(*rec.message_ref) : nullptr;
          if (!rec.detail.empty()) j["detail"] = rec.detail;
        }
        return j;
      },
      r);
}

/// One JSON object per record, then a summary line. Byte-stable for equal reports.
inline void emit_report(const Report& r, std::ostream& out) {
  for (const auto& rec : r.records) out << to_json(rec).dump() << '\n';

  nlohmann::ordered_json s;
  s["transitions"] = count_records<TransitionRecord>(r);
  s["commands"] = count_records<CommandRecord>(r);
  s["triggers"] = count_records<TriggerRecord>(r);
  s["polls"] = count_records<PollRecord>(r);
  s["sms_commands"] = count_sms_commands(r);
  s["scenario"] = r.scenario_name;
  s["end_t_ms"] = r.end.count();
  s["reference"] = r.reference ? nlohmann::ordered_json{r.reference->x0, r.reference->y0,
                                                        r.reference->z0}
                               : nlohmann::ordered_json(nullptr);
  s["final_state"] = to_json(r.final_state);
  s["config"] = to_json(r.config);
  out << nlohmann::ordered_json{{"summary", s}}.dump() << '\n';
}

inline std::string emit_report(const Report& r) {
  std::ostringstream os;
  emit_report(r, os);
  return os.str();
}

}  // namespace rapu
