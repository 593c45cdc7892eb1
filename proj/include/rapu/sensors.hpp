/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rapu/errors.hpp"
#include "rapu/kernel.hpp"

namespace rapu {

inline constexpr double kAccelLimitG = 2.0;

/// Accelerometer reading in g.
struct Accel {
  double x = 0.0;
  double y = 0.0;
  double z = 1.0;

  friend bool operator==(const Accel&, const Accel&) = default;
};

/// One polled snapshot of every sensor channel.
struct SensorFrame {
  Millis t{0};
  bool ir_closed = false;
  Accel accel{};
  double gas = 0.0;

  friend bool operator==(const SensorFrame&, const SensorFrame&) = default;
};

template <class T>
struct TrackPoint {
  Millis t{0};
  T value{};

  friend bool operator==(const TrackPoint&, const TrackPoint&) = default;
};

struct ScenarioEvent {
  enum class Kind { Button, Nmea };

  Millis t{0};
  Kind kind = Kind::Button;
  std::string nmea;  // Kind::Nmea only

  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

/// Recorded stimuli: piecewise-constant channel tracks plus discrete events.
struct Scenario {
  std::string name;
  Millis duration{0};
  std::vector<TrackPoint<bool>> ir;
  std::vector<TrackPoint<Accel>> accel;
  std::vector<TrackPoint<double>> gas;
  std::vector<ScenarioEvent> events;  // non-decreasing t, file order within an instant

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Range checks shared by scenario ingestion and live injection. They return
// the failure reason, or nothing when the value is acceptable.

inline std::optional<std::string> gas_problem(double v) {
  if (!std::isfinite(v) || v < 0.0 || v > 1.0) return "gas out of range";
  return std::nullopt;
}

inline std::optional<std::string> accel_problem(const Accel& a) {
  for (double c : {a.x, a.y, a.z}) {
    if (!std::isfinite(c) || std::fabs(c) > kAccelLimitG) return "accel out of range";
  }
  return std::nullopt;
}

/// Sets a zero-order-hold point at t. A point already at t is overwritten.
template <class T>
void hold(std::vector<TrackPoint<T>>& track, Millis t, T value) {
  if (!track.empty() && track.back().t == t) {
    track.back().value = std::move(value);
    return;
  }
  if (!track.empty() && t < track.back().t) throw TimeReversal();
  track.push_back({t, std::move(value)});
}

namespace detail {

template <class T>
T held_value(const std::vector<TrackPoint<T>>& track, Millis t, T fallback) {
  auto it = std::upper_bound(track.begin(), track.end(), t,
                             [](Millis lhs, const TrackPoint<T>& p) { return lhs < p.t; });
  if (it == track.begin()) return fallback;
  return std::prev(it)->value;
}

inline Millis read_time(const nlohmann::json& obj, std::size_t line_no) {
  const auto& t = obj.at("t_ms");
  if (!t.is_number_integer()) throw ParseError(line_no, "t_ms must be an integer");
  if (t.is_number_unsigned()) return Millis(t.get<std::uint64_t>());
  auto v = t.get<std::int64_t>();
  if (v < 0) throw ParseError(line_no, "t_ms must be non-negative");
  return Millis(v);
}

inline void require_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         std::size_t line_no) {
  for (const auto& [key, _] : obj.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* k) { return key == k; });
    if (!known) throw ParseError(line_no, "unknown key \"" + key + "\"");
  }
  for (const char* k : allowed) {
    if (!obj.contains(k)) throw ParseError(line_no, std::string("missing key \"") + k + "\"");
  }
}

template <class T>
void append_strict(std::vector<TrackPoint<T>>& track, Millis t, T value, std::size_t line_no) {
  if (!track.empty() && t <= track.back().t) {
    throw ParseError(line_no, "non-increasing timestamp");
  }
  track.push_back({t, std::move(value)});
}

inline Accel read_accel(const nlohmann::json& v, std::size_t line_no) {
  if (!v.is_array() || v.size() != 3 ||
      !std::all_of(v.begin(), v.end(), [](const auto& c) { return c.is_number(); })) {
    throw ParseError(line_no, "accel value must be [ax, ay, az]");
  }
  Accel a{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  if (auto why = accel_problem(a)) throw ParseError(line_no, *why);
  return a;
}

}  // namespace detail

/**
 * Reads a JSON Lines scenario. Each channel track must have strictly
 * increasing timestamps; discrete events must be non-decreasing. Blank lines
 * are skipped. Without a meta line the duration is the latest timestamp seen.
 */
inline Scenario ingest_scenario(std::istream& in) {
  using nlohmann::json;
  Scenario sc;
  std::optional<Millis> declared_duration;
  Millis latest{0};
  bool seen_content = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "line is not a JSON object");

    try {
      if (obj.contains("meta")) {
        if (seen_content) throw ParseError(line_no, "meta must be the first line");
        detail::require_keys(obj, {"meta"}, line_no);
        const auto& meta = obj["meta"];
        if (!meta.is_object()) throw ParseError(line_no, "meta must be an object");
        for (const auto& [key, _] : meta.items()) {
          if (key != "name" && key != "duration_ms") {
            throw ParseError(line_no, "unknown key \"" + key + "\"");
          }
        }
        if (meta.contains("name")) {
          if (!meta["name"].is_string()) throw ParseError(line_no, "name must be a string");
          sc.name = meta["name"].get<std::string>();
        }
        if (meta.contains("duration_ms")) {
          const auto& d = meta["duration_ms"];
          if (!d.is_number_integer() ||
              (!d.is_number_unsigned() && d.get<std::int64_t>() < 0)) {
            throw ParseError(line_no, "duration_ms must be a non-negative integer");
          }
          declared_duration = Millis(d.get<std::int64_t>());
        }
        seen_content = true;
        continue;
      }
      seen_content = true;

      if (obj.contains("ch")) {
        detail::require_keys(obj, {"t_ms", "ch", "v"}, line_no);
        const Millis t = detail::read_time(obj, line_no);
        const auto& ch = obj["ch"];
        const auto& v = obj["v"];
        if (ch == "ir") {
          if (!v.is_number_integer() || (v != 0 && v != 1)) {
            throw ParseError(line_no, "ir value must be 0 or 1");
          }
          detail::append_strict(sc.ir, t, v == 1, line_no);
        } else if (ch == "accel") {
          detail::append_strict(sc.accel, t, detail::read_accel(v, line_no), line_no);
        } else if (ch == "gas") {
          if (!v.is_number()) throw ParseError(line_no, "gas value must be a number");
          const double g = v.get<double>();
          if (auto why = gas_problem(g)) throw ParseError(line_no, *why);
          detail::append_strict(sc.gas, t, g, line_no);
        } else {
          throw ParseError(line_no, "unknown channel");
        }
        latest = std::max(latest, t);
      } else if (obj.contains("ev")) {
        const auto& ev = obj["ev"];
        ScenarioEvent event;
        if (ev == "button") {
          detail::require_keys(obj, {"t_ms", "ev"}, line_no);
          event.kind = ScenarioEvent::Kind::Button;
        } else if (ev == "nmea") {
          detail::require_keys(obj, {"t_ms", "ev", "v"}, line_no);
          if (!obj["v"].is_string()) throw ParseError(line_no, "nmea value must be a string");
          event.kind = ScenarioEvent::Kind::Nmea;
          event.nmea = obj["v"].get<std::string>();
        } else {
          throw ParseError(line_no, "unknown event kind");
        }
        event.t = detail::read_time(obj, line_no);
        if (!sc.events.empty() && event.t < sc.events.back().t) {
          throw ParseError(line_no, "non-increasing timestamp");
        }
        latest = std::max(latest, event.t);
        sc.events.push_back(std::move(event));
      } else {
        throw ParseError(line_no, "line has neither \"ch\", \"ev\" nor \"meta\"");
      }
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }

  if (declared_duration) {
    if (latest > *declared_duration) throw ParseError(0, "timestamp beyond duration_ms");
    sc.duration = *declared_duration;
  } else {
    sc.duration = latest;
  }
  return sc;
}

/// Zero-order hold of every channel at t; channels without a point yet read
/// as an upright, alert, sober driver.
inline SensorFrame sample_at(const Scenario& sc, Millis t) {
  SensorFrame f;
  f.t = t;
  f.ir_closed = detail::held_value(sc.ir, t, false);
  f.accel = detail::held_value(sc.accel, t, Accel{});
  f.gas = detail::held_value(sc.gas, t, 0.0);
  return f;
}

/// Serializes a scenario in the same JSON Lines form ingest_scenario reads.
inline void write_scenario(const Scenario& sc, std::ostream& out) {
  using nlohmann::ordered_json;
  ordered_json meta;
  meta["meta"] = {{"name", sc.name}, {"duration_ms", sc.duration.count()}};
  out << meta.dump() << '\n';
  for (const auto& p : sc.ir) {
    out << ordered_json{{"t_ms", p.t.count()}, {"ch", "ir"}, {"v", p.value ? 1 : 0}}.dump()
        << '\n';
  }
  for (const auto& p : sc.accel) {
    out << ordered_json{{"t_ms", p.t.count()},
                        {"ch", "accel"},
                        {"v", {p.value.x, p.value.y, p.value.z}}}
               .dump()
        << '\n';
  }
  for (const auto& p : sc.gas) {
    out << ordered_json{{"t_ms", p.t.count()}, {"ch", "gas"}, {"v", p.value}}.dump() << '\n';
  }
  for (const auto& e : sc.events) {
    ordered_json j{{"t_ms", e.t.count()}};
    if (e.kind == ScenarioEvent::Kind::Button) {
      j["ev"] = "button";
    } else {
      j["ev"] = "nmea";
      j["v"] = e.nmea;
    }
    out << j.dump() << '\n';
  }
}

}  // namespace rapu
