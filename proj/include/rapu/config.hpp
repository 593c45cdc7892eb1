/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>

#include <json.hpp>

#include "rapu/detectors.hpp"
#include "rapu/errors.hpp"
#include "rapu/escalation.hpp"
#include "rapu/modem.hpp"

namespace rapu {

struct Config {
  std::int64_t sample_period_ms = 160;
  std::size_t calib_samples = 32;
  std::size_t window_n = 15;
  std::size_t closed_k = 12;
  double tilt_threshold_g = 0.35;
  double alcohol_threshold = 0.60;
  std::int64_t escape_window_ms = 10'000;
  std::string recipient = "+910000000000";
  std::string distress_text = "HELP";
  int sms_retries = 2;
  std::int64_t modem_latency_ms = 0;
  std::optional<ModemFaults> modem_fault_script;
  bool realtime = false;
  std::optional<std::int64_t> seed;  // recorded in reports; replay itself is not random

  DetectorParams detector_params() const {
    return {window_n, closed_k, tilt_threshold_g, alcohol_threshold};
  }
  EscalationParams escalation_params() const {
    return {Millis(escape_window_ms), distress_text};
  }
  Millis sample_period() const { return Millis(sample_period_ms); }
};

// Largest deviation two in-range readings can have: opposite corners of the +/-2 g cube.
inline const double kMaxDeviationG = 2.0 * kAccelLimitG * std::sqrt(3.0);

/// Throws ConfigInvalid naming the first violated constraint.
inline void validate(const Config& c) {
  auto fail = [](const std::string& why) { throw ConfigInvalid(why); };
  if (c.sample_period_ms <= 0) fail("sample_period_ms must be positive");
  if (c.escape_window_ms <= 0) fail("escape_window_ms must be positive");
  // The LCD countdown has room for five digits of seconds.
  if (c.escape_window_ms > 99'999'000) fail("escape_window_ms too large for the LCD countdown");
  if (c.calib_samples == 0) fail("calib_samples must be positive");
  if (c.window_n == 0) fail("window_n must be positive");
  if (c.closed_k == 0 || c.closed_k > c.window_n) fail("closed_k must be in 1..window_n");
  if (!(c.tilt_threshold_g > 0.0 && c.tilt_threshold_g <= kMaxDeviationG)) {
    fail("tilt_threshold_g outside (0, 4*sqrt(3)] g");
  }
  if (!(c.alcohol_threshold > 0.0 && c.alcohol_threshold <= 1.0)) {
    fail("alcohol_threshold outside (0, 1]");
  }
  if (!valid_recipient(c.recipient)) fail("recipient is not an E.164 number");
  if (c.sms_retries < 0) fail("sms_retries must be non-negative");
  if (c.modem_latency_ms < 0) fail("modem_latency_ms must be non-negative");
  try {
    render_display(c.distress_text);
  } catch (const Error& e) {
    fail(std::string("distress_text: ") + e.what());
  }
  if (c.modem_fault_script) {
    for (const auto& [key, n] : c.modem_fault_script->error_counts) {
      if (key != "AT" && key != "AT+CMGF" && key != "AT+CMGS" && key != "BODY") {
        fail("modem_fault_script: unknown command \"" + key + "\"");
      }
      if (n < 0) fail("modem_fault_script: negative error count");
    }
  }
}

namespace detail {

inline std::size_t count_value(const nlohmann::json& v, const std::string& key) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigInvalid(key + " must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace detail

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline Config apply_config_json(Config c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "sample_period_ms") c.sample_period_ms = v.get<std::int64_t>();
      else if (key == "calib_samples") c.calib_samples = detail::count_value(v, key);
      else if (key == "window_n") c.window_n = detail::count_value(v, key);
      else if (key == "closed_k") c.closed_k = detail::count_value(v, key);
      else if (key == "tilt_threshold_g") c.tilt_threshold_g = v.get<double>();
      else if (key == "alcohol_threshold") c.alcohol_threshold = v.get<double>();
      else if (key == "escape_window_ms") c.escape_window_ms = v.get<std::int64_t>();
      else if (key == "recipient") c.recipient = v.get<std::string>();
      else if (key == "distress_text") c.distress_text = v.get<std::string>();
      else if (key == "sms_retries") c.sms_retries = v.get<int>();
      else if (key == "modem_latency_ms") c.modem_latency_ms = v.get<std::int64_t>();
      else if (key == "realtime") c.realtime = v.get<bool>();
      else if (key == "seed") c.seed = v.is_null() ? std::nullopt
                                                   : std::optional(v.get<std::int64_t>());
      else if (key == "modem_fault_script") {
        if (v.is_null()) {
          c.modem_fault_script.reset();
          continue;
        }
        ModemFaults f;
        for (const auto& [fk, fv] : v.items()) {
          if (fk == "registered") f.registered = fv.get<bool>();
          else if (fk == "error_counts") f.error_counts = fv.get<std::map<std::string, int>>();
          else throw ConfigInvalid("modem_fault_script: unknown key \"" + fk + "\"");
        }
        c.modem_fault_script = std::move(f);
      } else {
        throw ConfigInvalid("unknown config key \"" + key + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigInvalid(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

inline Config load_config(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigInvalid(std::string("malformed config JSON: ") + e.what());
  }
  Config c = apply_config_json(Config{}, j);
  validate(c);
  return c;
}

inline nlohmann::ordered_json to_json(const Config& c) {
  nlohmann::ordered_json j;
  j["sample_period_ms"] = c.sample_period_ms;
  j["calib_samples"] = c.calib_samples;
  j["window_n"] = c.window_n;
  j["closed_k"] = c.closed_k;
  j["tilt_threshold_g"] = c.tilt_threshold_g;
  j["alcohol_threshold"] = c.alcohol_threshold;
  j["escape_window_ms"] = c.escape_window_ms;
  j["recipient"] = c.recipient;
  j["distress_text"] = c.distress_text;
  j["sms_retries"] = c.sms_retries;
  j["modem_latency_ms"] = c.modem_latency_ms;
  if (c.modem_fault_script) {
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (const auto& [k, n] : c.modem_fault_script->error_counts) counts[k] = n;
    j["modem_fault_script"] = {{"registered", c.modem_fault_script->registered},
                               {"error_counts", counts}};
  } else {
    j["modem_fault_script"] = nullptr;
  }
  j["realtime"] = c.realtime;
  j["seed"] = c.seed ? nlohmann::ordered_json(*c.seed) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace rapu
