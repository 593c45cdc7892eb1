/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

// Builds a scenario in code, replays it and prints the phase changes.

#include <iostream>

#include "rapu/engine.hpp"

int main() {
  using namespace rapu;
  using std::chrono_literals::operator""ms;

  Scenario sc;
  sc.name = "head-drop";
  sc.accel.push_back({8'000ms, {0.6, 0.1, 0.8}});  // chin on chest
  sc.events.push_back({9'000ms, ScenarioEvent::Kind::Nmea,
                       "$GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W*6A"});
  sc.duration = 25'000ms;

  Config cfg;
  cfg.escape_window_ms = 8'000;
  const Report r = run_scenario(cfg, sc);

  for (const auto& rec : r.records) {
    if (const auto* t = std::get_if<TransitionRecord>(&rec)) {
      std::cout << t->t.count() << " ms  " << to_string(t->from) << " -> " << to_string(t->to);
      if (t->cause) std::cout << " (" << to_string(*t->cause) << ")";
      std::cout << '\n';
    } else if (const auto* s = std::get_if<SmsRecord>(&rec)) {
      std::cout << s->t.count() << " ms  sms " << to_string(s->status) << ": " << s->body << '\n';
    }
  }
  return r.final_state.phase == Phase::Distress ? 0 : 1;
}
