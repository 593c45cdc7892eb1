/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <optional>
#include <string_view>
#include <vector>

#include "rapu/calibration.hpp"
#include "rapu/errors.hpp"
#include "rapu/kernel.hpp"
#include "rapu/sensors.hpp"

namespace rapu {

enum class TriggerCause { Alcohol, EyesClosed, HeadTilt };

constexpr std::string_view to_string(TriggerCause c) {
  switch (c) {
    case TriggerCause::Alcohol: return "ALCOHOL";
    case TriggerCause::EyesClosed: return "EYES_CLOSED";
    case TriggerCause::HeadTilt: return "HEAD_TILT";
  }
  return "?";
}

struct Trigger {
  TriggerCause cause = TriggerCause::Alcohol;
  Millis at{0};

  friend bool operator==(const Trigger&, const Trigger&) = default;
};

struct DetectorParams {
  std::size_t window_n = 15;
  std::size_t closed_k = 12;
  double tilt_threshold_g = 0.35;
  double alcohol_threshold = 0.60;
};

/**
 * Re-read debounce state. A first positive sample opens a window; the window
 * then collects until it holds window_n samples and votes: closed_k or more
 * positives fire a trigger. Completion always returns to Idle.
 *
 * The tag keeps blink and tilt states from being mixed up at call sites.
 */
template <class Tag>
struct ReReadState {
  enum class Mode { Idle, ReReading };

  Mode mode = Mode::Idle;
  std::vector<bool> window;  // empty while Idle

  std::size_t collected() const noexcept { return window.size(); }
  std::size_t positives() const noexcept {
    return static_cast<std::size_t>(std::count(window.begin(), window.end(), true));
  }

  friend bool operator==(const ReReadState&, const ReReadState&) = default;
};

using BlinkDetectorState = ReReadState<struct BlinkTag>;
using TiltDetectorState = ReReadState<struct TiltTag>;

template <class State>
struct StepResult {
  State state;
  std::optional<Trigger> trigger;
};

namespace detail {

template <class Tag>
StepResult<ReReadState<Tag>> reread_step(ReReadState<Tag> s, bool positive, Millis t,
                                         TriggerCause cause, const DetectorParams& p) {
  using State = ReReadState<Tag>;
  if (s.mode == State::Mode::Idle) {
    if (!positive) return {std::move(s), std::nullopt};
    s.mode = State::Mode::ReReading;
  }
  s.window.push_back(positive);
  if (s.collected() < p.window_n) return {std::move(s), std::nullopt};

  std::optional<Trigger> fired;
  if (s.positives() >= p.closed_k) fired = Trigger{cause, t};
  return {State{}, fired};
}

}  // namespace detail

/// Memoryless: a single sample at or above the threshold suffices.
inline std::optional<Trigger> alcohol_step(double gas, Millis t, const DetectorParams& p = {}) {
  if (gas >= p.alcohol_threshold) return Trigger{TriggerCause::Alcohol, t};
  return std::nullopt;
}

inline StepResult<BlinkDetectorState> blink_step(BlinkDetectorState s, bool ir_closed, Millis t,
                                                 const DetectorParams& p = {}) {
  return detail::reread_step(std::move(s), ir_closed, t, TriggerCause::EyesClosed, p);
}

inline StepResult<TiltDetectorState> tilt_step(TiltDetectorState s, const Accel& accel,
                                               const std::optional<CalibrationReference>& ref,
                                               Millis t, const DetectorParams& p = {}) {
  if (!ref) throw NotCalibrated();
  const bool deviated = deviation(accel, *ref) >= p.tilt_threshold_g;
  return detail::reread_step(std::move(s), deviated, t, TriggerCause::HeadTilt, p);
}

struct DetectorStates {
  BlinkDetectorState blink;
  TiltDetectorState tilt;

  friend bool operator==(const DetectorStates&, const DetectorStates&) = default;
};

struct DetectResult {
  DetectorStates states;
  std::vector<Trigger> triggers;  // ALCOHOL, EYES_CLOSED, HEAD_TILT order
};

/// Runs all detectors on one frame, alcohol first.
inline DetectResult detect(const SensorFrame& frame, DetectorStates states,
                           const std::optional<CalibrationReference>& ref,
                           const DetectorParams& p = {}) {
  if (!ref) throw NotCalibrated();
  DetectResult out;
  if (auto trig = alcohol_step(frame.gas, frame.t, p)) out.triggers.push_back(*trig);

  auto blink = blink_step(std::move(states.blink), frame.ir_closed, frame.t, p);
  out.states.blink = std::move(blink.state);
  if (blink.trigger) out.triggers.push_back(*blink.trigger);

  auto tilt = tilt_step(std::move(states.tilt), frame.accel, ref, frame.t, p);
  out.states.tilt = std::move(tilt.state);
  if (tilt.trigger) out.triggers.push_back(*tilt.trigger);
  return out;
}

}  // namespace rapu
