/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include "rapu/errors.hpp"

namespace rapu {

/// Virtual time since simulation start, 1 ms resolution.
using Millis = std::chrono::milliseconds;

template <class Payload>
struct TimedEvent {
  Millis at{0};
  std::uint64_t seq = 0;
  Payload payload{};
};

/// Opaque ticket returned by EventKernel::schedule.
struct EventHandle {
  Millis at{0};
  std::uint64_t seq = 0;
};

/**
 * Deterministic discrete-event queue over a virtual millisecond clock.
 *
 * Events fire in (at, seq) order where seq is the insertion counter, so
 * same-instant events are FIFO. An event scheduled from inside a callback
 * for the instant being processed fires within the same advance_until call.
 */
template <class Payload>
class EventKernel {
 public:
  using Event = TimedEvent<Payload>;
  using Callback = std::function<void(const Event&)>;

  Millis now() const noexcept { return now_; }
  std::size_t pending() const noexcept { return queue_.size(); }

  EventHandle schedule(Payload payload, Millis at) {
    if (at < now_) throw PastDeadline();
    const std::uint64_t seq = next_seq_++;
    queue_.emplace(Key{at, seq}, std::move(payload));
    return EventHandle{at, seq};
  }

  bool cancel(EventHandle handle) { return queue_.erase(Key{handle.at, handle.seq}) > 0; }

  /// Fires every event with at <= t, invoking on_fire with now() == event.at.
  /// Returns the fired events in firing order; the clock reads t afterwards.
  std::vector<Event> advance_until(Millis t, const Callback& on_fire = {}) {
    if (t < now_) throw TimeReversal();
    std::vector<Event> fired;
    while (!queue_.empty() && queue_.begin()->first.first <= t) {
      auto node = queue_.extract(queue_.begin());
      Event ev{node.key().first, node.key().second, std::move(node.mapped())};
      now_ = ev.at;
      if (on_fire) on_fire(ev);
      fired.push_back(std::move(ev));
    }
    now_ = t;
    return fired;
  }

 private:
  using Key = std::pair<Millis, std::uint64_t>;

  Millis now_{0};
  std::uint64_t next_seq_ = 0;
  std::map<Key, Payload> queue_;
};

}  // namespace rapu
