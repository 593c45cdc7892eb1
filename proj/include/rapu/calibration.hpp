/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "rapu/errors.hpp"
#include "rapu/kernel.hpp"
#include "rapu/sensors.hpp"

namespace rapu {

inline constexpr std::size_t kDefaultCalibSamples = 32;

/// Resting head pose learned at reset.
struct CalibrationReference {
  double x0 = 0.0;
  double y0 = 0.0;
  double z0 = 1.0;
  std::size_t sample_count = 0;
  Millis completed_at{0};

  Accel pose() const noexcept { return {x0, y0, z0}; }

  friend bool operator==(const CalibrationReference&, const CalibrationReference&) = default;
};

struct TimedAccel {
  Millis t{0};
  Accel accel{};
};

namespace detail {

// Sorting before summing makes the mean independent of sample order;
// the compensated (Neumaier) sum keeps symmetric jitter from leaving residue.
inline double order_free_mean(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(values.size());
}

}  // namespace detail

/// Per-axis mean of exactly `required` samples; completed_at is the last sample's time.
inline CalibrationReference calibrate(std::span<const TimedAccel> samples,
                                      std::size_t required = kDefaultCalibSamples) {
  if (required == 0) throw OutOfRange("calibration sample count must be positive");
  if (samples.size() < required) throw InsufficientSamples(samples.size(), required);
  if (samples.size() > required) {
    throw OutOfRange("calibration takes exactly " + std::to_string(required) + " samples");
  }

  std::array<std::vector<double>, 3> axes;
  for (auto& a : axes) a.reserve(samples.size());
  for (const auto& s : samples) {
    if (accel_problem(s.accel)) throw OutOfRange("calibration sample exceeds +/-2 g");
    axes[0].push_back(s.accel.x);
    axes[1].push_back(s.accel.y);
    axes[2].push_back(s.accel.z);
  }

  CalibrationReference ref;
  ref.x0 = detail::order_free_mean(std::move(axes[0]));
  ref.y0 = detail::order_free_mean(std::move(axes[1]));
  ref.z0 = detail::order_free_mean(std::move(axes[2]));
  ref.sample_count = samples.size();
  ref.completed_at = samples.back().t;
  return ref;
}

/// Euclidean distance in g between a reading and the reference pose.
inline double deviation(const Accel& a, const CalibrationReference& ref) {
  return std::hypot(a.x - ref.x0, a.y - ref.y0, a.z - ref.z0);
}

}  // namespace rapu
