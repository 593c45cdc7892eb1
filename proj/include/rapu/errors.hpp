/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rapu {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PastDeadline : public Error {
 public:
  PastDeadline() : Error("event scheduled before the current virtual time") {}
};

class TimeReversal : public Error {
 public:
  TimeReversal() : Error("advance target lies before the current virtual time") {}
};

/// Scenario ingestion failure. line_no is 1-based; 0 means "not tied to a line".
class ParseError : public Error {
 public:
  ParseError(std::size_t line_no, std::string reason)
      : Error("line " + std::to_string(line_no) + ": " + reason),
        line_no_(line_no),
        reason_(std::move(reason)) {}

  std::size_t line_no() const noexcept { return line_no_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_no_;
  std::string reason_;
};

class InsufficientSamples : public Error {
 public:
  InsufficientSamples(std::size_t got, std::size_t want)
      : Error("calibration needs " + std::to_string(want) + " samples, got " +
              std::to_string(got)) {}
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class NotCalibrated : public Error {
 public:
  NotCalibrated() : Error("tilt detection requires a calibration reference") {}
};

class UnrenderableGlyph : public Error {
 public:
  explicit UnrenderableGlyph(char c)
      : Error(std::string("glyph cannot be shown on a seven-segment digit: '") + c + "'"),
        glyph_(c) {}

  char glyph() const noexcept { return glyph_; }

 private:
  char glyph_;
};

class NmeaError : public Error {
 public:
  enum class Kind { BadChecksum, MalformedField, MissingChecksum };

  NmeaError(Kind kind, int field_index = -1)
      : Error(describe(kind, field_index)), kind_(kind), field_index_(field_index) {}

  Kind kind() const noexcept { return kind_; }
  /// Comma-separated field position (0 = sentence id). -1 when not applicable.
  int field_index() const noexcept { return field_index_; }

 private:
  static std::string describe(Kind kind, int field_index) {
    switch (kind) {
      case Kind::BadChecksum: return "nmea: bad checksum";
      case Kind::MissingChecksum: return "nmea: missing checksum";
      case Kind::MalformedField: break;
    }
    return "nmea: malformed field " + std::to_string(field_index);
  }

  Kind kind_;
  int field_index_;
};

class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

class ConfigInvalid : public Error {
 public:
  using Error::Error;
};

/// Live-injection value outside the channel range.
class RangeError : public Error {
 public:
  using Error::Error;
};

class BindFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace rapu
