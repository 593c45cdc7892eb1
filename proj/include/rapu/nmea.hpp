/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rapu/errors.hpp"
#include "rapu/kernel.hpp"

namespace rapu {

/// GPS position decoded from an RMC or GGA sentence.
struct GeoFix {
  double lat = 0.0;  // decimal degrees, north positive
  double lon = 0.0;  // decimal degrees, east positive
  bool valid = false;
  std::string source_time;  // raw hhmmss.sss
  Millis received_at{0};

  friend bool operator==(const GeoFix&, const GeoFix&) = default;
};

/// A well-formed sentence of a type the parser does not decode.
struct Ignored {
  std::string sentence_id;
  friend bool operator==(const Ignored&, const Ignored&) = default;
};

using NmeaResult = std::variant<GeoFix, Ignored>;

/// XOR of every byte in the payload (the text between '$' and '*').
inline std::uint8_t nmea_checksum(std::string_view payload) {
  std::uint8_t x = 0;
  for (unsigned char c : payload) x ^= c;
  return x;
}

/// "$" + payload + "*" + two upper-case hex digits.
inline std::string nmea_frame(std::string_view payload) {
  char hex[3];
  std::snprintf(hex, sizeof hex, "%02X", nmea_checksum(payload));
  return "$" + std::string(payload) + "*" + hex;
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::optional<double> decimal_degrees(std::string_view field, char hemisphere) {
  std::size_t deg_digits = 0;
  double limit = 0.0;
  bool negate = false;
  switch (hemisphere) {
    case 'N': deg_digits = 2; limit = 90.0; break;
    case 'S': deg_digits = 2; limit = 90.0; negate = true; break;
    case 'E': deg_digits = 3; limit = 180.0; break;
    case 'W': deg_digits = 3; limit = 180.0; negate = true; break;
    default: return std::nullopt;
  }
  const auto dot = field.find('.');
  if (dot == std::string_view::npos || dot != deg_digits + 2) return std::nullopt;
  const auto deg_part = field.substr(0, deg_digits);
  const auto min_int = field.substr(deg_digits, 2);
  const auto min_frac = field.substr(dot + 1);
  if (!all_digits(deg_part) || !all_digits(min_int) || !all_digits(min_frac)) {
    return std::nullopt;
  }

  int degrees = 0;
  std::from_chars(deg_part.data(), deg_part.data() + deg_part.size(), degrees);
  double minutes = 0.0;
  const auto min_text = field.substr(deg_digits);
  auto [ptr, ec] = std::from_chars(min_text.data(), min_text.data() + min_text.size(), minutes);
  if (ec != std::errc{} || ptr != min_text.data() + min_text.size()) return std::nullopt;
  if (minutes >= 60.0) return std::nullopt;

  const double value = degrees + minutes / 60.0;
  if (value > limit) return std::nullopt;
  return negate ? -value : value;
}

inline std::vector<std::string_view> split_fields(std::string_view payload) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = payload.find(',', start);
    fields.push_back(payload.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

inline int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Decodes lat/lon at fields [i, i+3]. Both empty means "no position".
inline std::optional<std::pair<double, double>> position(
    const std::vector<std::string_view>& f, std::size_t i) {
  if (f[i].empty() && f[i + 1].empty() && f[i + 2].empty() && f[i + 3].empty()) {
    return std::nullopt;
  }
  if (f[i + 1].size() != 1) throw NmeaError(NmeaError::Kind::MalformedField, int(i + 1));
  if (f[i + 3].size() != 1) throw NmeaError(NmeaError::Kind::MalformedField, int(i + 3));
  const char ns = f[i + 1][0];
  const char ew = f[i + 3][0];
  if (ns != 'N' && ns != 'S') throw NmeaError(NmeaError::Kind::MalformedField, int(i + 1));
  if (ew != 'E' && ew != 'W') throw NmeaError(NmeaError::Kind::MalformedField, int(i + 3));
  auto lat = decimal_degrees(f[i], ns);
  if (!lat) throw NmeaError(NmeaError::Kind::MalformedField, int(i));
  auto lon = decimal_degrees(f[i + 2], ew);
  if (!lon) throw NmeaError(NmeaError::Kind::MalformedField, int(i + 2));
  return std::pair{*lat, *lon};
}

}  // namespace detail

/// ddmm.mmmm (latitude) or dddmm.mmmm (longitude) to signed decimal degrees.
inline double to_decimal_degrees(std::string_view field, char hemisphere) {
  auto v = detail::decimal_degrees(field, hemisphere);
  if (!v) throw NmeaError(NmeaError::Kind::MalformedField, -1);
  return *v;
}

/**
 * Parses one NMEA-0183 sentence. GP/GN RMC and GGA produce a GeoFix; any
 * other sentence with a good checksum is Ignored. A trailing CR/LF is
 * tolerated.
 */
inline NmeaResult parse_nmea(std::string_view sentence, Millis received_at = Millis{0}) {
  while (!sentence.empty() && (sentence.back() == '\n' || sentence.back() == '\r')) {
    sentence.remove_suffix(1);
  }
  if (sentence.empty() || sentence.front() != '$') {
    throw NmeaError(NmeaError::Kind::MalformedField, 0);
  }
  const auto star = sentence.find('*');
  if (star == std::string_view::npos || sentence.size() != star + 3) {
    throw NmeaError(NmeaError::Kind::MissingChecksum);
  }
  const int hi = detail::hex_value(sentence[star + 1]);
  const int lo = detail::hex_value(sentence[star + 2]);
  if (hi < 0 || lo < 0) throw NmeaError(NmeaError::Kind::MissingChecksum);

  const auto payload = sentence.substr(1, star - 1);
  if (nmea_checksum(payload) != ((hi << 4) | lo)) throw NmeaError(NmeaError::Kind::BadChecksum);

  const auto f = detail::split_fields(payload);
  const auto id = f[0];
  if (id != "GPRMC" && id != "GNRMC" && id != "GPGGA" && id != "GNGGA") {
    return Ignored{std::string(id)};
  }
  const auto type = id.substr(2);

  GeoFix fix;
  fix.received_at = received_at;
  if (type == "RMC") {
    // id, time, status, lat, N/S, lon, E/W, ...
    if (f.size() < 7) throw NmeaError(NmeaError::Kind::MalformedField, int(f.size()));
    if (f[2] != "A" && f[2] != "V") throw NmeaError(NmeaError::Kind::MalformedField, 2);
    fix.source_time = std::string(f[1]);
    auto pos = detail::position(f, 3);
    fix.valid = f[2] == "A";
    if (pos) {
      fix.lat = pos->first;
      fix.lon = pos->second;
    } else if (fix.valid) {
      throw NmeaError(NmeaError::Kind::MalformedField, 3);
    }
  } else {
    // id, time, lat, N/S, lon, E/W, quality, ...
    if (f.size() < 7) throw NmeaError(NmeaError::Kind::MalformedField, int(f.size()));
    if (!detail::all_digits(f[6])) throw NmeaError(NmeaError::Kind::MalformedField, 6);
    fix.source_time = std::string(f[1]);
    auto pos = detail::position(f, 2);
    int quality = 0;
    std::from_chars(f[6].data(), f[6].data() + f[6].size(), quality);
    fix.valid = quality >= 1;
    if (pos) {
      fix.lat = pos->first;
      fix.lon = pos->second;
    } else if (fix.valid) {
      throw NmeaError(NmeaError::Kind::MalformedField, 2);
    }
  }
  return fix;
}

}  // namespace rapu
