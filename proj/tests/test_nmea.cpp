/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <gtest/gtest.h>

#include <random>

#include "rapu/nmea.hpp"

using rapu::Millis;
using rapu::NmeaError;

namespace {

// checksums below were computed outside the library
const std::string kRmc = "$GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,003.1,W*6A";
const std::string kGga = "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47";
const std::string kGsv = "$GPGSV,3,1,11,03,03,111,00,04,15,270,00,06,01,010,00,13,06,292,00*74";
const std::string kVoid = "$GPRMC,123519,V,,,,,,,230394,,*33";
const std::string kSouth = "$GNRMC,000000,A,3351.000,S,15112.500,E,0,0,010120,,*1B";

NmeaError::Kind kind_of(const std::string& s) {
  try {
    rapu::parse_nmea(s);
  } catch (const NmeaError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << s;
  return NmeaError::Kind::MalformedField;
}

}  // namespace

TEST(Nmea, ChecksumOfExample) {
  EXPECT_EQ(rapu::nmea_checksum(kRmc.substr(1, kRmc.size() - 4)), 0x6A);
}

TEST(Nmea, RmcExample) {
  auto r = rapu::parse_nmea(kRmc, Millis(777));
  const auto& fix = std::get<rapu::GeoFix>(r);
  EXPECT_TRUE(fix.valid);
  EXPECT_NEAR(fix.lat, 48.1173, 1e-6);
  EXPECT_NEAR(fix.lon, 11.516667, 1e-6);
  EXPECT_EQ(fix.source_time, "123519");
  EXPECT_EQ(fix.received_at, Millis(777));
}

TEST(Nmea, TrailingCrLfAndLowercaseHex) {
  EXPECT_TRUE(std::get<rapu::GeoFix>(rapu::parse_nmea(kRmc + "\r\n")).valid);
  auto lower = kSouth;
  lower.back() = 'b';
  EXPECT_TRUE(std::get<rapu::GeoFix>(rapu::parse_nmea(lower)).valid);
}

TEST(Nmea, GgaAndSouthernHemisphere) {
  const auto gga = std::get<rapu::GeoFix>(rapu::parse_nmea(kGga));
  EXPECT_TRUE(gga.valid);
  EXPECT_NEAR(gga.lat, 48.1173, 1e-9);
  const auto south = std::get<rapu::GeoFix>(rapu::parse_nmea(kSouth));
  EXPECT_NEAR(south.lat, -33.85, 1e-9);
  EXPECT_NEAR(south.lon, 151.2083333333, 1e-9);
}

TEST(Nmea, VoidFixIsInvalid) {
  const auto fix = std::get<rapu::GeoFix>(rapu::parse_nmea(kVoid));
  EXPECT_FALSE(fix.valid);
}

TEST(Nmea, OtherSentencesIgnored) {
  EXPECT_EQ(std::get<rapu::Ignored>(rapu::parse_nmea(kGsv)).sentence_id, "GPGSV");
}

TEST(Nmea, Errors) {
  auto bad = kRmc;
  bad.back() = 'B';
  EXPECT_EQ(kind_of(bad), NmeaError::Kind::BadChecksum);
  EXPECT_EQ(kind_of(kRmc.substr(0, kRmc.size() - 3)), NmeaError::Kind::MissingChecksum);
  EXPECT_EQ(kind_of("$GPRMC,1*ZZ"), NmeaError::Kind::MissingChecksum);
  EXPECT_EQ(kind_of("GPRMC*00"), NmeaError::Kind::MalformedField);
  EXPECT_EQ(kind_of(rapu::nmea_frame("GPRMC,123519,A,48x7.038,N,01131.000,E")),
            NmeaError::Kind::MalformedField);
  EXPECT_EQ(kind_of(rapu::nmea_frame("GPRMC,123519,A,,,,")), NmeaError::Kind::MalformedField);
}

TEST(Nmea, DecimalDegrees) {
  EXPECT_EQ(rapu::to_decimal_degrees("0000.000", 'N'), 0.0);
  EXPECT_NEAR(rapu::to_decimal_degrees("4807.038", 'N'), 48.0 + 7.038 / 60.0, 1e-12);
  EXPECT_NEAR(rapu::to_decimal_degrees("01131.000", 'W'), -11.5166667, 1e-6);
  EXPECT_THROW(rapu::to_decimal_degrees("4860.000", 'N'), NmeaError);
  EXPECT_THROW(rapu::to_decimal_degrees("9100.000", 'S'), NmeaError);
  EXPECT_THROW(rapu::to_decimal_degrees("4807.038", 'E'), NmeaError);
}

// Framing then parsing never trips the checksum; any single-byte change to
// the payload always does.
TEST(Nmea, ChecksumRoundTripProperty) {
  std::mt19937 rng(123);
  std::uniform_int_distribution<int> printable(0x20, 0x7E);
  for (int round = 0; round < 5000; ++round) {
    std::string payload;
    const int len = std::uniform_int_distribution<int>(1, 70)(rng);
    for (int i = 0; i < len; ++i) {
      char c;
      do c = char(printable(rng));
      while (c == '*' || c == '$');
      payload += c;
    }
    const auto framed = rapu::nmea_frame(payload);
    try {
      rapu::parse_nmea(framed);
    } catch (const NmeaError& e) {
      ASSERT_NE(e.kind(), NmeaError::Kind::BadChecksum) << framed;
      ASSERT_NE(e.kind(), NmeaError::Kind::MissingChecksum) << framed;
    }
    auto corrupt = framed;
    const auto pos = std::uniform_int_distribution<std::size_t>(1, payload.size())(rng);
    char c;
    do c = char(printable(rng));
    while (c == corrupt[pos] || c == '*' || c == '$');
    corrupt[pos] = c;
    EXPECT_EQ(kind_of(corrupt), NmeaError::Kind::BadChecksum) << corrupt;
  }
}
