/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

// Runs the SMS sender against a flaky simulated modem and dumps the AT
// transcript.

#include <iostream>

#include "rapu/modem.hpp"

namespace {

std::string printable(const std::string& bytes) {
  std::string out;
  for (char c : bytes) {
    if (c == '\r') out += "\\r";
    else if (c == '\n') out += "\\n";
    else if (c == '\x1A') out += "^Z";
    else out += c;
  }
  return out;
}

}  // namespace

int main() {
  using namespace rapu;
  const auto body = compose_sms(TriggerCause::HeadTilt, std::nullopt, Millis(42'000));
  auto session = open_session("+910000000000", body, 2);
  auto modem = make_sim_modem({true, {{"AT+CMGS", 1}, {"BODY", 1}}});

  const auto r = converse(session, modem);
  for (const auto& e : r.modem.transcript) {
    std::cout << (e.dir == Direction::ToModem ? ">> " : "<< ") << printable(e.bytes) << '\n';
  }
  std::cout << to_string(r.session.phase) << " after " << r.exchanges << " exchanges, "
            << r.session.retries_left << " retries left\n";
  return r.session.phase == ModemSession::Phase::Done ? 0 : 1;
}
