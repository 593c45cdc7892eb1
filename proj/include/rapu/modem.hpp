/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rapu/detectors.hpp"
#include "rapu/errors.hpp"
#include "rapu/kernel.hpp"
#include "rapu/nmea.hpp"

namespace rapu {

inline constexpr char kCtrlZ = '\x1A';
inline constexpr std::size_t kSmsMaxChars = 160;

// ---------------------------------------------------------------------------
// Message text

/// ASCII printable range excluding characters GSM-7 cannot carry verbatim.
inline bool gsm7_safe(std::string_view text) {
  for (unsigned char c : text) {
    if (c < 0x20 || c > 0x7E) return false;
    switch (c) {
      case '[': case ']': case '{': case '}': case '\\': case '^': case '~': case '|':
      case '`':
        return false;
      default: break;
    }
  }
  return true;
}

/// Next-of-kin text. A fix is only used when it is valid.
inline std::string compose_sms(TriggerCause cause, const std::optional<GeoFix>& fix, Millis t) {
  std::string body = "RAPU ALERT ";
  body += to_string(cause);
  if (fix && fix->valid) {
    char coords[64];
    std::snprintf(coords, sizeof coords, " LAT=%.6f LON=%.6f", fix->lat, fix->lon);
    body += coords;
  } else {
    body += " LOC=UNKNOWN";
  }
  body += " T=" + std::to_string(t.count());
  return body;
}

// ---------------------------------------------------------------------------
// Device side of the AT text-mode dialogue

struct ModemSession {
  enum class Phase { Idle, AwaitOkAte, AwaitOkCmgf, AwaitPrompt, AwaitCmgs, Done, Failed };

  Phase phase = Phase::Idle;
  std::string recipient;  // E.164 digits, optional leading '+'
  std::string body;
  int retries_left = 2;
  std::optional<int> message_ref;  // from "+CMGS: <n>"

  friend bool operator==(const ModemSession&, const ModemSession&) = default;
};

constexpr std::string_view to_string(ModemSession::Phase p) {
  switch (p) {
    case ModemSession::Phase::Idle: return "IDLE";
    case ModemSession::Phase::AwaitOkAte: return "AWAIT_OK_ATE";
    case ModemSession::Phase::AwaitOkCmgf: return "AWAIT_OK_CMGF";
    case ModemSession::Phase::AwaitPrompt: return "AWAIT_PROMPT";
    case ModemSession::Phase::AwaitCmgs: return "AWAIT_CMGS";
    case ModemSession::Phase::Done: return "DONE";
    case ModemSession::Phase::Failed: return "FAILED";
  }
  return "?";
}

inline bool valid_recipient(std::string_view number) {
  if (!number.empty() && number.front() == '+') number.remove_prefix(1);
  return !number.empty() && number.size() <= 15 && detail::all_digits(number);
}

inline ModemSession open_session(std::string recipient, std::string body, int retries = 2) {
  if (!valid_recipient(recipient)) throw OutOfRange("recipient is not an E.164 number");
  if (body.size() > kSmsMaxChars) throw OutOfRange("SMS body longer than 160 characters");
  if (!gsm7_safe(body)) throw OutOfRange("SMS body contains characters outside GSM-7");
  if (retries < 0) throw OutOfRange("retry budget must be non-negative");
  ModemSession s;
  s.recipient = std::move(recipient);
  s.body = std::move(body);
  s.retries_left = retries;
  return s;
}

struct SessionStart {};
struct ModemLine {
  std::string bytes;
};
using SessionStimulus = std::variant<SessionStart, ModemLine>;

struct SessionStep {
  ModemSession session;
  std::string outbound;  // bytes for the modem, possibly empty
};

namespace detail {

inline std::string_view strip_eol(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == '\r' || s.front() == '\n')) s.remove_prefix(1);
  return s;
}

inline bool is_error_line(std::string_view line) {
  return line == "ERROR" || line.starts_with("+CMS ERROR") || line.starts_with("+CME ERROR");
}

}  // namespace detail

/**
 * Advances the sender through AT -> AT+CMGF=1 -> AT+CMGS -> body+Ctrl-Z.
 * An ERROR reply at any stage restarts from AT while retries remain.
 * Blank lines are ignored.
 */
inline SessionStep modem_session_step(ModemSession s, const SessionStimulus& stimulus) {
  using P = ModemSession::Phase;
  if (std::holds_alternative<SessionStart>(stimulus)) {
    if (s.phase != P::Idle) {
      throw ProtocolViolation("session already started (" + std::string(to_string(s.phase)) +
                              ")");
    }
    s.phase = P::AwaitOkAte;
    return {std::move(s), "AT\r\n"};
  }

  const auto& raw = std::get<ModemLine>(stimulus).bytes;
  const auto line = detail::strip_eol(raw);
  const bool prompt = raw == "> " || line == ">";
  if (line.empty() && !prompt) return {std::move(s), {}};

  auto unexpected = [&] {
    return ProtocolViolation("unexpected line \"" + std::string(line) + "\" in " +
                             std::string(to_string(s.phase)));
  };

  if (s.phase == P::Idle || s.phase == P::Done || s.phase == P::Failed) throw unexpected();

  if (detail::is_error_line(line)) {
    if (s.retries_left == 0) {
      s.phase = P::Failed;
      return {std::move(s), {}};
    }
    --s.retries_left;
    s.message_ref.reset();
    s.phase = P::AwaitOkAte;
    return {std::move(s), "AT\r\n"};
  }

  switch (s.phase) {
    case P::AwaitOkAte:
      if (line != "OK") throw unexpected();
      s.phase = P::AwaitOkCmgf;
      return {std::move(s), "AT+CMGF=1\r\n"};
    case P::AwaitOkCmgf: {
      if (line != "OK") throw unexpected();
      s.phase = P::AwaitPrompt;
      std::string out = "AT+CMGS=\"" + s.recipient + "\"\r\n";
      return {std::move(s), std::move(out)};
    }
    case P::AwaitPrompt: {
      if (!prompt) throw unexpected();
      s.phase = P::AwaitCmgs;
      std::string out = s.body;
      out += kCtrlZ;
      return {std::move(s), std::move(out)};
    }
    case P::AwaitCmgs:
      if (line.starts_with("+CMGS:")) {
        auto digits = line.substr(6);
        while (!digits.empty() && digits.front() == ' ') digits.remove_prefix(1);
        if (!detail::all_digits(digits) || s.message_ref) throw unexpected();
        s.message_ref = std::stoi(std::string(digits));
        return {std::move(s), {}};
      }
      if (line == "OK" && s.message_ref) {
        s.phase = P::Done;
        return {std::move(s), {}};
      }
      throw unexpected();
    default: throw unexpected();
  }
}

// ---------------------------------------------------------------------------
// Simulated GSM modem

enum class Direction { ToModem, FromModem };

struct TranscriptEntry {
  Direction dir = Direction::ToModem;
  std::string bytes;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

/// Which commands to answer with ERROR, and how many times each.
/// Keys: "AT", "AT+CMGF", "AT+CMGS", "BODY".
struct ModemFaults {
  bool registered = true;
  std::map<std::string, int> error_counts;

  friend bool operator==(const ModemFaults&, const ModemFaults&) = default;
};

struct SimModem {
  bool registered = true;
  int next_cmgs_ref = 1;
  bool text_mode = false;
  bool awaiting_body = false;
  std::string rx_buffer;
  std::map<std::string, int> pending_errors;
  std::vector<TranscriptEntry> transcript;  // append-only

  friend bool operator==(const SimModem&, const SimModem&) = default;
};

inline SimModem make_sim_modem(const ModemFaults& faults = {}) {
  SimModem m;
  m.registered = faults.registered;
  m.pending_errors = faults.error_counts;
  return m;
}

struct ModemStep {
  SimModem modem;
  std::vector<std::string> responses;
};

namespace detail {

inline bool consume_fault(SimModem& m, const std::string& key) {
  auto it = m.pending_errors.find(key);
  if (it == m.pending_errors.end() || it->second <= 0) return false;
  --it->second;
  return true;
}

inline void modem_command(SimModem& m, std::string_view cmd, std::vector<std::string>& out) {
  static const std::string kOk = "OK\r\n";
  static const std::string kError = "ERROR\r\n";
  if (cmd.empty()) return;

  std::string key;
  if (cmd == "AT") {
    key = "AT";
  } else if (cmd.starts_with("AT+CMGF=")) {
    key = "AT+CMGF";
  } else if (cmd.starts_with("AT+CMGS=")) {
    key = "AT+CMGS";
  } else {
    out.push_back(kError);
    return;
  }
  if (consume_fault(m, key)) {
    out.push_back(kError);
    return;
  }

  if (key == "AT") {
    out.push_back(kOk);
  } else if (key == "AT+CMGF") {
    const auto arg = cmd.substr(8);
    if (arg != "0" && arg != "1") {
      out.push_back(kError);
      return;
    }
    m.text_mode = arg == "1";
    out.push_back(kOk);
  } else {
    const auto arg = cmd.substr(8);
    const bool quoted = arg.size() >= 3 && arg.front() == '"' && arg.back() == '"';
    if (!m.registered || !m.text_mode || !quoted ||
        !valid_recipient(arg.substr(1, arg.size() - 2))) {
      out.push_back(kError);
      return;
    }
    m.awaiting_body = true;
    out.push_back("> ");
  }
}

}  // namespace detail

/// Feeds bytes from the device into the modem and collects its replies.
inline ModemStep sim_modem_step(SimModem m, std::string_view inbound) {
  m.transcript.push_back({Direction::ToModem, std::string(inbound)});
  m.rx_buffer.append(inbound);

  std::vector<std::string> out;
  while (!m.rx_buffer.empty()) {
    if (m.awaiting_body) {
      const auto z = m.rx_buffer.find(kCtrlZ);
      if (z == std::string::npos) break;
      m.rx_buffer.erase(0, z + 1);
      m.awaiting_body = false;
      if (detail::consume_fault(m, "BODY")) {
        out.emplace_back("ERROR\r\n");
      } else {
        out.push_back("+CMGS: " + std::to_string(m.next_cmgs_ref++) + "\r\n");
        out.emplace_back("OK\r\n");
      }
      continue;
    }
    const auto cr = m.rx_buffer.find('\r');
    if (cr == std::string::npos) break;
    std::string cmd = m.rx_buffer.substr(0, cr);
    std::size_t consumed = cr + 1;
    if (consumed < m.rx_buffer.size() && m.rx_buffer[consumed] == '\n') ++consumed;
    m.rx_buffer.erase(0, consumed);
    detail::modem_command(m, cmd, out);
  }

  for (const auto& r : out) m.transcript.push_back({Direction::FromModem, r});
  return {std::move(m), std::move(out)};
}

struct DialogueResult {
  ModemSession session;
  SimModem modem;
  int exchanges = 0;  // session steps taken, Start included
};

/// Runs the session against the simulated modem with zero latency until the
/// session finishes or max_exchanges steps have been taken.
inline DialogueResult converse(ModemSession session, SimModem modem, int max_exchanges = 40) {
  using P = ModemSession::Phase;
  DialogueResult r{std::move(session), std::move(modem), 0};
  auto step = modem_session_step(std::move(r.session), SessionStart{});
  r.session = std::move(step.session);
  ++r.exchanges;
  std::string outbound = std::move(step.outbound);
  while (r.exchanges < max_exchanges && r.session.phase != P::Done &&
         r.session.phase != P::Failed && !outbound.empty()) {
    auto reply = sim_modem_step(std::move(r.modem), outbound);
    r.modem = std::move(reply.modem);
    outbound.clear();
    for (auto& line : reply.responses) {
      if (r.session.phase == P::Done || r.session.phase == P::Failed) break;
      auto next = modem_session_step(std::move(r.session), ModemLine{std::move(line)});
      r.session = std::move(next.session);
      ++r.exchanges;
      outbound += next.outbound;
    }
  }
  return r;
}

}  // namespace rapu
