/*
 * Copyright (c) 2026 The rapu-sim Authors
 * SPDX-License-Identifier: Apache-2.0
 */

// rapu-sim: replay scenarios, validate scenario files, or serve live cockpit
// sessions over WebSocket.
//
// Exit codes: 0 ok, 1 scenario/config error, 2 internal error.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "rapu/bridge_server.hpp"
#include "rapu/config.hpp"
#include "rapu/engine.hpp"
#include "rapu/report.hpp"
#include "rapu/sensors.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

struct Overrides {
  std::optional<std::int64_t> sample_period_ms;
  std::optional<std::size_t> calib_samples;
  std::optional<std::size_t> window_n;
  std::optional<std::size_t> closed_k;
  std::optional<double> tilt_threshold_g;
  std::optional<double> alcohol_threshold;
  std::optional<std::int64_t> escape_window_ms;
  std::optional<std::string> recipient;
  std::optional<std::int64_t> modem_latency_ms;
  std::optional<std::int64_t> seed;
  bool realtime = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sample-period-ms", sample_period_ms, "Override sample_period_ms");
    cmd->add_option("--calib-samples", calib_samples, "Override calib_samples");
    cmd->add_option("--window-n", window_n, "Override window_n");
    cmd->add_option("--closed-k", closed_k, "Override closed_k");
    cmd->add_option("--tilt-threshold-g", tilt_threshold_g, "Override tilt_threshold_g");
    cmd->add_option("--alcohol-threshold", alcohol_threshold, "Override alcohol_threshold");
    cmd->add_option("--escape-window-ms", escape_window_ms, "Override escape_window_ms");
    cmd->add_option("--recipient", recipient, "Override the SMS recipient number");
    cmd->add_option("--modem-latency-ms", modem_latency_ms, "Override modem_latency_ms");
  }

  void apply(rapu::Config& c) const {
    if (sample_period_ms) c.sample_period_ms = *sample_period_ms;
    if (calib_samples) c.calib_samples = *calib_samples;
    if (window_n) c.window_n = *window_n;
    if (closed_k) c.closed_k = *closed_k;
    if (tilt_threshold_g) c.tilt_threshold_g = *tilt_threshold_g;
    if (alcohol_threshold) c.alcohol_threshold = *alcohol_threshold;
    if (escape_window_ms) c.escape_window_ms = *escape_window_ms;
    if (recipient) c.recipient = *recipient;
    if (modem_latency_ms) c.modem_latency_ms = *modem_latency_ms;
    if (seed) c.seed = *seed;
    if (realtime) c.realtime = true;
  }
};

rapu::Config load_config_file(const std::string& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw rapu::ConfigInvalid("cannot open config file " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw rapu::ConfigInvalid(std::string("malformed config JSON: ") + e.what());
  }
  rapu::Config c = rapu::apply_config_json(rapu::Config{}, j);
  ov.apply(c);
  rapu::validate(c);
  return c;
}

rapu::Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rapu::ParseError(0, "cannot open scenario file " + path);
  return rapu::ingest_scenario(in);
}

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("rapu"));
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("RAPU_LOG")) {
    spdlog::set_level(spdlog::level::from_str(lvl));
  }
}

int cmd_run(const std::string& scenario_path, const std::string& config_path,
            const std::optional<std::string>& out_path, const Overrides& ov) {
  const rapu::Config config = load_config_file(config_path, ov);
  const rapu::Scenario scenario = load_scenario_file(scenario_path);
  spdlog::info("replaying '{}' ({} ms)", scenario.name, scenario.duration.count());

  std::function<void(rapu::Millis)> pace;
  if (config.realtime) {
    const auto start = std::chrono::steady_clock::now();
    pace = [start](rapu::Millis t) { std::this_thread::sleep_until(start + t); };
  }
  const rapu::Report report = rapu::run_scenario(config, scenario, pace);
  spdlog::info("final phase {}", rapu::to_string(report.final_state.phase));

  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw rapu::ConfigInvalid("cannot write report to " + *out_path);
    rapu::emit_report(report, out);
  } else {
    rapu::emit_report(report, std::cout);
  }
  return kExitOk;
}

int cmd_validate(const std::string& scenario_path) {
  const rapu::Scenario sc = load_scenario_file(scenario_path);
  std::cout << "ok: '" << sc.name << "' duration " << sc.duration.count() << " ms, "
            << sc.ir.size() << " ir, " << sc.accel.size() << " accel, " << sc.gas.size()
            << " gas points, " << sc.events.size() << " events\n";
  return kExitOk;
}

int cmd_serve(const std::string& config_path, const std::string& listen, const Overrides& ov) {
  const rapu::Config config = load_config_file(config_path, ov);
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw rapu::ConfigInvalid("--listen expects addr:port");
  const std::string addr = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw rapu::ConfigInvalid("--listen port is not a number");
  }
  if (port < 0 || port > 65535) throw rapu::ConfigInvalid("--listen port out of range");

  rapu::BridgeServer server(config, addr, static_cast<unsigned short>(port),
                            [](const std::string& msg) { spdlog::warn("{}", msg); });
  spdlog::info("listening on ws://{}:{}/session", addr, server.port());
  std::cerr << "rapu-sim serving ws://" << addr << ":" << server.port() << "/session\n";
  server.run();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Driver-vigilance device simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string config_path;
  std::optional<std::string> out_path;
  std::string listen;
  Overrides run_ov;
  Overrides serve_ov;

  auto* run = app.add_subcommand("run", "Replay a scenario and write the JSON Lines report");
  run->add_option("--scenario", scenario_path, "Scenario file (JSON Lines)")->required();
  run->add_option("--config", config_path, "Config file (JSON object)")->required();
  run->add_option("--out", out_path, "Report path (default: stdout)");
  run->add_option("--seed", run_ov.seed, "Seed recorded in the report");
  run->add_flag("--realtime", run_ov.realtime, "Pace virtual time against the wall clock");
  run_ov.attach(run);

  auto* serve = app.add_subcommand("serve", "Serve live cockpit sessions over WebSocket");
  serve->add_option("--config", config_path, "Config file (JSON object)")->required();
  serve->add_option("--listen", listen, "addr:port")->required();
  serve_ov.attach(serve);

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("--scenario", scenario_path, "Scenario file (JSON Lines)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run) return cmd_run(scenario_path, config_path, out_path, run_ov);
    if (*serve) return cmd_serve(config_path, listen, serve_ov);
    return cmd_validate(scenario_path);
  } catch (const rapu::ParseError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return kExitInput;
  } catch (const rapu::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitInput;
  } catch (const rapu::BindFailure& e) {
    std::cerr << "bind failure: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}
