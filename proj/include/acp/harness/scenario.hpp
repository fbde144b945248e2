#pragma once

#include "acp/aip/task.hpp"
#include "acp/aip/user_agent.hpp"
#include "acp/harness/scenario_config.hpp"
#include "acp/transport/transport.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace acp::harness {

struct PhaseRecord {
  int phase = 0;
  std::string name;
  std::string task_id;
  std::int64_t at = 0;

  friend bool operator==(const PhaseRecord&, const PhaseRecord&) = default;
};

// Canonical, hashable record of one run: every delivered envelope, the
// task's state transitions, phase markers, anchor logs, the usage ledger
// and the final report.
struct Transcript {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string transport;
  core::Value config = core::Value::object();
  std::vector<transport::BusEvent> events;
  std::vector<std::pair<std::string, aip::Transition>> transitions;  // (task id, transition)
  std::vector<PhaseRecord> phases;
  core::Value anchors = core::Value::object();  // registry -> anchor log
  core::Value keys = core::Value::object();     // party -> public key hex
  core::Value ledger = core::Value::array();
  core::Value invoice = core::Value::object();  // payer -> amount, from the live ledger
  core::Value report = core::Value::object();   // task_report payload, {} when none arrived
  std::string status;                           // completed | failed
  core::Value failure = core::Value::object();  // {phase, error}, {} on success
  core::Value faults = core::Value::array();    // errors raised inside handlers
  std::size_t steps = 0;
  std::string transcript_hash;

  bool completed() const noexcept { return status == "completed"; }
  std::vector<core::Envelope> envelopes() const;

  // Everything except transcript_hash.
  core::Value body() const;
  // SHA-256 (hex) of the canonical encoding of body().
  std::string compute_hash() const;
  core::Value to_value() const;
  // Throws Error(ParseError).
  static Transcript from_value(const core::Value& v);
  void save(const std::filesystem::path& file) const;
  static Transcript load(const std::filesystem::path& file);
};

struct RunOptions {
  std::optional<std::string> transport;  // overrides the config
  aip::UserAgent::Ask ask;               // answers prompts instead of the canned replies
  std::chrono::milliseconds max_wall{10000};
  std::int64_t socket_timeout_ms = 5000;
};

// Boots registries, discovery, the tool service, the roster, the personal
// agent and the user; registers the roster; then serves the goal. A run
// that does not complete still returns its transcript (status "failed").
// Throws Error(ConfigError) for invalid configs.
Transcript run(const ScenarioConfig& config, const RunOptions& options = {});

// As run(), but throws Error(ScenarioFailed) with data {phase, cause,
// transcript} unless the task completed.
Transcript run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace acp::harness
