#pragma once

#include "acp/a3ap/ledger.hpp"
#include "acp/core/ids.hpp"
#include "acp/core/value.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace acp::harness {

// A principal hosted by the harness: name plus the registry that issues
// its credential.
struct PrincipalSpec {
  std::string name;
  std::vector<std::string> registry = {"root"};
  std::string owner = "owner";

  core::AgentId agent_id() const;
};

struct AgentSpec {
  PrincipalSpec principal;
  std::string script;
  core::Value descriptor = core::Value::object();  // "agent" is filled in

  core::Value to_value() const;
};

// Everything a scenario run depends on. Loaded from TOML or JSON with the
// same layout (see scenarios/restaurant.toml).
struct ScenarioConfig {
  std::string name;
  std::uint64_t seed = 42;
  std::size_t max_steps = 5000;
  std::int64_t timeout = 50;  // sim steps; milliseconds on sockets
  std::string task_id = "task-1";
  std::string transport = "sim";  // sim | socket

  std::vector<std::vector<std::string>> registries;
  std::string discovery_id = "svc://discovery/main";
  core::Value synonyms = core::Value::object();
  a3ap::BillingPolicy billing;

  PrincipalSpec user;
  std::map<std::string, core::Value> replies;  // prompt id -> reply template
  PrincipalSpec personal_agent;
  std::size_t discover_limit = 10;
  core::Value goal = core::Value::object();

  std::string tool_service_id = "svc://tools/main";
  std::string fixtures;                // as written in the file
  std::filesystem::path fixtures_dir;  // resolved
  bool call_metering = true;
  std::vector<core::Value> resources;
  std::vector<core::Value> tools;

  std::vector<AgentSpec> agents;
  std::map<std::string, core::Value> scripts;

  // Deterministic form (no resolved filesystem paths).
  core::Value to_value() const;
  // Relative fixture directories resolve against base_dir. Throws
  // Error(ConfigError) for structural problems.
  static ScenarioConfig from_value(const core::Value& v, const std::filesystem::path& base_dir = {});
  // .toml or .json. Throws Error(ConfigError | ParseError).
  static ScenarioConfig load(const std::filesystem::path& file);

  // Cross-references: registry paths, unique roster names, scripts and
  // fixture files that exist, a parseable goal, well-formed tools.
  // Throws Error(ConfigError) with data.problems.
  void validate() const;
};

// TOML document to Value (tables -> maps, arrays -> lists). Dates and
// times become strings.
core::Value parse_toml(const std::string& text, const std::string& source = "config");

}  // namespace acp::harness
