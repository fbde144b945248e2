#pragma once

#include "acp/a3ap/credential.hpp"
#include "acp/a3ap/ledger.hpp"
#include "acp/a3ap/peer.hpp"
#include "acp/adp/discovery_service.hpp"
#include "acp/aip/personal_agent.hpp"
#include "acp/aip/worker_agent.hpp"
#include "acp/arp/registry_node.hpp"
#include "acp/atp/tool_service.hpp"
#include "acp/harness/scenario_config.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace acp::harness {

std::string registry_party(const std::vector<std::string>& path);

// Keys, credentials and trust roots for every principal of a scenario.
// Each registry is the authority for principals placed under it; services
// are vouched for by the root registry.
struct Deployment {
  std::map<std::vector<std::string>, a3ap::Authority> authorities;
  a3ap::TrustStore trust;
  a3ap::KeyRing keyring;
  std::map<std::string, a3ap::KeyPair> keys;
  std::map<std::string, a3ap::Credential> credentials;
  std::vector<std::string> parties;  // registries, discovery, tool service, roster, personal agent, user

  using KeySource = std::function<a3ap::KeyPair(const std::string& party)>;
  static Deployment build(const ScenarioConfig& config, const KeySource& source);
  // Key pairs drawn from the scenario seed in the order of `parties`.
  static Deployment derive(const ScenarioConfig& config);
  // Key pairs read from <dir>/<key_file_name(party)>. Throws Error(ParseError).
  static Deployment from_key_dir(const ScenarioConfig& config, const std::filesystem::path& dir);
  // One key file per party plus keyring.txt.
  void write_key_dir(const std::filesystem::path& dir) const;

  // Throws Error(NotFound) for a party outside the scenario.
  const a3ap::KeyPair& key_pair(const std::string& party) const;
  const a3ap::Credential& credential(const std::string& party) const;
};

std::string key_file_name(const std::string& party);

// Builders for the scenario's principals, shared by the in-process runner
// and the standalone services.

// Registry node at `path`, wired to its parent and children.
std::unique_ptr<arp::RegistryNode> make_registry_node(const ScenarioConfig& config, const std::vector<std::string>& path,
                                                      const a3ap::TrustStore& trust);
// Subscribed to every registry of the scenario.
std::unique_ptr<adp::DiscoveryService> make_discovery(const ScenarioConfig& config, a3ap::Fabric& fabric,
                                                      const Deployment& deployment);
// Fills `connectors` with the built-ins over the fixture directory.
std::unique_ptr<atp::ToolManager> make_tool_manager(const ScenarioConfig& config, atp::ConnectorRegistry& connectors);
std::unique_ptr<atp::ToolService> make_tool_service(const ScenarioConfig& config, a3ap::Fabric& fabric,
                                                    const Deployment& deployment, atp::ToolManager& tools,
                                                    a3ap::Ledger& ledger);
// (registry party, register_request payload) for one roster entry.
std::pair<std::string, core::Value> registration(const ScenarioConfig& config, const Deployment& deployment,
                                                 const AgentSpec& agent);
std::unique_ptr<aip::WorkerAgent> make_worker(const ScenarioConfig& config, a3ap::Fabric& fabric,
                                              const Deployment& deployment, const AgentSpec& agent);
std::unique_ptr<aip::PersonalAgent> make_personal_agent(const ScenarioConfig& config, a3ap::Fabric& fabric,
                                                        const Deployment& deployment, std::int64_t timeout);

}  // namespace acp::harness
