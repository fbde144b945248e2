#include "acp/harness/deployment.hpp"

#include "acp/arp/registry_service.hpp"
#include "acp/core/error.hpp"

#include <algorithm>
#include <cctype>

namespace acp::harness {

std::string registry_party(const std::vector<std::string>& path) { return core::ServiceId{"registry", path}.str(); }

std::string key_file_name(const std::string& party) {
  std::string out;
  for (char c : party) out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' ? c : '_';
  return out + ".key";
}

Deployment Deployment::build(const ScenarioConfig& cfg, const KeySource& source) {
  Deployment d;
  const auto& root = cfg.registries.front();
  auto remember = [&](const a3ap::KeyPair& kp, const a3ap::Credential& cred) {
    d.keys.emplace(cred.agent, kp);
    d.credentials.emplace(cred.agent, cred);
    d.keyring.add(cred.agent, kp.public_key());
    d.parties.push_back(cred.agent);
  };

  for (const auto& path : cfg.registries) {
    auto kp = source(registry_party(path));
    a3ap::Authority authority{core::ServiceId{"registry", path}, path, kp};
    d.trust.add(authority.id.str(), kp.public_key());
    remember(kp, a3ap::issue_service_credential("operator", authority.id, kp.public_key(), authority, 0));
    d.authorities.emplace(path, std::move(authority));
  }
  auto service = [&](const std::string& id) {
    auto kp = source(id);
    remember(kp, a3ap::issue_service_credential("operator", core::parse_service_id(id), kp.public_key(),
                                                d.authorities.at(root), 0));
  };
  auto agent = [&](const PrincipalSpec& p) {
    auto kp = source(p.agent_id().str());
    remember(kp, a3ap::issue_credential(p.owner, p.name, kp.public_key(), d.authorities.at(p.registry), 0));
  };
  service(cfg.discovery_id);
  service(cfg.tool_service_id);
  for (const auto& a : cfg.agents) agent(a.principal);
  agent(cfg.personal_agent);
  agent(cfg.user);
  return d;
}

Deployment Deployment::derive(const ScenarioConfig& cfg) {
  auto ids = core::IdSource::seeded(cfg.seed, "harness");
  return build(cfg, [&](const std::string&) { return a3ap::KeyPair::generate(ids); });
}

Deployment Deployment::from_key_dir(const ScenarioConfig& cfg, const std::filesystem::path& dir) {
  return build(cfg, [&](const std::string& party) {
    auto file = dir / key_file_name(party);
    if (!std::filesystem::is_regular_file(file)) throw Error(Errc::ParseError, "no key file for " + party);
    return a3ap::read_key_file(file.string());
  });
}

void Deployment::write_key_dir(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& party : parties) a3ap::write_key_file((dir / key_file_name(party)).string(), keys.at(party));
  keyring.save((dir / "keyring.txt").string());
}

const a3ap::KeyPair& Deployment::key_pair(const std::string& party) const {
  auto it = keys.find(party);
  if (it == keys.end()) throw Error(Errc::NotFound, "no principal " + party + " in the scenario");
  return it->second;
}

const a3ap::Credential& Deployment::credential(const std::string& party) const {
  auto it = credentials.find(party);
  if (it == credentials.end()) throw Error(Errc::NotFound, "no principal " + party + " in the scenario");
  return it->second;
}

std::unique_ptr<arp::RegistryNode> make_registry_node(const ScenarioConfig& cfg, const std::vector<std::string>& path,
                                                      const a3ap::TrustStore& trust) {
  auto node = std::make_unique<arp::RegistryNode>(path, trust);
  if (path.size() > 1) node->set_parent(registry_party({path.begin(), path.end() - 1}));
  for (const auto& other : cfg.registries) {
    if (other.size() == path.size() + 1 && std::equal(path.begin(), path.end(), other.begin())) {
      node->add_child(other.back(), registry_party(other));
    }
  }
  return node;
}

std::unique_ptr<adp::DiscoveryService> make_discovery(const ScenarioConfig& cfg, a3ap::Fabric& fabric,
                                                      const Deployment& d) {
  std::vector<std::string> registries;
  for (const auto& path : cfg.registries) registries.push_back(registry_party(path));
  return std::make_unique<adp::DiscoveryService>(fabric, d.credential(cfg.discovery_id), d.key_pair(cfg.discovery_id),
                                                 registries, adp::SynonymTable::from_value(cfg.synonyms));
}

std::unique_ptr<atp::ToolManager> make_tool_manager(const ScenarioConfig& cfg, atp::ConnectorRegistry& connectors) {
  connectors = atp::ConnectorRegistry::with_builtins(cfg.fixtures_dir);
  auto tools = std::make_unique<atp::ToolManager>(cfg.tool_service_id, connectors);
  for (const auto& r : cfg.resources) tools->attach_resource(atp::ResourceDescriptor::from_value(r));
  for (const auto& t : cfg.tools) tools->register_tool(atp::ToolDescriptor::from_value(t));
  return tools;
}

std::unique_ptr<atp::ToolService> make_tool_service(const ScenarioConfig& cfg, a3ap::Fabric& fabric,
                                                    const Deployment& d, atp::ToolManager& tools,
                                                    a3ap::Ledger& ledger) {
  auto service = std::make_unique<atp::ToolService>(fabric, d.credential(cfg.tool_service_id),
                                                    d.key_pair(cfg.tool_service_id), tools, ledger);
  service->set_call_metering(cfg.call_metering);
  return service;
}

std::pair<std::string, core::Value> registration(const ScenarioConfig&, const Deployment& d, const AgentSpec& agent) {
  const auto& cred = d.credential(agent.principal.agent_id().str());
  auto desc = agent.descriptor;
  desc["agent"] = cred.agent;
  return {registry_party(agent.principal.registry),
          arp::register_payload(cred, core::CapabilityDescriptor::from_value(desc))};
}

std::unique_ptr<aip::WorkerAgent> make_worker(const ScenarioConfig& cfg, a3ap::Fabric& fabric, const Deployment& d,
                                              const AgentSpec& agent) {
  auto id = agent.principal.agent_id().str();
  auto script = cfg.scripts.at(agent.script);
  if (!script.contains("script_id")) script["script_id"] = agent.script;
  return std::make_unique<aip::WorkerAgent>(fabric, d.credential(id), d.key_pair(id),
                                            aip::WorkerScript::from_value(script), cfg.tool_service_id);
}

std::unique_ptr<aip::PersonalAgent> make_personal_agent(const ScenarioConfig& cfg, a3ap::Fabric& fabric,
                                                        const Deployment& d, std::int64_t timeout) {
  aip::PersonalAgentConfig pa;
  pa.trust_anchor = registry_party(cfg.registries.front());
  pa.discovery = cfg.discovery_id;
  pa.discover_limit = cfg.discover_limit;
  pa.timeout = timeout;
  auto id = cfg.personal_agent.agent_id().str();
  return std::make_unique<aip::PersonalAgent>(fabric, d.credential(id), d.key_pair(id), pa);
}

}  // namespace acp::harness
