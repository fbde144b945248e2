#include "acp/a3ap/ledger.hpp"
#include "acp/arp/registry_service.hpp"
#include "acp/core/error.hpp"
#include "acp/harness/deployment.hpp"
#include "acp/harness/replay.hpp"
#include "acp/harness/scenario.hpp"
#include "acp/transport/socket_transport.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace acp;
using core::Value;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

Value read_json(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot read " + file);
  std::stringstream buf;
  buf << in.rdbuf();
  return core::canonical_decode(buf.str());
}

void print(const Value& v) { std::cout << v.dump(2) << '\n'; }

// Records everything it receives; used for one-shot requests.
class Probe : public a3ap::Peer {
 public:
  using a3ap::Peer::Peer;
  std::vector<core::Envelope> inbox;

 protected:
  void handle(const core::Envelope& env) override { inbox.push_back(env); }
};

// Options shared by the live-service subcommands.
struct NodeOptions {
  std::string scenario;
  std::string peers;
  std::string keys;
  std::string listen;
  std::int64_t run_for_ms = 0;  // 0: until interrupted
  std::int64_t timeout_ms = 5000;
};

void add_node_options(CLI::App* cmd, NodeOptions& o) {
  cmd->add_option("--scenario", o.scenario, "Scenario file (.toml or .json)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--peers", o.peers, "Address book: lines of '<party> <host:port>'")->check(CLI::ExistingFile);
  cmd->add_option("--keys", o.keys, "Key directory written by 'acp keygen --scenario'")->check(CLI::ExistingDirectory);
  cmd->add_option("--listen", o.listen, "host:port to listen on (default: this party's address book entry)");
  cmd->add_option("--for", o.run_for_ms, "Stop after this many milliseconds (default: until interrupted)");
  cmd->add_option("--timeout", o.timeout_ms, "Handshake and request timeout in milliseconds");
}

// One process hosting some of the scenario's principals over TCP.
struct Node {
  harness::ScenarioConfig config;
  harness::Deployment deployment;
  transport::SocketTransport transport;
  transport::AddressBook addresses{transport::EndpointAddr::Kind::Socket};
  a3ap::KeyRing keys;
  std::unique_ptr<a3ap::Fabric> fabric;
  std::unique_ptr<a3ap::Runtime> runtime;
  std::vector<a3ap::Peer*> hosted;

  explicit Node(const NodeOptions& o)
      : config(harness::ScenarioConfig::load(o.scenario)),
        deployment(o.keys.empty() ? harness::Deployment::derive(config)
                                  : harness::Deployment::from_key_dir(config, o.keys)) {
    config.validate();
    if (!o.peers.empty()) addresses = transport::AddressBook::load(o.peers);
    keys = deployment.keyring;
    fabric = std::make_unique<a3ap::Fabric>(
        a3ap::Fabric{transport, addresses, keys, deployment.trust, std::nullopt, o.timeout_ms});
    runtime = std::make_unique<a3ap::Runtime>(transport);
  }

  // Attaches `peer` at --listen, its address book entry, or an ephemeral port.
  void host(a3ap::Peer& peer, const std::string& listen) {
    if (!listen.empty()) {
      addresses.set(peer.party(), transport::EndpointAddr::parse(listen));
    } else if (!addresses.find(peer.party())) {
      addresses.set(peer.party(), transport::EndpointAddr::socket("127.0.0.1", 0));
    }
    peer.attach();
    runtime->add(peer);
    hosted.push_back(&peer);
    std::cerr << peer.party() << " listening on " << addresses.resolve(peer.party()).str() << '\n';
  }

  bool run_until(const std::function<bool()>& done, std::int64_t wall_ms) {
    return runtime->run_until([&] { return g_stop.load() || done(); }, std::numeric_limits<std::size_t>::max(),
                              std::chrono::milliseconds(wall_ms));
  }

  // Serves until interrupted or for run_for_ms.
  void serve(std::int64_t run_for_ms) {
    auto limit = run_for_ms > 0 ? run_for_ms : std::int64_t{1} << 40;
    run_until([] { return false; }, limit);
    for (auto* p : hosted) {
      for (const auto& f : p->faults()) std::cerr << p->party() << ": " << f.what() << '\n';
    }
  }

  ~Node() {
    for (auto* p : hosted) p->detach();
  }
};

int cmd_run(const std::string& scenario, std::optional<std::uint64_t> seed, const std::string& out,
            std::optional<std::string> transport_name, bool interactive) {
  auto cfg = harness::ScenarioConfig::load(scenario);
  if (seed) cfg.seed = *seed;
  harness::RunOptions opts;
  opts.transport = transport_name;
  if (interactive) {
    opts.ask = [](const Value& prompt) -> Value {
      std::cerr << "prompt: " << prompt.dump() << "\nanswer (JSON): " << std::flush;
      std::string line;
      std::getline(std::cin, line);
      return core::canonical_decode(line);
    };
  }
  auto t = harness::run(cfg, opts);
  if (!out.empty()) t.save(out);
  Value summary = {{"scenario", t.scenario},
                   {"seed", t.seed},
                   {"transport", t.transport},
                   {"status", t.status},
                   {"steps", t.steps},
                   {"messages", t.events.size()},
                   {"transcript_hash", t.transcript_hash}};
  if (!t.completed()) summary["failure"] = t.failure;
  else summary["report"] = t.report;
  print(summary);
  return t.completed() ? 0 : 1;
}

int cmd_replay(const std::string& file) {
  auto v = harness::replay_file(file);
  print(v.to_value());
  return v.clean() ? 0 : 1;
}

int cmd_keygen(const std::string& out, const std::string& scenario, std::optional<std::uint64_t> seed) {
  if (!scenario.empty()) {
    auto cfg = harness::ScenarioConfig::load(scenario);
    if (seed) cfg.seed = *seed;
    auto d = harness::Deployment::derive(cfg);
    d.write_key_dir(out);
    for (const auto& party : d.parties) std::cout << party << ' ' << a3ap::to_hex(d.keys.at(party).public_key()) << '\n';
    return 0;
  }
  auto ids = seed ? core::IdSource::seeded(*seed, "keygen") : core::IdSource::random();
  auto kp = a3ap::KeyPair::generate(ids);
  a3ap::write_key_file(out, kp);
  std::cout << a3ap::to_hex(kp.public_key()) << '\n';
  return 0;
}

int cmd_invoice(const std::string& file, const std::string& payer, std::optional<std::string> ppt,
                std::optional<std::string> ppc) {
  auto doc = read_json(file);
  a3ap::Ledger ledger;
  a3ap::BillingPolicy billing;
  if (doc.is_object() && doc.contains("ledger")) {  // a transcript
    ledger = a3ap::Ledger::from_value(doc.at("ledger"));
    if (doc.contains("config") && doc.at("config").contains("billing")) {
      billing = a3ap::BillingPolicy::from_value(doc.at("config").at("billing"));
    }
  } else {
    ledger = a3ap::Ledger::from_value(doc);
  }
  if (ppt) billing.price_per_token = a3ap::Amount::parse(*ppt);
  if (ppc) billing.price_per_call = a3ap::Amount::parse(*ppc);
  std::cout << a3ap::invoice(ledger, billing, payer).str() << '\n';
  return 0;
}

int cmd_registry(const NodeOptions& o, const std::string& path_text, const std::string& snapshot) {
  Node node(o);
  auto path = core::split_path(path_text);
  if (std::find(node.config.registries.begin(), node.config.registries.end(), path) == node.config.registries.end()) {
    throw Error(Errc::ConfigError, "registry " + path_text + " is not part of the scenario");
  }
  auto reg = harness::make_registry_node(node.config, path, node.deployment.trust);
  if (!snapshot.empty() && std::filesystem::exists(snapshot)) reg->load(snapshot);
  auto id = harness::registry_party(path);
  arp::RegistryService service(*node.fabric, node.deployment.credential(id), node.deployment.key_pair(id), *reg);
  node.host(service, o.listen);
  node.serve(o.run_for_ms);
  if (!snapshot.empty()) reg->save(snapshot);
  return 0;
}

int cmd_discovery(const NodeOptions& o) {
  Node node(o);
  auto discovery = harness::make_discovery(node.config, *node.fabric, node.deployment);
  node.host(*discovery, o.listen);
  discovery->start();
  if (node.run_until([&] { return discovery->synced(); }, o.timeout_ms)) {
    std::cerr << "synced " << discovery->catalog().size() << " records\n";
  } else {
    std::cerr << "initial sync incomplete\n";
  }
  node.serve(o.run_for_ms);
  return 0;
}

int cmd_toolmgr(const NodeOptions& o) {
  Node node(o);
  atp::ConnectorRegistry connectors;
  a3ap::Ledger ledger;
  auto tools = harness::make_tool_manager(node.config, connectors);
  auto service = harness::make_tool_service(node.config, *node.fabric, node.deployment, *tools, ledger);
  node.host(*service, o.listen);
  node.serve(o.run_for_ms);
  print(ledger.to_value());
  return 0;
}

const harness::AgentSpec& roster_entry(const harness::ScenarioConfig& cfg, const std::string& name) {
  for (const auto& a : cfg.agents) {
    if (a.principal.name == name || a.principal.agent_id().str() == name) return a;
  }
  throw Error(Errc::NotFound, "no roster agent '" + name + "' in the scenario");
}

// Sends one request from `from` and waits for the correlated answer.
std::optional<core::Envelope> request(Node& node, Probe& from, core::Protocol protocol, const std::string& type,
                                      const std::string& to, const Value& payload, std::int64_t timeout_ms) {
  auto sent = from.send(protocol, type, to, payload);
  std::optional<core::Envelope> answer;
  node.run_until(
      [&] {
        for (const auto& env : from.inbox) {
          if (env.correlation_id && *env.correlation_id == sent.msg_id) answer = env;
        }
        return answer.has_value();
      },
      timeout_ms);
  return answer;
}

int cmd_register(const NodeOptions& o, const std::string& name, const std::string& descriptor_file) {
  Node node(o);
  auto spec = roster_entry(node.config, name);
  if (!descriptor_file.empty()) spec.descriptor = read_json(descriptor_file);
  auto id = spec.principal.agent_id().str();
  Probe agent(*node.fabric, node.deployment.credential(id), node.deployment.key_pair(id));
  node.host(agent, o.listen);
  auto [registry, payload] = harness::registration(node.config, node.deployment, spec);
  auto answer = request(node, agent, core::Protocol::ARP, "register_request", registry, payload, o.timeout_ms);
  if (!answer) throw Error(Errc::Timeout, "no register_result from " + registry);
  print(answer->payload);
  return answer->payload.contains("result") ? 0 : 1;
}

int cmd_discover(const NodeOptions& o, const std::vector<std::string>& require, const std::string& text,
                 std::size_t limit) {
  Node node(o);
  auto id = node.config.personal_agent.agent_id().str();
  Probe pa(*node.fabric, node.deployment.credential(id), node.deployment.key_pair(id));
  node.host(pa, o.listen);
  Value payload = {{"limit", limit}};
  if (!require.empty()) {
    payload["query"] = {{"required", require}, {"limit", limit}};
  } else {
    payload["text"] = text;
  }
  auto answer = request(node, pa, core::Protocol::ADP, "discover_request", node.config.discovery_id, payload,
                        o.timeout_ms);
  if (!answer) throw Error(Errc::Timeout, "no discover_result from " + node.config.discovery_id);
  print(answer->payload);
  return answer->payload.contains("error") ? 1 : 0;
}

// Hosts one roster agent (registering it first), the personal agent, or the
// user (which submits the scenario goal and exits with the outcome).
int cmd_agent(const NodeOptions& o, const std::string& name) {
  Node node(o);
  const auto& cfg = node.config;
  if (name == cfg.user.name || name == cfg.user.agent_id().str()) {
    auto id = cfg.user.agent_id().str();
    aip::UserAgent user(*node.fabric, node.deployment.credential(id), node.deployment.key_pair(id),
                        cfg.personal_agent.agent_id().str(), cfg.replies);
    node.host(user, o.listen);
    user.request(aip::Goal::from_value(cfg.goal), cfg.task_id);
    auto limit = o.run_for_ms > 0 ? o.run_for_ms : 60000;
    node.run_until([&] { return user.report().has_value(); }, limit);
    if (!user.report()) throw Error(Errc::Timeout, "no task report");
    print(*user.report());
    return user.report()->value("status", std::string{}) == "completed" ? 0 : 1;
  }
  if (name == cfg.personal_agent.name || name == cfg.personal_agent.agent_id().str()) {
    auto pa = harness::make_personal_agent(cfg, *node.fabric, node.deployment, o.timeout_ms);
    node.host(*pa, o.listen);
    node.serve(o.run_for_ms);
    return 0;
  }
  const auto& spec = roster_entry(cfg, name);
  auto worker = harness::make_worker(cfg, *node.fabric, node.deployment, spec);
  node.host(*worker, o.listen);
  auto [registry, payload] = harness::registration(cfg, node.deployment, spec);
  auto sent = worker->send(core::Protocol::ARP, "register_request", registry, payload);
  std::cerr << worker->party() << " registering with " << registry << " (" << sent.msg_id.hex() << ")\n";
  node.serve(o.run_for_ms);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent collaboration protocols: scenario runner, replay verifier and live services"};
  app.require_subcommand(1);

  std::string scenario, out, file, payer, path, name, snapshot, text;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> transport_name, ppt, ppc;
  bool interactive = false;
  std::vector<std::string> require;
  std::size_t limit = 5;
  NodeOptions node;

  auto* run = app.add_subcommand("run", "Run a scenario and write its transcript");
  run->add_option("--scenario", scenario, "Scenario file (.toml or .json)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--out", out, "Transcript output file");
  run->add_option("--transport", transport_name, "sim or socket")->check(CLI::IsMember({"sim", "socket"}));
  run->add_flag("--interactive", interactive, "Answer user prompts on stdin");

  auto* replay = app.add_subcommand("replay", "Verify a transcript offline");
  replay->add_option("transcript", file, "Transcript file")->required();

  auto* keygen = app.add_subcommand("keygen", "Generate a key file, or every key of a scenario");
  keygen->add_option("--out", out, "Key file, or directory with --scenario")->required();
  keygen->add_option("--scenario", scenario, "Write the scenario's keys instead")->check(CLI::ExistingFile);
  keygen->add_option("--seed", seed, "Reproducible keys from this seed");

  auto* invoice = app.add_subcommand("invoice", "Price a payer's usage");
  invoice->add_option("--ledger", file, "Ledger or transcript file")->required()->check(CLI::ExistingFile);
  invoice->add_option("--payer", payer, "Payer principal")->required();
  invoice->add_option("--price-per-token", ppt, "Decimal token price");
  invoice->add_option("--price-per-call", ppc, "Decimal call price");

  auto* registry = app.add_subcommand("registry", "Serve one registry node");
  add_node_options(registry, node);
  registry->add_option("--path", path, "Registry path, e.g. root/cn")->required();
  registry->add_option("--snapshot", snapshot, "Load on start (if present) and save on exit");

  auto* discovery = app.add_subcommand("discovery", "Serve the discovery index");
  add_node_options(discovery, node);

  auto* toolmgr = app.add_subcommand("toolmgr", "Serve the tool manager");
  add_node_options(toolmgr, node);

  auto* agent = app.add_subcommand("agent", "Host a roster agent, the personal agent or the user");
  add_node_options(agent, node);
  agent->add_option("--name", name, "Principal name or id")->required();

  auto* reg = app.add_subcommand("register", "Register a roster agent once");
  add_node_options(reg, node);
  reg->add_option("--name", name, "Roster agent name or id")->required();
  reg->add_option("--file", file, "Capability descriptor (JSON); default: the scenario's")->check(CLI::ExistingFile);

  auto* discover = app.add_subcommand("discover", "Query the discovery index as the personal agent");
  add_node_options(discover, node);
  discover->add_option("--require", require, "Required capability tag (repeatable)");
  discover->add_option("--text", text, "Free-text query");
  discover->add_option("--limit", limit, "Maximum results");

  CLI11_PARSE(app, argc, argv);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*run) return cmd_run(scenario, seed, out, transport_name, interactive);
    if (*replay) return cmd_replay(file);
    if (*keygen) return cmd_keygen(out, scenario, seed);
    if (*invoice) return cmd_invoice(file, payer, ppt, ppc);
    if (*registry) return cmd_registry(node, path, snapshot);
    if (*discovery) return cmd_discovery(node);
    if (*toolmgr) return cmd_toolmgr(node);
    if (*agent) return cmd_agent(node, name);
    if (*reg) return cmd_register(node, name, file);
    if (*discover) return cmd_discover(node, require, text, limit);
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.code()) << ": " << e.detail() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
