#include "acp/harness/scenario.hpp"

#include "acp/harness/deployment.hpp"

#include "acp/a3ap/credential.hpp"
#include "acp/a3ap/ledger.hpp"
#include "acp/a3ap/peer.hpp"
#include "acp/adp/discovery_service.hpp"
#include "acp/aip/personal_agent.hpp"
#include "acp/aip/script.hpp"
#include "acp/aip/worker_agent.hpp"
#include "acp/arp/registry_service.hpp"
#include "acp/atp/tool_service.hpp"
#include "acp/core/crypto.hpp"
#include "acp/core/error.hpp"
#include "acp/transport/sim_bus.hpp"
#include "acp/transport/socket_transport.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace acp::harness {
namespace {

using core::Value;

Value event_value(const transport::BusEvent& ev) {
  return {{"seq", ev.seq}, {"at", ev.delivered_at}, {"to", ev.to}, {"envelope", ev.envelope.to_value()}};
}

transport::BusEvent event_from(const Value& v) {
  transport::BusEvent ev;
  ev.seq = v.at("seq").get<std::uint64_t>();
  ev.delivered_at = v.at("at").get<std::int64_t>();
  ev.to = v.at("to").get<std::string>();
  ev.envelope = core::Envelope::from_value(v.at("envelope"));
  return ev;
}

// All principals of one run, wired to one transport.
struct World {
  std::unique_ptr<transport::Transport> transport;
  transport::AddressBook addresses;
  Deployment deployment;
  a3ap::KeyRing keys;
  std::unique_ptr<a3ap::Fabric> fabric;
  std::unique_ptr<a3ap::Runtime> runtime;

  struct Registry {
    std::unique_ptr<arp::RegistryNode> node;
    std::unique_ptr<arp::RegistryService> service;
  };
  std::map<std::vector<std::string>, Registry> registries;
  std::unique_ptr<adp::DiscoveryService> discovery;
  atp::ConnectorRegistry connectors;
  std::unique_ptr<atp::ToolManager> tools;
  a3ap::Ledger ledger;
  std::unique_ptr<atp::ToolService> tool_service;
  std::vector<std::unique_ptr<aip::WorkerAgent>> workers;
  std::unique_ptr<aip::PersonalAgent> personal;
  std::unique_ptr<aip::UserAgent> user;
  std::vector<a3ap::Peer*> peers;

  World(bool sockets, Deployment d)
      : addresses(sockets ? transport::EndpointAddr::Kind::Socket : transport::EndpointAddr::Kind::Sim),
        deployment(std::move(d)) {
    if (sockets) {
      transport = std::make_unique<transport::SocketTransport>();
    } else {
      transport = std::make_unique<transport::SimBus>();
    }
  }

  const a3ap::Credential& credential(const std::string& party) const { return deployment.credential(party); }
  const a3ap::KeyPair& key_pair(const std::string& party) const { return deployment.key_pair(party); }

  void host(a3ap::Peer& peer) {
    keys.add(peer.party(), peer.keys().public_key());
    if (addresses.find(peer.party()) == std::nullopt && transport->deterministic() == false) {
      addresses.set(peer.party(), transport::EndpointAddr::socket("127.0.0.1", 0));
    }
    peers.push_back(&peer);
  }

  void attach_all() {
    for (auto* p : peers) {
      p->attach();
      runtime->add(*p);
    }
  }
};

std::size_t count_type(const std::vector<transport::BusEvent>& events, std::string_view type) {
  std::size_t n = 0;
  for (const auto& ev : events) n += ev.envelope.msg_type == type;
  return n;
}

}  // namespace

std::vector<core::Envelope> Transcript::envelopes() const {
  std::vector<core::Envelope> out;
  out.reserve(events.size());
  for (const auto& ev : events) out.push_back(ev.envelope);
  return out;
}

Value Transcript::body() const {
  Value evs = Value::array();
  for (const auto& ev : events) evs.push_back(event_value(ev));
  Value trs = Value::array();
  for (const auto& [task, t] : transitions) {
    auto v = t.to_value();
    v["task_id"] = task;
    trs.push_back(v);
  }
  Value ph = Value::array();
  for (const auto& p : phases) ph.push_back({{"phase", p.phase}, {"name", p.name}, {"task_id", p.task_id}, {"at", p.at}});
  return {{"scenario", scenario}, {"seed", seed},          {"transport", transport}, {"config", config},
          {"events", evs},        {"transitions", trs},    {"phases", ph},           {"anchors", anchors},
          {"keys", keys},         {"ledger", ledger},      {"invoice", invoice},     {"report", report},
          {"status", status},     {"failure", failure},    {"faults", faults},       {"steps", steps}};
}

std::string Transcript::compute_hash() const { return core::to_hex(core::sha256(core::canonical_encode(body()))); }

Value Transcript::to_value() const {
  auto v = body();
  v["transcript_hash"] = transcript_hash;
  return v;
}

Transcript Transcript::from_value(const Value& v) {
  try {
    Transcript t;
    t.scenario = v.at("scenario").get<std::string>();
    t.seed = v.at("seed").get<std::uint64_t>();
    t.transport = v.at("transport").get<std::string>();
    t.config = v.value("config", Value::object());
    for (const auto& ev : v.at("events")) t.events.push_back(event_from(ev));
    for (const auto& tr : v.at("transitions")) {
      t.transitions.emplace_back(tr.at("task_id").get<std::string>(), aip::Transition::from_value(tr));
    }
    for (const auto& p : v.at("phases")) {
      t.phases.push_back({p.at("phase").get<int>(), p.at("name").get<std::string>(), p.at("task_id").get<std::string>(),
                          p.at("at").get<std::int64_t>()});
    }
    t.anchors = v.at("anchors");
    t.keys = v.at("keys");
    t.ledger = v.at("ledger");
    t.invoice = v.at("invoice");
    t.report = v.value("report", Value::object());
    t.status = v.at("status").get<std::string>();
    t.failure = v.value("failure", Value::object());
    t.faults = v.value("faults", Value::array());
    t.steps = v.value("steps", std::size_t{0});
    t.transcript_hash = v.value("transcript_hash", std::string{});
    return t;
  } catch (const Error& e) {
    throw Error(Errc::ParseError, "malformed transcript: " + e.detail());
  } catch (const std::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed transcript: ") + e.what());
  }
}

void Transcript::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(Errc::ConfigError, "cannot write " + file.string());
  out << core::canonical_encode(to_value()) << '\n';
}

Transcript Transcript::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::ParseError, "cannot read " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_value(core::canonical_decode(buf.str()));
}

Transcript run(const ScenarioConfig& cfg, const RunOptions& options) {
  cfg.validate();
  const auto transport_name = options.transport.value_or(cfg.transport);
  const bool sockets = transport_name == "socket";
  if (!sockets && transport_name != "sim") throw Error(Errc::ConfigError, "unknown transport '" + transport_name + "'");
  const std::int64_t timeout = sockets ? options.socket_timeout_ms : cfg.timeout;

  World w(sockets, Deployment::derive(cfg));
  w.fabric = std::make_unique<a3ap::Fabric>(
      a3ap::Fabric{*w.transport, w.addresses, w.keys, w.deployment.trust, cfg.seed, timeout});
  w.runtime = std::make_unique<a3ap::Runtime>(*w.transport);

  Transcript out;
  out.scenario = cfg.name;
  out.seed = cfg.seed;
  out.transport = transport_name;
  out.config = cfg.to_value();
  w.transport->set_observer([&out](const transport::BusEvent& ev) { out.events.push_back(ev); });

  for (const auto& path : cfg.registries) {
    World::Registry reg;
    reg.node = make_registry_node(cfg, path, w.deployment.trust);
    auto id = registry_party(path);
    reg.service = std::make_unique<arp::RegistryService>(*w.fabric, w.credential(id), w.key_pair(id), *reg.node);
    w.host(*reg.service);
    w.registries.emplace(path, std::move(reg));
  }
  w.discovery = make_discovery(cfg, *w.fabric, w.deployment);
  w.host(*w.discovery);
  w.tools = make_tool_manager(cfg, w.connectors);
  w.tool_service = make_tool_service(cfg, *w.fabric, w.deployment, *w.tools, w.ledger);
  w.host(*w.tool_service);

  std::vector<std::pair<std::string, Value>> registrations;  // registry, payload
  for (const auto& spec : cfg.agents) {
    registrations.push_back(registration(cfg, w.deployment, spec));
    w.workers.push_back(make_worker(cfg, *w.fabric, w.deployment, spec));
    w.host(*w.workers.back());
  }
  w.personal = make_personal_agent(cfg, *w.fabric, w.deployment, timeout);
  w.host(*w.personal);
  {
    auto id = cfg.user.agent_id().str();
    w.user = std::make_unique<aip::UserAgent>(*w.fabric, w.credential(id), w.key_pair(id), w.personal->party(),
                                              cfg.replies, options.ask);
    w.host(*w.user);
  }
  w.attach_all();

  const auto started = std::chrono::steady_clock::now();
  auto wall_left = [&] {
    auto used = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return std::max(std::chrono::milliseconds(0), options.max_wall - used);
  };
  auto steps_left = [&] { return cfg.max_steps > w.runtime->steps() ? cfg.max_steps - w.runtime->steps() : 0; };

  std::optional<Error> setup_error;
  // Roster registration, then the discovery server's initial sync.
  for (std::size_t i = 0; i < registrations.size(); ++i) {
    w.workers[i]->send(core::Protocol::ARP, "register_request", registrations[i].first, registrations[i].second);
  }
  bool registered = w.runtime->run_until(
      [&] { return count_type(out.events, "register_result") >= registrations.size(); }, steps_left(), wall_left());
  for (const auto& ev : out.events) {
    if (ev.envelope.msg_type == "register_result" && ev.envelope.payload.contains("error")) {
      setup_error = Error::from_value(ev.envelope.payload.at("error"));
    }
  }
  if (!registered && !setup_error) setup_error = Error(Errc::Timeout, "roster registration did not finish");
  if (!setup_error) {
    w.discovery->start();
    if (!w.runtime->run_until([&] { return w.discovery->synced(); }, steps_left(), wall_left())) {
      setup_error = Error(Errc::Timeout, "discovery did not sync");
    }
  }

  if (!setup_error) {
    w.user->request(aip::Goal::from_value(cfg.goal), cfg.task_id);
    w.runtime->run_until([&] { return w.user->report().has_value(); }, steps_left(), wall_left());
    // Let trailing traffic settle so the transcript is complete.
    w.runtime->run_until([&] { return !w.transport->has_pending(); }, std::min<std::size_t>(steps_left(), 100),
                         std::min(wall_left(), std::chrono::milliseconds(200)));
  }

  out.steps = w.runtime->steps();
  if (const auto* task = w.personal->task(cfg.task_id)) {
    for (const auto& t : task->transcript) out.transitions.emplace_back(task->task_id, t);
  }
  for (const auto& m : w.personal->phases()) {
    out.phases.push_back({static_cast<int>(m.phase), std::string(aip::to_string(m.phase)), m.task_id, m.at});
  }
  for (const auto& [path, reg] : w.registries) out.anchors[reg.service->party()] = reg.node->anchor().to_value();
  for (const auto& [party, key] : w.keys.entries()) out.keys[party] = a3ap::to_hex(key);
  out.ledger = w.ledger.to_value();
  for (const auto& payer : w.ledger.payers()) out.invoice[payer] = a3ap::invoice(w.ledger, cfg.billing, payer).str();
  for (const auto* p : w.peers) {
    for (const auto& f : p->faults()) out.faults.push_back({{"party", p->party()}, {"error", f.to_value()}});
  }
  out.report = w.user->report().value_or(Value::object());

  if (out.report.is_object() && out.report.value("status", std::string{}) == "completed") {
    out.status = "completed";
  } else {
    out.status = "failed";
    int phase = 0;
    for (const auto& p : out.phases) {
      if (p.task_id == cfg.task_id) phase = p.phase;
    }
    Value error = Value::object();
    if (setup_error) {
      error = setup_error->to_value();
    } else if (out.report.is_object() && out.report.contains("failure")) {
      error = out.report.at("failure");
    } else {
      error = Error(Errc::Timeout, "no task report within the step and time budget").to_value();
    }
    out.failure = {{"phase", phase}, {"error", error}};
  }
  out.transcript_hash = out.compute_hash();
  for (auto* p : w.peers) p->detach();
  w.transport->set_observer({});
  return out;
}

Transcript run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  auto t = run(config, options);
  if (!t.completed()) {
    auto phase = t.failure.value("phase", 0);
    auto cause = t.failure.value("error", Value::object());
    throw Error(Errc::ScenarioFailed,
                "scenario failed in phase " + std::to_string(phase) + ": " + cause.value("detail", std::string{}),
                {{"phase", phase}, {"cause", cause}, {"transcript", t.to_value()}});
  }
  return t;
}

}  // namespace acp::harness
