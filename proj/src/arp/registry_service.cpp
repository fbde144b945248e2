#include "acp/arp/registry_service.hpp"

#include "acp/core/error.hpp"

namespace acp::arp {

using core::Envelope;
using core::Protocol;
using core::Value;

Value register_payload(const a3ap::Credential& credential, const core::CapabilityDescriptor& descriptor) {
  return {{"credential", credential.to_value()}, {"descriptor", descriptor.to_value()}};
}

Value update_payload(const core::CapabilityDescriptor& descriptor) { return {{"descriptor", descriptor.to_value()}}; }

Value deregister_payload(const core::AgentId& agent) { return {{"agent", agent.str()}}; }

Value resolve_payload(const core::AgentId& agent) { return {{"agent", agent.str()}, {"hops", 0}}; }

Value capability_event(const std::string& registry, const AgentRecord& record) {
  Value v{{"registry", registry},
          {"agent", record.agent().str()},
          {"version", record.descriptor.version},
          {"kind", record.status == RecordStatus::Active ? "upsert" : "delete"}};
  if (record.status == RecordStatus::Active) v["descriptor"] = record.descriptor.to_value();
  return v;
}

RegistryService::RegistryService(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys,
                                 RegistryNode& node)
    : Peer(fabric, std::move(credential), std::move(keys)), node_(node) {}

std::optional<a3ap::PublicKey> RegistryService::sender_key(const Envelope& env) const {
  if (env.msg_type == "register_request") {
    // Checked against the embedded credential; the authority signature on
    // that credential is verified during identity verification.
    try {
      return a3ap::Credential::from_value(env.payload.at("credential")).public_key;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  if (env.msg_type == "update_request" || env.msg_type == "deregister_request") {
    try {
      if (auto rec = node_.find(core::parse_agent_id(env.sender))) return rec->credential.public_key;
    } catch (const Error&) {
    }
  }
  return Peer::sender_key(env);
}

void RegistryService::handle(const Envelope& env) {
  if (env.msg_type == "register_request") return on_register(env);
  if (env.msg_type == "update_request") return on_update(env);
  if (env.msg_type == "deregister_request") return on_deregister(env);
  if (env.msg_type == "resolve_request") return on_resolve(env);
  if (env.msg_type == "sync_request") return on_sync(env);
}

void RegistryService::publish(const Value& event) {
  for (const auto& sub : subscribers_) {
    send(Protocol::ARP, "capability_event", sub, event);
    ++events_emitted_;
  }
}

void RegistryService::on_register(const Envelope& env) {
  core::AgentId subject;
  try {
    subject = core::parse_agent_id(env.sender);
  } catch (const Error&) {
  }
  auto observer = [&](const PhaseEvent& e) {
    if (phase_observer_) phase_observer_(subject, e);
  };
  try {
    auto result = node_.register_agent(env, now(), observer);
    reply(env, "register_result", {{"op", "register"}, {"result", result.to_value()}});
    publish(capability_event(party(), *node_.find(result.agent)));
  } catch (const Error& e) {
    reply(env, "register_result", {{"op", "register"}, {"error", e.to_value()}});
  }
}

void RegistryService::on_update(const Envelope& env) {
  try {
    auto desc = core::CapabilityDescriptor::from_value(env.payload.at("descriptor"));
    auto result = node_.update_capabilities(env.sender, desc, now());
    reply(env, "register_result", {{"op", "update"}, {"result", result.to_value()}});
    publish(capability_event(party(), *node_.find(result.agent)));
  } catch (const Error& e) {
    reply(env, "register_result", {{"op", "update"}, {"error", e.to_value()}});
  } catch (const std::exception& e) {
    Error err(Errc::DescriptorInvalid, std::string("malformed update: ") + e.what());
    reply(env, "register_result", {{"op", "update"}, {"error", err.to_value()}});
  }
}

void RegistryService::on_deregister(const Envelope& env) {
  try {
    auto agent = core::parse_agent_id(env.payload.at("agent").get<std::string>());
    auto result = node_.deregister(env.sender, agent, now());
    reply(env, "register_result", {{"op", "deregister"}, {"result", result.to_value()}});
    publish(capability_event(party(), *node_.find(agent)));
  } catch (const Error& e) {
    reply(env, "register_result", {{"op", "deregister"}, {"error", e.to_value()}});
  } catch (const std::exception& e) {
    Error err(Errc::ParseError, std::string("malformed deregister request: ") + e.what());
    reply(env, "register_result", {{"op", "deregister"}, {"error", err.to_value()}});
  }
}

void RegistryService::on_resolve(const Envelope& env) {
  const auto& p = env.payload;
  const std::string origin = p.contains("origin") ? p.at("origin").get<std::string>() : env.sender;
  const auto origin_id =
      p.contains("origin_msg_id") ? core::MessageId::from_hex(p.at("origin_msg_id").get<std::string>()) : env.msg_id;
  const std::int64_t hops = p.value("hops", std::int64_t{0});
  const std::string agent_text = p.value("agent", std::string{});
  Value out{{"agent", agent_text}, {"hops", hops}, {"resolved_by", party()}};
  try {
    auto agent = core::parse_agent_id(agent_text);
    auto route = node_.route(agent);
    if (auto* rec = std::get_if<AgentRecord>(&route)) {
      out["record"] = rec->to_value();
    } else {
      const auto& next = std::holds_alternative<ForwardToChild>(route) ? std::get<ForwardToChild>(route).service
                                                                       : std::get<ForwardToParent>(route).service;
      send(Protocol::ARP, "resolve_request", next,
           {{"agent", agent_text}, {"hops", hops + 1}, {"origin", origin}, {"origin_msg_id", origin_id.hex()}});
      return;
    }
  } catch (const Error& e) {
    out["error"] = e.to_value();
  }
  send(Protocol::ARP, "resolve_result", origin, std::move(out), origin_id);
}

void RegistryService::on_sync(const Envelope& env) {
  subscribe(env.sender);
  Value entries = Value::array();
  for (const auto& rec : node_.records()) {
    if (rec.status != RecordStatus::Active) continue;
    entries.push_back(capability_event(party(), rec));
  }
  reply(env, "sync_snapshot", {{"registry", party()}, {"entries", entries}});
}

}  // namespace acp::arp
