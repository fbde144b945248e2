#include "acp/core/envelope.hpp"

#include "acp/core/error.hpp"
#include "acp/core/ids.hpp"

#include <array>

namespace acp::core {
namespace {

struct CatalogEntry {
  Protocol protocol;
  std::string_view msg_type;
  MessageRole role;
};

using R = MessageRole;
constexpr std::array kCatalog{
    CatalogEntry{Protocol::ARP, "register_request", R::Request},
    CatalogEntry{Protocol::ARP, "register_result", R::Response},
    CatalogEntry{Protocol::ARP, "update_request", R::Request},
    CatalogEntry{Protocol::ARP, "deregister_request", R::Request},
    CatalogEntry{Protocol::ARP, "resolve_request", R::Request},
    CatalogEntry{Protocol::ARP, "resolve_result", R::Response},
    CatalogEntry{Protocol::ARP, "capability_event", R::Notice},
    CatalogEntry{Protocol::ADP, "discover_request", R::Request},
    CatalogEntry{Protocol::ADP, "discover_result", R::Response},
    CatalogEntry{Protocol::ADP, "capability_event", R::Notice},
    CatalogEntry{Protocol::ADP, "sync_request", R::Request},
    CatalogEntry{Protocol::ADP, "sync_snapshot", R::Response},
    CatalogEntry{Protocol::AIP, "task_request", R::Request},
    CatalogEntry{Protocol::AIP, "group_invite", R::Request},
    CatalogEntry{Protocol::AIP, "group_accept", R::Response},
    CatalogEntry{Protocol::AIP, "group_decline", R::Response},
    CatalogEntry{Protocol::AIP, "subtask_assign", R::Request},
    CatalogEntry{Protocol::AIP, "subtask_accept", R::Response},
    CatalogEntry{Protocol::AIP, "subtask_reject", R::Response},
    CatalogEntry{Protocol::AIP, "subtask_start", R::Notice},
    CatalogEntry{Protocol::AIP, "negotiate", R::Notice},
    CatalogEntry{Protocol::AIP, "user_prompt", R::Request},
    CatalogEntry{Protocol::AIP, "user_reply", R::Response},
    CatalogEntry{Protocol::AIP, "subtask_result", R::Notice},
    CatalogEntry{Protocol::AIP, "task_report", R::Notice},
    CatalogEntry{Protocol::ATP, "tool_register", R::Request},
    CatalogEntry{Protocol::ATP, "tool_lookup", R::Request},
    CatalogEntry{Protocol::ATP, "tool_invoke", R::Request},
    CatalogEntry{Protocol::ATP, "tool_result", R::Response},
    CatalogEntry{Protocol::ATP, "resource_attach", R::Request},
    CatalogEntry{Protocol::ATP, "workflow_submit", R::Request},
    CatalogEntry{Protocol::ATP, "workflow_status", R::Notice},
    CatalogEntry{Protocol::A3AP, "hello", R::Request},
    CatalogEntry{Protocol::A3AP, "auth_response", R::Response},
    CatalogEntry{Protocol::A3AP, "auth_confirm", R::Response},
    CatalogEntry{Protocol::A3AP, "auth_established", R::Response},
    CatalogEntry{Protocol::A3AP, "usage_report", R::Notice},
};

}  // namespace

std::string_view to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::ARP: return "ARP";
    case Protocol::ADP: return "ADP";
    case Protocol::AIP: return "AIP";
    case Protocol::ATP: return "ATP";
    case Protocol::A3AP: return "A3AP";
  }
  return "?";
}

Protocol protocol_from_string(std::string_view s) {
  for (auto p : {Protocol::ARP, Protocol::ADP, Protocol::AIP, Protocol::ATP, Protocol::A3AP}) {
    if (to_string(p) == s) return p;
  }
  throw Error(Errc::ParseError, "unknown protocol '" + std::string(s) + "'");
}

std::optional<MessageRole> catalog_role(Protocol p, std::string_view msg_type) noexcept {
  for (const auto& e : kCatalog) {
    if (e.protocol == p && e.msg_type == msg_type) return e.role;
  }
  return std::nullopt;
}

Value Envelope::to_value(bool include_signature) const {
  Value v = {
      {"protocol", std::string(to_string(protocol))},
      {"version", version},
      {"msg_type", msg_type},
      {"msg_id", msg_id.hex()},
      {"sender", sender},
      {"recipient", recipient},
      {"timestamp", timestamp},
      {"payload", payload},
  };
  if (correlation_id) v["correlation_id"] = correlation_id->hex();
  if (include_signature) v["signature"] = signature;
  return v;
}

Envelope Envelope::from_value(const Value& v) {
  try {
    Envelope env;
    env.protocol = protocol_from_string(v.at("protocol").get<std::string>());
    env.version = v.at("version").get<std::string>();
    env.msg_type = v.at("msg_type").get<std::string>();
    env.msg_id = MessageId::from_hex(v.at("msg_id").get<std::string>());
    if (v.contains("correlation_id")) {
      env.correlation_id = MessageId::from_hex(v.at("correlation_id").get<std::string>());
    }
    env.sender = v.at("sender").get<std::string>();
    env.recipient = v.at("recipient").get<std::string>();
    env.timestamp = v.at("timestamp").get<std::int64_t>();
    env.payload = v.at("payload");
    env.signature = v.value("signature", std::string{});
    return env;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed envelope: ") + e.what());
  }
}

std::string Envelope::signing_bytes() const { return canonical_encode(to_value(false)); }

std::string Envelope::encode() const { return canonical_encode(to_value(true)); }

Envelope Envelope::decode(std::string_view text) { return from_value(canonical_decode(text)); }

ValidationReport validate_envelope(const Envelope& env) {
  ValidationReport r;
  if (env.version != kProtocolVersion) r.add("version", "version", "expected 1.0");
  auto role = catalog_role(env.protocol, env.msg_type);
  if (!role) {
    r.add("msg_type", "catalog",
          std::string(to_string(env.protocol)) + "/" + env.msg_type + " is not in the catalog");
  } else if (*role == MessageRole::Request && env.correlation_id) {
    r.add("correlation_id", "request_uncorrelated", "requests carry no correlation id");
  } else if (*role == MessageRole::Response && !env.correlation_id) {
    r.add("correlation_id", "response_correlated", "responses must carry a correlation id");
  }
  if (env.msg_id.empty()) r.add("msg_id", "required");
  if (!is_agent_party(env.sender) && !is_service_party(env.sender)) r.add("sender", "party");
  if (!is_agent_party(env.recipient) && !is_service_party(env.recipient)) r.add("recipient", "party");
  if (!env.payload.is_object()) r.add("payload", "type", "payload must be a map");
  return r;
}

}  // namespace acp::core
