#include "acp/adp/discovery_service.hpp"

#include "acp/core/error.hpp"

#include <algorithm>

namespace acp::adp {

using core::Envelope;
using core::Protocol;
using core::Value;

DiscoveryService::DiscoveryService(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys,
                                   std::vector<std::string> registries, SynonymTable synonyms, ScoringWeights weights)
    : Peer(fabric, std::move(credential), std::move(keys)),
      registries_(std::move(registries)),
      synonyms_(std::move(synonyms)),
      weights_(weights) {}

void DiscoveryService::start() {
  for (const auto& r : registries_) send(Protocol::ADP, "sync_request", r, Value::object());
}

bool DiscoveryService::known_registry(const std::string& party) const {
  return std::find(registries_.begin(), registries_.end(), party) != registries_.end();
}

void DiscoveryService::handle(const Envelope& env) {
  if (env.msg_type == "capability_event") {
    if (!known_registry(env.sender)) throw Error(Errc::UnknownRegistry, "capability event from " + env.sender);
    if (catalog_.apply_event(env.payload)) ++events_applied_;
    return;
  }
  if (env.msg_type == "sync_snapshot") {
    if (!known_registry(env.sender)) throw Error(Errc::UnknownRegistry, "snapshot from " + env.sender);
    for (const auto& ev : env.payload.at("entries")) {
      if (catalog_.apply_event(ev)) ++events_applied_;
    }
    synced_.insert(env.sender);
    return;
  }
  if (env.msg_type == "discover_request") {
    try {
      const auto& p = env.payload.contains("query") ? env.payload.at("query") : env.payload;
      auto q = parse_query_payload(p, synonyms_);
      Value results = Value::array();
      for (const auto& m : discover(catalog_, q, weights_)) results.push_back(m.to_value());
      reply(env, "discover_result", {{"query", q.to_value()}, {"results", results}});
    } catch (const Error& e) {
      reply(env, "discover_result", {{"error", e.to_value()}});
    }
  }
}

}  // namespace acp::adp
