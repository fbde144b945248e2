#pragma once

#include "acp/a3ap/peer.hpp"
#include "acp/arp/registry_node.hpp"

#include <set>

namespace acp::arp {

// Request payload builders shared by clients, the CLI and the harness.
core::Value register_payload(const a3ap::Credential& credential, const core::CapabilityDescriptor& descriptor);
core::Value update_payload(const core::CapabilityDescriptor& descriptor);
core::Value deregister_payload(const core::AgentId& agent);
core::Value resolve_payload(const core::AgentId& agent);

// A registry node reachable over the transport.
//   register_request / update_request / deregister_request -> register_result
//     {op, result} or {op, error}
//   resolve_request {agent, hops[, origin, origin_msg_id]} is answered with
//     resolve_result {agent, hops, record | error} sent to the origin, or
//     forwarded to the child/parent named by the routing rule.
//   sync_request subscribes the sender to capability_event notices and is
//     answered with sync_snapshot {registry, entries}.
class RegistryService : public a3ap::Peer {
 public:
  RegistryService(a3ap::Fabric& fabric, a3ap::Credential credential, a3ap::KeyPair keys, RegistryNode& node);

  RegistryNode& node() noexcept { return node_; }
  void subscribe(const std::string& party) { subscribers_.insert(party); }
  const std::set<std::string>& subscribers() const noexcept { return subscribers_; }

  // Phase events of every registration attempt, in order.
  void set_phase_observer(std::function<void(const core::AgentId&, const PhaseEvent&)> observer) {
    phase_observer_ = std::move(observer);
  }
  std::size_t events_emitted() const noexcept { return events_emitted_; }

 protected:
  void handle(const core::Envelope& env) override;
  std::optional<a3ap::PublicKey> sender_key(const core::Envelope& env) const override;

 private:
  void on_register(const core::Envelope& env);
  void on_update(const core::Envelope& env);
  void on_deregister(const core::Envelope& env);
  void on_resolve(const core::Envelope& env);
  void on_sync(const core::Envelope& env);
  void publish(const core::Value& event);

  RegistryNode& node_;
  std::set<std::string> subscribers_;
  std::function<void(const core::AgentId&, const PhaseEvent&)> phase_observer_;
  std::size_t events_emitted_ = 0;
};

// capability_event payload for a record change.
core::Value capability_event(const std::string& registry, const AgentRecord& record);

}  // namespace acp::arp
