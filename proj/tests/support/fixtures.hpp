#pragma once
// Small wiring helpers for tests that need signed peers on a bus.

#include "acp/a3ap/credential.hpp"
#include "acp/a3ap/keys.hpp"
#include "acp/a3ap/peer.hpp"
#include "acp/core/descriptor.hpp"
#include "acp/core/envelope.hpp"
#include "acp/core/rng.hpp"
#include "acp/transport/sim_bus.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace acp::testing {

inline core::Envelope make_envelope(const std::string& sender, const std::string& recipient, core::Value payload,
                                    std::uint64_t n = 0) {
  core::Envelope env;
  env.protocol = core::Protocol::ADP;
  env.msg_type = "discover_request";
  env.msg_id = core::MessageId::from_parts(n, n * 7 + 1);
  env.sender = sender;
  env.recipient = recipient;
  env.payload = std::move(payload);
  return env;
}

// One trust domain on a sim bus: a root authority, shared key ring and
// address book, and deterministic key material.
struct World {
  transport::SimBus bus;
  transport::AddressBook addresses;
  a3ap::KeyRing keys;
  a3ap::TrustStore trust;
  core::IdSource ids = core::IdSource::seeded(42, "world");
  a3ap::Authority authority{core::parse_service_id("svc://registry/root"), {"root"}, a3ap::KeyPair::generate(ids)};
  a3ap::Fabric fabric{bus, addresses, keys, trust, 42, 50};
  a3ap::Runtime runtime{bus};

  World() { trust.add(authority.id.str(), authority.keys.public_key()); }

  struct Identity {
    a3ap::Credential credential;
    a3ap::KeyPair keys;
  };

  Identity agent(const std::string& name, const std::string& owner = "owner-1") {
    auto kp = a3ap::KeyPair::generate(ids);
    return {a3ap::issue_credential(owner, name, kp.public_key(), authority, 0), kp};
  }

  // Agent whose credential is issued by the registry at `path`; that
  // registry becomes a trusted authority.
  Identity agent_at(const std::vector<std::string>& path, const std::string& name,
                    const std::string& owner = "owner-1") {
    auto key = core::join_path(path);
    auto it = sub_authorities.find(key);
    if (it == sub_authorities.end()) {
      a3ap::Authority a{core::ServiceId{"registry", path}, path, a3ap::KeyPair::generate(ids)};
      trust.add(a.id.str(), a.keys.public_key());
      it = sub_authorities.emplace(key, std::move(a)).first;
    }
    auto kp = a3ap::KeyPair::generate(ids);
    return {a3ap::issue_credential(owner, name, kp.public_key(), it->second, 0), kp};
  }

  std::map<std::string, a3ap::Authority> sub_authorities;

  Identity service(const std::string& id, const std::string& owner = "operator") {
    auto kp = a3ap::KeyPair::generate(ids);
    return {a3ap::issue_service_credential(owner, core::parse_service_id(id), kp.public_key(), authority, 0), kp};
  }
};

inline core::CapabilityDescriptor descriptor_for(const std::string& agent, std::set<std::string> tags,
                                                std::int64_t version = 1) {
  core::CapabilityDescriptor d;
  d.agent = core::parse_agent_id(agent);
  d.capability_tags = std::move(tags);
  d.version = version;
  return d;
}

// Peer that records everything handed to handle().
class RecordingPeer : public a3ap::Peer {
 public:
  RecordingPeer(a3ap::Fabric& fabric, World::Identity id) : Peer(fabric, std::move(id.credential), id.keys) {}

  std::vector<core::Envelope> received;

 protected:
  void handle(const core::Envelope& env) override { received.push_back(env); }
};

}  // namespace acp::testing
