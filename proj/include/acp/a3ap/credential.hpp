#pragma once

#include "acp/a3ap/keys.hpp"
#include "acp/core/ids.hpp"
#include "acp/core/value.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace acp::a3ap {

// Identity bound to an owner and vouched for by an authority (a registry).
// `agent` is the subject principal: an AgentId for agents, a ServiceId for
// services that take part in handshakes.
struct Credential {
  std::string agent;
  std::string owner_id;
  PublicKey public_key{};
  std::int64_t issued_at = 0;
  std::string authority;
  std::string authority_signature;  // hex, over signing_bytes()

  std::string signing_bytes() const;
  core::Value to_value() const;
  static Credential from_value(const core::Value& v);  // throws Error(ParseError)
};

// An issuing registry: its service id, registry path and signing keys.
struct Authority {
  core::ServiceId id;
  std::vector<std::string> registry_path;
  KeyPair keys;
};

// Statically configured authority roots.
class TrustStore {
 public:
  void add(const std::string& authority, const PublicKey& key) { roots_[authority] = key; }
  std::optional<PublicKey> find(const std::string& authority) const;
  const std::map<std::string, PublicKey>& roots() const noexcept { return roots_; }

 private:
  std::map<std::string, PublicKey> roots_;
};

// AgentId = authority registry path + agent_name. Throws Error(BadName) for
// an empty owner or an invalid name segment.
Credential issue_credential(const std::string& owner_id, const std::string& agent_name,
                            const PublicKey& agent_key, const Authority& authority,
                            std::int64_t issued_at);

Credential issue_service_credential(const std::string& owner_id, const core::ServiceId& service,
                                    const PublicKey& service_key, const Authority& authority,
                                    std::int64_t issued_at);

bool verify_credential(const Credential& credential, const TrustStore& trust) noexcept;

}  // namespace acp::a3ap
