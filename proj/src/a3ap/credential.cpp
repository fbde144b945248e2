#include "acp/a3ap/credential.hpp"

#include "acp/core/error.hpp"

namespace acp::a3ap {
namespace {

core::Value unsigned_fields(const Credential& c) {
  return {
      {"agent", c.agent},
      {"owner_id", c.owner_id},
      {"public_key", to_hex(c.public_key)},
      {"issued_at", c.issued_at},
      {"authority", c.authority},
  };
}

Credential sign_with(Credential c, const Authority& authority) {
  c.authority = authority.id.str();
  c.authority_signature = authority.keys.sign_hex(c.signing_bytes());
  return c;
}

}  // namespace

std::string Credential::signing_bytes() const { return core::canonical_encode(unsigned_fields(*this)); }

core::Value Credential::to_value() const {
  auto v = unsigned_fields(*this);
  v["authority_signature"] = authority_signature;
  return v;
}

Credential Credential::from_value(const core::Value& v) {
  try {
    Credential c;
    c.agent = v.at("agent").get<std::string>();
    c.owner_id = v.at("owner_id").get<std::string>();
    c.public_key = public_key_from_hex(v.at("public_key").get<std::string>());
    c.issued_at = v.at("issued_at").get<std::int64_t>();
    c.authority = v.at("authority").get<std::string>();
    c.authority_signature = v.at("authority_signature").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed credential: ") + e.what());
  }
}

std::optional<PublicKey> TrustStore::find(const std::string& authority) const {
  auto it = roots_.find(authority);
  if (it == roots_.end()) return std::nullopt;
  return it->second;
}

Credential issue_credential(const std::string& owner_id, const std::string& agent_name,
                            const PublicKey& agent_key, const Authority& authority,
                            std::int64_t issued_at) {
  if (owner_id.empty()) throw Error(Errc::BadName, "owner_id must be non-empty");
  if (!core::is_valid_segment(agent_name)) throw Error(Errc::BadName, "invalid agent name '" + agent_name + "'");
  if (authority.registry_path.empty()) throw Error(Errc::BadName, "authority has no registry path");
  Credential c;
  c.agent = core::AgentId{authority.registry_path, agent_name}.str();
  c.owner_id = owner_id;
  c.public_key = agent_key;
  c.issued_at = issued_at;
  return sign_with(std::move(c), authority);
}

Credential issue_service_credential(const std::string& owner_id, const core::ServiceId& service,
                                    const PublicKey& service_key, const Authority& authority,
                                    std::int64_t issued_at) {
  if (owner_id.empty()) throw Error(Errc::BadName, "owner_id must be non-empty");
  Credential c;
  c.agent = service.str();
  c.owner_id = owner_id;
  c.public_key = service_key;
  c.issued_at = issued_at;
  return sign_with(std::move(c), authority);
}

bool verify_credential(const Credential& credential, const TrustStore& trust) noexcept {
  if (credential.owner_id.empty()) return false;
  auto root = trust.find(credential.authority);
  if (!root) return false;
  try {
    return verify_signature_hex(*root, credential.signing_bytes(), credential.authority_signature);
  } catch (...) {
    return false;
  }
}

}  // namespace acp::a3ap
