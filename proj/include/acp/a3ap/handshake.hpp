#pragma once

#include "acp/a3ap/credential.hpp"
#include "acp/core/crypto.hpp"
#include "acp/core/envelope.hpp"

#include <optional>
#include <string>
#include <vector>

namespace acp::a3ap {

struct Session {
  std::string session_id;  // 32 hex chars
  std::string peer_a;      // initiator
  std::string peer_b;      // responder
  std::int64_t established_at = 0;
  core::Digest transcript_hash{};

  core::Value to_value() const;
};

// Four-message mutual authentication:
//   A->B hello(credential_A, nonce_A)
//   B->A auth_response(credential_B, nonce_B, proof_B = Sign_B(nonce_A))
//   A->B auth_confirm(proof_A = Sign_A(nonce_B))
//   B->A auth_established(session_id)
// Both sides hash the four signed envelopes in order into transcript_hash.
// These classes are pure state machines; Peer moves the envelopes.

// Bytes signed as a nonce proof: binds the nonce to prover and verifier.
std::string proof_message(std::string_view nonce_hex, std::string_view prover, std::string_view verifier);

class InitiatorHandshake {
 public:
  InitiatorHandshake(Credential own, const KeyPair& keys, const TrustStore& trust, core::IdSource& ids);

  core::Value hello_payload() const;
  void sent_hello(const core::Envelope& hello);
  // Throws Error(BadCredential | BadProof). Returns the auth_confirm payload.
  core::Value on_response(const core::Envelope& response);
  void sent_confirm(const core::Envelope& confirm);
  // Throws Error(BadProof) if the id is missing or the exchange is out of order.
  Session on_established(const core::Envelope& established);

  const std::string& nonce() const noexcept { return nonce_; }
  const std::optional<Credential>& peer_credential() const noexcept { return peer_; }

 private:
  Credential own_;
  const KeyPair& keys_;
  const TrustStore& trust_;
  std::string nonce_;
  std::optional<Credential> peer_;
  std::vector<std::string> transcript_;
};

class ResponderHandshake {
 public:
  ResponderHandshake(Credential own, const KeyPair& keys, const TrustStore& trust, core::IdSource& ids);

  // Throws Error(BadCredential). Returns the auth_response payload.
  core::Value on_hello(const core::Envelope& hello);
  void sent_response(const core::Envelope& response);
  // Throws Error(BadProof). Returns the auth_established payload.
  core::Value on_confirm(const core::Envelope& confirm);
  Session sent_established(const core::Envelope& established);

  const std::optional<Credential>& peer_credential() const noexcept { return peer_; }

 private:
  Credential own_;
  const KeyPair& keys_;
  const TrustStore& trust_;
  core::IdSource& ids_;
  std::string nonce_;
  std::string session_id_;
  std::optional<Credential> peer_;
  std::vector<std::string> transcript_;
};

}  // namespace acp::a3ap
