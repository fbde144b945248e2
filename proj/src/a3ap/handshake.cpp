#include "acp/a3ap/handshake.hpp"

#include "acp/a3ap/signing.hpp"
#include "acp/core/error.hpp"

namespace acp::a3ap {
namespace {

core::Digest hash_transcript(const std::vector<std::string>& frames) {
  std::string all;
  for (const auto& f : frames) {
    all += std::to_string(f.size());
    all.push_back('\n');
    all += f;
  }
  return core::sha256(all);
}

std::string fresh_nonce(core::IdSource& ids) { return core::to_hex(ids.next_bytes32()); }

// Checks the embedded credential against the roots, that it names the
// envelope sender, and that the envelope is signed by the credential key.
Credential authenticate_sender(const core::Envelope& env, const TrustStore& trust) {
  Credential cred;
  try {
    cred = Credential::from_value(env.payload.at("credential"));
  } catch (const std::exception& e) {
    throw Error(Errc::BadCredential, std::string("unreadable credential: ") + e.what());
  }
  if (!verify_credential(cred, trust)) {
    throw Error(Errc::BadCredential, "credential for " + cred.agent + " does not verify under a trusted authority");
  }
  if (cred.agent != env.sender) throw Error(Errc::BadCredential, "credential subject differs from sender");
  if (!verify_envelope(env, cred.public_key)) {
    throw Error(Errc::BadCredential, "envelope not signed by the credential key");
  }
  return cred;
}

std::string payload_string(const core::Envelope& env, const char* key, Errc code) {
  auto it = env.payload.find(key);
  if (it == env.payload.end() || !it->is_string()) {
    throw Error(code, std::string("missing '") + key + "' in " + env.msg_type);
  }
  return it->get<std::string>();
}

}  // namespace

core::Value Session::to_value() const {
  return {{"session_id", session_id},
          {"peer_a", peer_a},
          {"peer_b", peer_b},
          {"established_at", established_at},
          {"transcript_hash", core::to_hex(transcript_hash)}};
}

std::string proof_message(std::string_view nonce_hex, std::string_view prover, std::string_view verifier) {
  return core::canonical_encode({{"purpose", "acp-auth-proof"},
                                 {"nonce", std::string(nonce_hex)},
                                 {"prover", std::string(prover)},
                                 {"verifier", std::string(verifier)}});
}

InitiatorHandshake::InitiatorHandshake(Credential own, const KeyPair& keys, const TrustStore& trust,
                                       core::IdSource& ids)
    : own_(std::move(own)), keys_(keys), trust_(trust), nonce_(fresh_nonce(ids)) {}

core::Value InitiatorHandshake::hello_payload() const {
  return {{"credential", own_.to_value()}, {"nonce", nonce_}};
}

void InitiatorHandshake::sent_hello(const core::Envelope& hello) { transcript_.push_back(hello.encode()); }

core::Value InitiatorHandshake::on_response(const core::Envelope& response) {
  if (transcript_.size() != 1) throw Error(Errc::BadProof, "auth_response out of order");
  auto cred = authenticate_sender(response, trust_);
  const auto proof = payload_string(response, "proof", Errc::BadProof);
  const auto peer_nonce = payload_string(response, "nonce", Errc::BadProof);
  if (!verify_signature_hex(cred.public_key, proof_message(nonce_, cred.agent, own_.agent), proof)) {
    throw Error(Errc::BadProof, "responder proof does not cover our nonce");
  }
  peer_ = cred;
  transcript_.push_back(response.encode());
  return {{"proof", keys_.sign_hex(proof_message(peer_nonce, own_.agent, cred.agent))}};
}

void InitiatorHandshake::sent_confirm(const core::Envelope& confirm) { transcript_.push_back(confirm.encode()); }

Session InitiatorHandshake::on_established(const core::Envelope& established) {
  if (transcript_.size() != 3 || !peer_) throw Error(Errc::BadProof, "auth_established out of order");
  if (!verify_envelope(established, peer_->public_key)) {
    throw Error(Errc::BadProof, "auth_established not signed by the responder");
  }
  Session s;
  s.session_id = payload_string(established, "session_id", Errc::BadProof);
  s.peer_a = own_.agent;
  s.peer_b = peer_->agent;
  s.established_at = established.timestamp;
  transcript_.push_back(established.encode());
  s.transcript_hash = hash_transcript(transcript_);
  return s;
}

ResponderHandshake::ResponderHandshake(Credential own, const KeyPair& keys, const TrustStore& trust,
                                       core::IdSource& ids)
    : own_(std::move(own)), keys_(keys), trust_(trust), ids_(ids), nonce_(fresh_nonce(ids)) {}

core::Value ResponderHandshake::on_hello(const core::Envelope& hello) {
  auto cred = authenticate_sender(hello, trust_);
  const auto peer_nonce = payload_string(hello, "nonce", Errc::BadProof);
  peer_ = cred;
  transcript_.push_back(hello.encode());
  return {{"credential", own_.to_value()},
          {"nonce", nonce_},
          {"proof", keys_.sign_hex(proof_message(peer_nonce, own_.agent, cred.agent))}};
}

void ResponderHandshake::sent_response(const core::Envelope& response) { transcript_.push_back(response.encode()); }

core::Value ResponderHandshake::on_confirm(const core::Envelope& confirm) {
  if (transcript_.size() != 2 || !peer_) throw Error(Errc::BadProof, "auth_confirm out of order");
  if (!verify_envelope(confirm, peer_->public_key)) {
    throw Error(Errc::BadProof, "auth_confirm not signed by the initiator");
  }
  const auto proof = payload_string(confirm, "proof", Errc::BadProof);
  if (!verify_signature_hex(peer_->public_key, proof_message(nonce_, peer_->agent, own_.agent), proof)) {
    throw Error(Errc::BadProof, "initiator proof does not cover our nonce");
  }
  transcript_.push_back(confirm.encode());
  session_id_ = ids_.next_id().hex();
  return {{"session_id", session_id_}};
}

Session ResponderHandshake::sent_established(const core::Envelope& established) {
  Session s;
  s.session_id = session_id_;
  s.peer_a = peer_->agent;
  s.peer_b = own_.agent;
  s.established_at = established.timestamp;
  transcript_.push_back(established.encode());
  s.transcript_hash = hash_transcript(transcript_);
  return s;
}

}  // namespace acp::a3ap
