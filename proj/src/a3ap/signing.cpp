#include "acp/a3ap/signing.hpp"

#include "acp/core/error.hpp"

namespace acp::a3ap {

core::Envelope sign_envelope(core::Envelope env, const KeyPair& keys) {
  if (!env.signature.empty()) throw Error(Errc::AlreadySigned, "envelope " + env.msg_id.hex() + " is already signed");
  env.signature = keys.sign_hex(env.signing_bytes());
  return env;
}

bool verify_envelope(const core::Envelope& env, const PublicKey& key) noexcept {
  if (env.signature.size() != 128) return false;
  for (char c : env.signature) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  try {
    return verify_signature_hex(key, env.signing_bytes(), env.signature);
  } catch (...) {
    return false;
  }
}

bool verify_frame(std::string_view frame, const PublicKey& key) noexcept {
  try {
    auto env = core::Envelope::decode(frame);
    if (env.encode() != frame) return false;
    return verify_envelope(env, key);
  } catch (...) {
    return false;
  }
}

}  // namespace acp::a3ap
