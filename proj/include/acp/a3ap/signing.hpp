#pragma once

#include "acp/a3ap/keys.hpp"
#include "acp/core/envelope.hpp"

namespace acp::a3ap {

// signature = Ed25519(sk, canonical bytes of the envelope minus signature).
// Throws Error(AlreadySigned) when the envelope carries a signature.
core::Envelope sign_envelope(core::Envelope env, const KeyPair& keys);

// Signature must be 64 bytes of lowercase hex.
bool verify_envelope(const core::Envelope& env, const PublicKey& key) noexcept;

// Wire-level check: the frame must be the canonical encoding of the envelope
// it decodes to, and that envelope's signature must verify.
bool verify_frame(std::string_view frame, const PublicKey& key) noexcept;

}  // namespace acp::a3ap
