#include "acp/a3ap/keys.hpp"

#include "acp/core/error.hpp"

#include <sodium.h>

#include <fstream>
#include <sstream>

namespace acp::a3ap {

KeyPair KeyPair::from_seed(const Seed& seed) {
  core::ensure_crypto_ready();
  KeyPair kp;
  kp.seed_ = seed;
  crypto_sign_ed25519_seed_keypair(kp.public_.data(), kp.secret_.data(), seed.data());
  return kp;
}

KeyPair KeyPair::generate(core::IdSource& ids) { return from_seed(ids.next_bytes32()); }

Signature KeyPair::sign(std::span<const std::uint8_t> message) const {
  Signature sig{};
  crypto_sign_ed25519_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

std::string KeyPair::sign_hex(std::string_view message) const {
  return core::to_hex(sign(core::as_bytes(message)));
}

bool verify_signature(const PublicKey& key, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature) noexcept {
  if (signature.size() != crypto_sign_ed25519_BYTES) return false;
  core::ensure_crypto_ready();
  return crypto_sign_ed25519_verify_detached(signature.data(), message.data(), message.size(),
                                             key.data()) == 0;
}

bool verify_signature_hex(const PublicKey& key, std::string_view message,
                          std::string_view signature_hex) noexcept {
  try {
    auto sig = core::from_hex(signature_hex);
    return verify_signature(key, core::as_bytes(message), sig);
  } catch (...) {
    return false;
  }
}

std::string to_hex(const PublicKey& key) { return core::to_hex(key); }

PublicKey public_key_from_hex(std::string_view hex) {
  auto bytes = core::from_hex(hex);
  if (bytes.size() != 32) throw Error(Errc::ParseError, "public key must be 32 bytes");
  PublicKey k{};
  std::copy(bytes.begin(), bytes.end(), k.begin());
  return k;
}

void write_key_file(const std::string& path, const KeyPair& keys) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ConfigError, "cannot write key file '" + path + "'");
  out << core::to_hex(keys.seed()) << '\n' << to_hex(keys.public_key()) << '\n';
}

KeyPair read_key_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open key file '" + path + "'");
  std::string seed_line, public_line;
  std::getline(in, seed_line);
  std::getline(in, public_line);
  auto seed_bytes = core::from_hex(seed_line);
  if (seed_bytes.size() != 32) throw Error(Errc::ParseError, "key seed must be 32 bytes");
  Seed seed{};
  std::copy(seed_bytes.begin(), seed_bytes.end(), seed.begin());
  auto kp = KeyPair::from_seed(seed);
  if (!public_line.empty() && public_key_from_hex(public_line) != kp.public_key()) {
    throw Error(Errc::ParseError, "public key line does not match the seed");
  }
  return kp;
}

std::optional<PublicKey> KeyRing::find(const std::string& party) const {
  auto it = keys_.find(party);
  if (it == keys_.end()) return std::nullopt;
  return it->second;
}

KeyRing KeyRing::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open key ring '" + path + "'");
  KeyRing ring;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string party, hex;
    if (!(ls >> party)) continue;
    if (!(ls >> hex)) throw Error(Errc::ConfigError, "key ring line without key: " + line);
    ring.add(party, public_key_from_hex(hex));
  }
  return ring;
}

void KeyRing::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ConfigError, "cannot write key ring '" + path + "'");
  for (const auto& [party, key] : keys_) out << party << ' ' << to_hex(key) << '\n';
}

}  // namespace acp::a3ap
