#pragma once

#include "acp/core/crypto.hpp"
#include "acp/core/rng.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>

namespace acp::a3ap {

using PublicKey = std::array<std::uint8_t, 32>;
using Seed = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

// Ed25519 key pair derived from a 32-byte seed.
class KeyPair {
 public:
  static KeyPair from_seed(const Seed& seed);
  static KeyPair generate(core::IdSource& ids);

  const PublicKey& public_key() const noexcept { return public_; }
  const Seed& seed() const noexcept { return seed_; }
  Signature sign(std::span<const std::uint8_t> message) const;
  std::string sign_hex(std::string_view message) const;

 private:
  Seed seed_{};
  PublicKey public_{};
  std::array<std::uint8_t, 64> secret_{};
};

bool verify_signature(const PublicKey& key, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature) noexcept;
// Hex-encoded signature variant; malformed hex simply fails verification.
bool verify_signature_hex(const PublicKey& key, std::string_view message, std::string_view signature_hex) noexcept;

std::string to_hex(const PublicKey& key);
PublicKey public_key_from_hex(std::string_view hex);  // throws Error(ParseError)

// Key file: seed hex on the first line, public key hex on the second.
void write_key_file(const std::string& path, const KeyPair& keys);
KeyPair read_key_file(const std::string& path);

// Known public keys per principal. Lines of "<party> <hex>".
class KeyRing {
 public:
  void add(const std::string& party, const PublicKey& key) { keys_[party] = key; }
  std::optional<PublicKey> find(const std::string& party) const;
  const std::map<std::string, PublicKey>& entries() const noexcept { return keys_; }

  static KeyRing load(const std::string& path);
  void save(const std::string& path) const;

 private:
  std::map<std::string, PublicKey> keys_;
};

}  // namespace acp::a3ap
