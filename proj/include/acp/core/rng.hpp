#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace acp::core {

// 128-bit identifier rendered as 32 lowercase hex characters.
class MessageId {
 public:
  MessageId() = default;
  static MessageId from_hex(std::string_view hex);  // throws Error(ParseError)
  static MessageId from_parts(std::uint64_t hi, std::uint64_t lo);

  const std::string& hex() const noexcept { return hex_; }
  bool empty() const noexcept { return hex_.empty(); }

  friend bool operator==(const MessageId&, const MessageId&) = default;
  friend auto operator<=>(const MessageId&, const MessageId&) = default;

 private:
  std::string hex_;
};

// Source of ids, nonces and key seeds. Seeded sources are reproducible:
// every principal derives its own stream from (seed, name) so adding a
// principal never perturbs another's sequence.
class IdSource {
 public:
  static IdSource seeded(std::uint64_t seed, std::string_view stream_name);
  static IdSource random();

  MessageId next_id();
  std::array<std::uint8_t, 32> next_bytes32();
  std::uint64_t next_u64() { return engine_(); }

 private:
  explicit IdSource(std::uint64_t seed) : engine_(seed) {}
  std::mt19937_64 engine_;
};

}  // namespace acp::core
