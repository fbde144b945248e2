#include "acp/core/rng.hpp"

#include "acp/core/crypto.hpp"
#include "acp/core/error.hpp"

#include <cstdio>

namespace acp::core {

MessageId MessageId::from_hex(std::string_view hex) {
  if (hex.size() != 32) throw Error(Errc::ParseError, "message id must be 32 hex characters");
  for (char c : hex) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      throw Error(Errc::ParseError, "message id must be lowercase hex");
    }
  }
  MessageId id;
  id.hex_ = std::string(hex);
  return id;
}

MessageId MessageId::from_parts(std::uint64_t hi, std::uint64_t lo) {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  MessageId id;
  id.hex_ = buf;
  return id;
}

IdSource IdSource::seeded(std::uint64_t seed, std::string_view stream_name) {
  std::string material = std::to_string(seed);
  material.push_back('\0');
  material += stream_name;
  auto d = sha256(material);
  std::uint64_t s = 0;
  for (int i = 0; i < 8; ++i) s = (s << 8) | d[i];
  return IdSource(s);
}

IdSource IdSource::random() {
  std::random_device rd;
  std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  return IdSource(s);
}

MessageId IdSource::next_id() {
  auto hi = engine_();
  auto lo = engine_();
  return MessageId::from_parts(hi, lo);
}

std::array<std::uint8_t, 32> IdSource::next_bytes32() {
  std::array<std::uint8_t, 32> out{};
  for (int w = 0; w < 4; ++w) {
    auto x = engine_();
    for (int b = 0; b < 8; ++b) out[w * 8 + b] = static_cast<std::uint8_t>(x >> (8 * b));
  }
  return out;
}

}  // namespace acp::core
