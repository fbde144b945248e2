#pragma once

#include "acp/core/report.hpp"
#include "acp/core/rng.hpp"
#include "acp/core/value.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace acp::core {

enum class Protocol { ARP, ADP, AIP, ATP, A3AP };

std::string_view to_string(Protocol p) noexcept;
Protocol protocol_from_string(std::string_view s);

inline constexpr std::string_view kProtocolVersion = "1.0";

// Requests carry no correlation id, responses must carry one, notices may.
enum class MessageRole { Request, Response, Notice };

// Closed catalog lookup; nullopt when the pair is not part of the suite.
std::optional<MessageRole> catalog_role(Protocol p, std::string_view msg_type) noexcept;

struct Envelope {
  Protocol protocol = Protocol::ARP;
  std::string version{kProtocolVersion};
  std::string msg_type;
  MessageId msg_id;
  std::optional<MessageId> correlation_id;
  std::string sender;
  std::string recipient;
  std::int64_t timestamp = 0;
  Value payload = Value::object();
  std::string signature;  // lowercase hex, empty until signed

  Value to_value(bool include_signature = true) const;
  static Envelope from_value(const Value& v);  // throws Error(ParseError)

  // canonical_encode of the envelope without its signature field.
  std::string signing_bytes() const;
  // canonical_encode of the full envelope (the wire frame body).
  std::string encode() const;
  static Envelope decode(std::string_view text);
};

ValidationReport validate_envelope(const Envelope& env);

}  // namespace acp::core
