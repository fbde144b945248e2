#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace acp::transport {

// Exactly one of sim_name or host:port is populated, matching kind.
struct EndpointAddr {
  enum class Kind { Sim, Socket };

  Kind kind = Kind::Sim;
  std::string sim_name;
  std::string host;
  std::uint16_t port = 0;

  static EndpointAddr sim(std::string name);
  static EndpointAddr socket(std::string host, std::uint16_t port);
  // "sim:<name>" or "<host>:<port>"; throws Error(ParseError).
  static EndpointAddr parse(std::string_view text);

  bool valid() const noexcept;
  std::string str() const;

  friend bool operator==(const EndpointAddr&, const EndpointAddr&) = default;
};

// Maps principals (AgentId / ServiceId strings) to endpoints. Unknown
// principals fall back to a sim endpoint named after the principal when the
// book is in sim mode.
class AddressBook {
 public:
  explicit AddressBook(EndpointAddr::Kind default_kind = EndpointAddr::Kind::Sim)
      : default_kind_(default_kind) {}

  void set(const std::string& party, EndpointAddr addr);
  std::optional<EndpointAddr> find(const std::string& party) const;
  // Throws Error(Unroutable) when the party has no address in socket mode.
  EndpointAddr resolve(const std::string& party) const;
  const std::map<std::string, EndpointAddr>& entries() const noexcept { return entries_; }

  // Lines of "<party> <host:port>"; '#' starts a comment.
  static AddressBook load(const std::string& path);
  void save(const std::string& path) const;

 private:
  EndpointAddr::Kind default_kind_;
  std::map<std::string, EndpointAddr> entries_;
};

}  // namespace acp::transport
