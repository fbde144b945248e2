#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace acp::core {

// Segment grammar shared by registry paths and agent names:
// lowercase alphanumerics plus '-', 1..63 characters.
bool is_valid_segment(std::string_view segment) noexcept;

// `acp://<registry-path>/<agent-name>`; the path has at least one segment and
// its first segment names a root registry.
struct AgentId {
  std::vector<std::string> registry_path;
  std::string agent_name;

  std::string str() const;

  friend bool operator==(const AgentId& a, const AgentId& b) = default;
  // Ordering is lexicographic over the formatted URI.
  friend std::strong_ordering operator<=>(const AgentId& a, const AgentId& b) {
    return a.str() <=> b.str();
  }
};

// Throws Error(BadScheme | EmptyPath | BadSegment{index}).
AgentId parse_agent_id(std::string_view text);
std::string format_agent_id(const AgentId& id);

// Services (registries, discovery, tool managers, users) are addressed as
// `svc://<kind>/<name>[/<name>...]`.
struct ServiceId {
  std::string kind;
  std::vector<std::string> path;

  std::string str() const;
  friend bool operator==(const ServiceId&, const ServiceId&) = default;
  friend std::strong_ordering operator<=>(const ServiceId& a, const ServiceId& b) {
    return a.str() <=> b.str();
  }
};

ServiceId parse_service_id(std::string_view text);

// Registry path helpers: "root/eu" <-> {"root","eu"}.
std::vector<std::string> split_path(std::string_view path);
std::string join_path(const std::vector<std::string>& segments);

// Any addressable principal (AgentId or ServiceId) in its string form.
bool is_agent_party(std::string_view party) noexcept;
bool is_service_party(std::string_view party) noexcept;

}  // namespace acp::core
