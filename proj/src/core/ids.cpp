#include "acp/core/ids.hpp"

#include "acp/core/error.hpp"

namespace acp::core {
namespace {

constexpr std::string_view kAgentScheme = "acp://";
constexpr std::string_view kServiceScheme = "svc://";

std::vector<std::string> split_on_slash(std::string_view rest) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = rest.find('/', start);
    parts.emplace_back(rest.substr(start, pos == std::string_view::npos ? rest.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

bool is_valid_segment(std::string_view segment) noexcept {
  if (segment.empty() || segment.size() > 63) return false;
  for (char c : segment) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    if (!ok) return false;
  }
  return true;
}

std::string AgentId::str() const { return format_agent_id(*this); }

std::string format_agent_id(const AgentId& id) {
  std::string out(kAgentScheme);
  for (const auto& seg : id.registry_path) {
    out += seg;
    out.push_back('/');
  }
  out += id.agent_name;
  return out;
}

AgentId parse_agent_id(std::string_view text) {
  if (!text.starts_with(kAgentScheme)) {
    throw Error(Errc::BadScheme, "expected scheme 'acp://' in '" + std::string(text) + "'");
  }
  auto rest = text.substr(kAgentScheme.size());
  if (rest.empty()) throw Error(Errc::EmptyPath, "no registry path or agent name");
  auto parts = split_on_slash(rest);
  if (parts.size() < 2) {
    throw Error(Errc::EmptyPath, "identifier needs a registry path and an agent name");
  }
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!is_valid_segment(parts[i])) {
      throw Error(Errc::BadSegment, "invalid segment '" + parts[i] + "'", {{"index", i}});
    }
  }
  AgentId id;
  id.agent_name = parts.back();
  parts.pop_back();
  id.registry_path = std::move(parts);
  return id;
}

std::string ServiceId::str() const {
  std::string out(kServiceScheme);
  out += kind;
  for (const auto& seg : path) {
    out.push_back('/');
    out += seg;
  }
  return out;
}

ServiceId parse_service_id(std::string_view text) {
  if (!text.starts_with(kServiceScheme)) {
    throw Error(Errc::BadScheme, "expected scheme 'svc://' in '" + std::string(text) + "'");
  }
  auto parts = split_on_slash(text.substr(kServiceScheme.size()));
  if (parts.size() < 2) throw Error(Errc::EmptyPath, "service id needs a kind and a name");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!is_valid_segment(parts[i])) {
      throw Error(Errc::BadSegment, "invalid segment '" + parts[i] + "'", {{"index", i}});
    }
  }
  ServiceId id;
  id.kind = parts.front();
  id.path.assign(parts.begin() + 1, parts.end());
  return id;
}

std::vector<std::string> split_path(std::string_view path) {
  if (path.empty()) return {};
  auto parts = split_on_slash(path);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!is_valid_segment(parts[i])) {
      throw Error(Errc::BadSegment, "invalid path segment '" + parts[i] + "'", {{"index", i}});
    }
  }
  return parts;
}

std::string join_path(const std::vector<std::string>& segments) {
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out.push_back('/');
    out += segments[i];
  }
  return out;
}

bool is_agent_party(std::string_view party) noexcept { return party.starts_with(kAgentScheme); }
bool is_service_party(std::string_view party) noexcept { return party.starts_with(kServiceScheme); }

}  // namespace acp::core
