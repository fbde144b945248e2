#include "acp/transport/endpoint.hpp"

#include "acp/core/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace acp::transport {

EndpointAddr EndpointAddr::sim(std::string name) {
  EndpointAddr a;
  a.kind = Kind::Sim;
  a.sim_name = std::move(name);
  return a;
}

EndpointAddr EndpointAddr::socket(std::string host, std::uint16_t port) {
  EndpointAddr a;
  a.kind = Kind::Socket;
  a.host = std::move(host);
  a.port = port;
  return a;
}

EndpointAddr EndpointAddr::parse(std::string_view text) {
  if (text.starts_with("sim:")) {
    if (text.size() == 4) throw Error(Errc::ParseError, "empty sim endpoint name");
    return sim(std::string(text.substr(4)));
  }
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(Errc::ParseError, "expected host:port, got '" + std::string(text) + "'");
  }
  auto port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc{} || p != port_text.data() + port_text.size() || port > 65535) {
    throw Error(Errc::ParseError, "bad port in '" + std::string(text) + "'");
  }
  return socket(std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port));
}

bool EndpointAddr::valid() const noexcept {
  if (kind == Kind::Sim) return !sim_name.empty() && host.empty() && port == 0;
  return sim_name.empty() && !host.empty();
}

std::string EndpointAddr::str() const {
  if (kind == Kind::Sim) return "sim:" + sim_name;
  return host + ":" + std::to_string(port);
}

void AddressBook::set(const std::string& party, EndpointAddr addr) { entries_[party] = std::move(addr); }

std::optional<EndpointAddr> AddressBook::find(const std::string& party) const {
  auto it = entries_.find(party);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

EndpointAddr AddressBook::resolve(const std::string& party) const {
  if (auto a = find(party)) return *a;
  if (default_kind_ == EndpointAddr::Kind::Sim) return EndpointAddr::sim(party);
  throw Error(Errc::Unroutable, "no address for '" + party + "'");
}

AddressBook AddressBook::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open address book '" + path + "'");
  AddressBook book(EndpointAddr::Kind::Socket);
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string party, addr;
    if (!(ls >> party)) continue;
    if (!(ls >> addr)) throw Error(Errc::ConfigError, "address book line without address: " + line);
    book.set(party, EndpointAddr::parse(addr));
  }
  return book;
}

void AddressBook::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ConfigError, "cannot write address book '" + path + "'");
  for (const auto& [party, addr] : entries_) out << party << ' ' << addr.str() << '\n';
}

}  // namespace acp::transport
