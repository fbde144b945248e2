#include "acp/arp/anchor_log.hpp"

#include "acp/core/error.hpp"

namespace acp::arp {
namespace {

core::Digest chain(const core::Digest& prev, const core::Digest& record) {
  std::array<std::uint8_t, 64> buf;
  std::copy(prev.begin(), prev.end(), buf.begin());
  std::copy(record.begin(), record.end(), buf.begin() + 32);
  return core::sha256(std::span<const std::uint8_t>(buf));
}

}  // namespace

const core::Digest& genesis_head() {
  static const core::Digest g = core::sha256(std::string_view{});
  return g;
}

core::Value AnchorEntry::to_value() const {
  return {{"seq", seq},
          {"record_hash", core::to_hex(record_hash)},
          {"prev_head", core::to_hex(prev_head)},
          {"head", core::to_hex(head)}};
}

AnchorEntry AnchorEntry::from_value(const core::Value& v) {
  try {
    AnchorEntry e;
    e.seq = v.at("seq").get<std::uint64_t>();
    e.record_hash = core::digest_from_hex(v.at("record_hash").get<std::string>());
    e.prev_head = core::digest_from_hex(v.at("prev_head").get<std::string>());
    e.head = core::digest_from_hex(v.at("head").get<std::string>());
    return e;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    throw Error(Errc::ParseError, std::string("malformed anchor entry: ") + ex.what());
  }
}

const AnchorEntry& AnchorLog::append(const core::Digest& record_hash) {
  AnchorEntry e;
  e.seq = entries_.size() + 1;
  e.record_hash = record_hash;
  e.prev_head = head();
  e.head = chain(e.prev_head, record_hash);
  entries_.push_back(e);
  return entries_.back();
}

core::Value AnchorLog::to_value() const {
  core::Value out = core::Value::array();
  for (const auto& e : entries_) out.push_back(e.to_value());
  return out;
}

AnchorLog AnchorLog::from_value(const core::Value& v) {
  if (!v.is_array()) throw Error(Errc::ParseError, "anchor log must be a list");
  AnchorLog log;
  for (const auto& e : v) log.entries_.push_back(AnchorEntry::from_value(e));
  return log;
}

bool verify_anchor(std::span<const AnchorEntry> entries) noexcept {
  core::Digest head = genesis_head();
  std::uint64_t seq = 1;
  for (const auto& e : entries) {
    if (e.seq != seq++) return false;
    if (e.prev_head != head) return false;
    if (chain(head, e.record_hash) != e.head) return false;
    head = e.head;
  }
  return true;
}

}  // namespace acp::arp
