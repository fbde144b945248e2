#include "acp/a3ap/ledger.hpp"

#include "acp/core/error.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace acp::a3ap {

Amount Amount::parse(std::string_view text) {
  if (text.empty()) throw Error(Errc::ParseError, "empty amount");
  bool negative = false;
  if (text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  auto whole = text.substr(0, dot);
  auto frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 6 || (dot != std::string_view::npos && frac.empty())) {
    throw Error(Errc::ParseError, "bad amount '" + std::string(text) + "'");
  }
  std::int64_t micros = 0;
  for (char c : whole) {
    if (c < '0' || c > '9') throw Error(Errc::ParseError, "bad amount '" + std::string(text) + "'");
    if (micros > (std::numeric_limits<std::int64_t>::max() / 10 - 9) / 1'000'000) {
      throw Error(Errc::ParseError, "amount overflow");
    }
    micros = micros * 10 + (c - '0');
  }
  micros *= 1'000'000;
  std::int64_t scale = 100'000;
  for (char c : frac) {
    if (c < '0' || c > '9') throw Error(Errc::ParseError, "bad amount '" + std::string(text) + "'");
    micros += (c - '0') * scale;
    scale /= 10;
  }
  return from_micros(negative ? -micros : micros);
}

std::string Amount::str() const {
  const bool negative = micros_ < 0;
  const auto abs = negative ? -static_cast<__int128>(micros_) : static_cast<__int128>(micros_);
  auto whole = static_cast<std::int64_t>(abs / 1'000'000);
  auto frac = static_cast<std::int64_t>(abs % 1'000'000);
  std::string f = std::to_string(frac);
  return (negative ? "-" : "") + std::to_string(whole) + "." + std::string(6 - f.size(), '0') + f;
}

std::string_view to_string(UnitKind kind) noexcept { return kind == UnitKind::Tokens ? "tokens" : "calls"; }

UnitKind unit_kind_from_string(std::string_view s) {
  if (s == "tokens") return UnitKind::Tokens;
  if (s == "calls") return UnitKind::Calls;
  throw Error(Errc::ParseError, "unknown unit kind '" + std::string(s) + "'");
}

core::Value LedgerEntry::to_value() const {
  return {{"entry_id", entry_id}, {"session_id", session_id}, {"payer", payer},
          {"payee", payee},       {"units", units},           {"unit_kind", std::string(to_string(unit_kind))},
          {"at", at}};
}

LedgerEntry LedgerEntry::from_value(const core::Value& v) {
  try {
    LedgerEntry e;
    e.entry_id = v.at("entry_id").get<std::uint64_t>();
    e.session_id = v.at("session_id").get<std::string>();
    e.payer = v.at("payer").get<std::string>();
    e.payee = v.at("payee").get<std::string>();
    e.units = v.at("units").get<std::uint64_t>();
    e.unit_kind = unit_kind_from_string(v.at("unit_kind").get<std::string>());
    e.at = v.at("at").get<std::int64_t>();
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::ParseError, std::string("malformed ledger entry: ") + ex.what());
  }
}

core::Value BillingPolicy::to_value() const {
  return {{"price_per_token", price_per_token.str()}, {"price_per_call", price_per_call.str()}};
}

BillingPolicy BillingPolicy::from_value(const core::Value& v) {
  BillingPolicy p;
  p.price_per_token = Amount::parse(v.at("price_per_token").get<std::string>());
  p.price_per_call = Amount::parse(v.at("price_per_call").get<std::string>());
  if (p.price_per_token.micros() < 0 || p.price_per_call.micros() < 0) {
    throw Error(Errc::ParseError, "prices must be non-negative");
  }
  return p;
}

Ledger::Ledger(const Ledger& other) {
  std::lock_guard lock(other.mu_);
  sessions_ = other.sessions_;
  entries_ = other.entries_;
}

Ledger& Ledger::operator=(const Ledger& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  sessions_ = other.sessions_;
  entries_ = other.entries_;
  return *this;
}

void Ledger::attach_session(const Session& session) {
  std::lock_guard lock(mu_);
  sessions_.insert(session.session_id);
}

bool Ledger::has_session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return sessions_.contains(session_id);
}

LedgerEntry Ledger::record_usage(const std::string& session_id, const std::string& payer,
                                 const std::string& payee, std::uint64_t units, UnitKind unit_kind,
                                 std::int64_t at) {
  if (units == 0) throw Error(Errc::ZeroUnits, "usage must be positive");
  std::lock_guard lock(mu_);
  if (!sessions_.contains(session_id)) throw Error(Errc::NoSession, "no established session '" + session_id + "'");
  LedgerEntry e{entries_.size() + 1, session_id, payer, payee, units, unit_kind, at};
  entries_.push_back(e);
  return e;
}

std::vector<LedgerEntry> Ledger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::uint64_t Ledger::total(const std::string& payer, const std::string& payee, UnitKind kind) const {
  std::lock_guard lock(mu_);
  std::uint64_t sum = 0;
  for (const auto& e : entries_) {
    if (e.payer == payer && e.payee == payee && e.unit_kind == kind) sum += e.units;
  }
  return sum;
}

std::set<std::string> Ledger::payers() const {
  std::lock_guard lock(mu_);
  std::set<std::string> out;
  for (const auto& e : entries_) out.insert(e.payer);
  return out;
}

core::Value Ledger::to_value() const {
  std::lock_guard lock(mu_);
  core::Value entries = core::Value::array();
  for (const auto& e : entries_) entries.push_back(e.to_value());
  core::Value sessions = core::Value::array();
  for (const auto& s : sessions_) sessions.push_back(s);
  return {{"entries", entries}, {"sessions", sessions}};
}

Ledger Ledger::from_value(const core::Value& v) {
  Ledger l;
  for (const auto& s : v.at("sessions")) l.sessions_.insert(s.get<std::string>());
  std::uint64_t expect = 1;
  for (const auto& e : v.at("entries")) {
    auto entry = LedgerEntry::from_value(e);
    if (entry.entry_id != expect++) throw Error(Errc::ParseError, "ledger entry ids are not dense");
    l.entries_.push_back(std::move(entry));
  }
  return l;
}

void Ledger::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(Errc::ConfigError, "cannot write ledger '" + path + "'");
  out << core::canonical_encode(to_value()) << '\n';
}

Ledger Ledger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigError, "cannot open ledger '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_value(core::canonical_decode(ss.str()));
}

Amount charge(const LedgerEntry& entry, const BillingPolicy& policy) {
  const auto price = entry.unit_kind == UnitKind::Tokens ? policy.price_per_token : policy.price_per_call;
  const __int128 product = static_cast<__int128>(entry.units) * price.micros();
  if (product > std::numeric_limits<std::int64_t>::max()) throw Error(Errc::ParseError, "charge overflow");
  return Amount::from_micros(static_cast<std::int64_t>(product));
}

Amount invoice(std::span<const LedgerEntry> entries, const BillingPolicy& policy, const std::string& payer) {
  Amount total;
  for (const auto& e : entries) {
    if (e.payer == payer) total += charge(e, policy);
  }
  return total;
}

Amount invoice(const Ledger& ledger, const BillingPolicy& policy, const std::string& payer) {
  auto entries = ledger.entries();
  return invoice(entries, policy, payer);
}

}  // namespace acp::a3ap
