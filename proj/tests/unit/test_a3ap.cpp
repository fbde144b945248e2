#include "acp/a3ap/handshake.hpp"
#include "acp/a3ap/ledger.hpp"
#include "acp/a3ap/signing.hpp"
#include "acp/core/error.hpp"
#include "support/fixtures.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <random>

using namespace acp;
using namespace acp::a3ap;
using testing::World;

namespace {

std::uint64_t n_msgs = 100;

core::Envelope signed_env(const std::string& type, const std::string& from, const std::string& to,
                          core::Value payload, const KeyPair& keys,
                          std::optional<core::MessageId> corr = std::nullopt) {
  core::Envelope env;
  env.protocol = core::Protocol::A3AP;
  env.msg_type = type;
  env.msg_id = core::MessageId::from_parts(++n_msgs, 3);
  env.correlation_id = corr;
  env.sender = from;
  env.recipient = to;
  env.payload = std::move(payload);
  return sign_envelope(env, keys);
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an acp::Error");
  return Errc::ParseError;
}

Session fake_session(const std::string& id) {
  Session s;
  s.session_id = id;
  s.peer_a = "acp://root/p";
  s.peer_b = "svc://toolmgr/tm";
  return s;
}

}  // namespace

// ── keys and signatures ───────────────────────────────────────────────────

TEST_CASE("keys are deterministic per seed", "[a3ap][keys]") {
  auto a = core::IdSource::seeded(5, "k");
  auto b = core::IdSource::seeded(5, "k");
  CHECK(KeyPair::generate(a).public_key() == KeyPair::generate(b).public_key());
  auto kp = KeyPair::generate(a);
  auto sig = kp.sign_hex("hello");
  CHECK(verify_signature_hex(kp.public_key(), "hello", sig));
  CHECK_FALSE(verify_signature_hex(kp.public_key(), "hellO", sig));
  CHECK_FALSE(verify_signature_hex(kp.public_key(), "hello", "zz"));
  CHECK(public_key_from_hex(to_hex(kp.public_key())) == kp.public_key());
}

TEST_CASE("key files and key rings round trip", "[a3ap][keys]") {
  auto dir = std::filesystem::temp_directory_path() / "acp_keys_test";
  std::filesystem::create_directories(dir);
  auto ids = core::IdSource::seeded(9, "files");
  auto kp = KeyPair::generate(ids);
  write_key_file((dir / "k.key").string(), kp);
  CHECK(read_key_file((dir / "k.key").string()).public_key() == kp.public_key());
  KeyRing ring;
  ring.add("acp://root/a", kp.public_key());
  ring.save((dir / "ring").string());
  CHECK(KeyRing::load((dir / "ring").string()).find("acp://root/a") == kp.public_key());
  std::filesystem::remove_all(dir);
}

TEST_CASE("envelope signatures", "[a3ap][signing]") {
  World w;
  auto a = w.agent("alice");
  auto env = testing::make_envelope(a.credential.agent, "acp://root/bob", {{"q", "x"}});
  auto s = sign_envelope(env, a.keys);
  CHECK(verify_envelope(s, a.keys.public_key()));
  CHECK(code_of([&] { sign_envelope(s, a.keys); }) == Errc::AlreadySigned);
  auto upper = s;
  for (auto& c : upper.signature) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  CHECK_FALSE(verify_envelope(upper, a.keys.public_key()));
  auto other = w.agent("mallory");
  CHECK_FALSE(verify_envelope(s, other.keys.public_key()));
}

TEST_CASE("any single-byte mutation of a signed frame fails verification", "[a3ap][signing][property]") {
  World w;
  auto a = w.agent("alice");
  auto env = testing::make_envelope(a.credential.agent, "svc://discovery/d1",
                                    {{"tags", {"restaurant.search"}}, {"k", 3}, {"f", 0.25}});
  const auto frame = sign_envelope(env, a.keys).encode();
  REQUIRE(verify_frame(frame, a.keys.public_key()));
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> pos(0, frame.size() - 1);
  std::uniform_int_distribution<int> byte(1, 255);
  for (int i = 0; i < 3000; ++i) {
    auto mutated = frame;
    auto p = pos(rng);
    mutated[p] = static_cast<char>(static_cast<unsigned char>(mutated[p]) ^ byte(rng));
    REQUIRE_FALSE(verify_frame(mutated, a.keys.public_key()));
  }
  // Every position, flipping the lowest bit.
  for (std::size_t p = 0; p < frame.size(); ++p) {
    auto mutated = frame;
    mutated[p] = static_cast<char>(mutated[p] ^ 1);
    REQUIRE_FALSE(verify_frame(mutated, a.keys.public_key()));
  }
}

// ── credentials ───────────────────────────────────────────────────────────

TEST_CASE("credential issuance and verification", "[a3ap][credential]") {
  World w;
  auto a = w.agent("alice");
  CHECK(a.credential.agent == "acp://root/alice");
  CHECK(verify_credential(a.credential, w.trust));
  auto forged = a.credential;
  forged.owner_id = "someone-else";
  CHECK_FALSE(verify_credential(forged, w.trust));
  CHECK(Credential::from_value(a.credential.to_value()).signing_bytes() == a.credential.signing_bytes());
  auto kp = KeyPair::generate(w.ids);
  CHECK(code_of([&] { issue_credential("", "x", kp.public_key(), w.authority, 0); }) == Errc::BadName);
  CHECK(code_of([&] { issue_credential("o", "Bad Name", kp.public_key(), w.authority, 0); }) == Errc::BadName);
}

// ── handshake state machines ──────────────────────────────────────────────

TEST_CASE("handshake: both sides derive the same session", "[a3ap][handshake]") {
  World w;
  auto a = w.agent("alice");
  auto b = w.service("svc://discovery/d1");
  InitiatorHandshake ini(a.credential, a.keys, w.trust, w.ids);
  ResponderHandshake res(b.credential, b.keys, w.trust, w.ids);
  auto A = a.credential.agent, B = b.credential.agent;

  auto hello = signed_env("hello", A, B, ini.hello_payload(), a.keys);
  ini.sent_hello(hello);
  auto resp = signed_env("auth_response", B, A, res.on_hello(hello), b.keys, hello.msg_id);
  res.sent_response(resp);
  auto conf = signed_env("auth_confirm", A, B, ini.on_response(resp), a.keys, resp.msg_id);
  ini.sent_confirm(conf);
  auto est = signed_env("auth_established", B, A, res.on_confirm(conf), b.keys, conf.msg_id);
  auto sb = res.sent_established(est);
  auto sa = ini.on_established(est);
  CHECK(sa.session_id == sb.session_id);
  CHECK(sa.session_id.size() == 32);
  CHECK(sa.transcript_hash == sb.transcript_hash);
  CHECK(sa.peer_a == A);
  CHECK(sb.peer_b == B);
}

TEST_CASE("handshake: replayed confirm over a stale nonce is rejected", "[a3ap][handshake]") {
  World w;
  auto a = w.agent("alice");
  auto b = w.service("svc://discovery/d1");
  auto A = a.credential.agent, B = b.credential.agent;

  InitiatorHandshake ini(a.credential, a.keys, w.trust, w.ids);
  ResponderHandshake first(b.credential, b.keys, w.trust, w.ids);
  auto hello = signed_env("hello", A, B, ini.hello_payload(), a.keys);
  ini.sent_hello(hello);
  auto resp = signed_env("auth_response", B, A, first.on_hello(hello), b.keys, hello.msg_id);
  auto conf = signed_env("auth_confirm", A, B, ini.on_response(resp), a.keys, resp.msg_id);

  // An attacker replays hello and the old confirm to a fresh responder run.
  ResponderHandshake second(b.credential, b.keys, w.trust, w.ids);
  auto resp2 = signed_env("auth_response", B, A, second.on_hello(hello), b.keys, hello.msg_id);
  second.sent_response(resp2);
  CHECK(code_of([&] { second.on_confirm(conf); }) == Errc::BadProof);
}

TEST_CASE("handshake: self-signed credential is rejected", "[a3ap][handshake]") {
  World w;
  auto b = w.service("svc://discovery/d1");
  auto rogue_ids = core::IdSource::seeded(666, "rogue");
  Authority rogue{core::parse_service_id("svc://registry/root"), {"root"}, KeyPair::generate(rogue_ids)};
  auto kp = KeyPair::generate(rogue_ids);
  auto cred = issue_credential("mallory", "alice", kp.public_key(), rogue, 0);
  InitiatorHandshake ini(cred, kp, w.trust, w.ids);
  ResponderHandshake res(b.credential, b.keys, w.trust, w.ids);
  auto hello = signed_env("hello", cred.agent, b.credential.agent, ini.hello_payload(), kp);
  CHECK(code_of([&] { res.on_hello(hello); }) == Errc::BadCredential);
}

TEST_CASE("handshake: credential subject must be the sender", "[a3ap][handshake]") {
  World w;
  auto a = w.agent("alice");
  auto b = w.service("svc://discovery/d1");
  InitiatorHandshake ini(a.credential, a.keys, w.trust, w.ids);
  ResponderHandshake res(b.credential, b.keys, w.trust, w.ids);
  auto hello = signed_env("hello", "acp://root/bob", b.credential.agent, ini.hello_payload(), a.keys);
  CHECK(code_of([&] { res.on_hello(hello); }) == Errc::BadCredential);
}

TEST_CASE("handshake: forged responder proof is rejected", "[a3ap][handshake]") {
  World w;
  auto a = w.agent("alice");
  auto b = w.service("svc://discovery/d1");
  auto A = a.credential.agent, B = b.credential.agent;
  InitiatorHandshake ini(a.credential, a.keys, w.trust, w.ids);
  ResponderHandshake res(b.credential, b.keys, w.trust, w.ids);
  auto hello = signed_env("hello", A, B, ini.hello_payload(), a.keys);
  ini.sent_hello(hello);
  auto payload = res.on_hello(hello);
  payload["proof"] = b.keys.sign_hex(proof_message(std::string(64, '0'), B, A));
  auto resp = signed_env("auth_response", B, A, payload, b.keys, hello.msg_id);
  CHECK(code_of([&] { ini.on_response(resp); }) == Errc::BadProof);
}

// ── peers on a bus ────────────────────────────────────────────────────────

TEST_CASE("peers authenticate over the sim bus and exchange signed traffic", "[a3ap][peer]") {
  World w;
  testing::RecordingPeer alice(w.fabric, w.agent("alice"));
  testing::RecordingPeer disc(w.fabric, w.service("svc://discovery/d1"));
  alice.attach();
  disc.attach();
  w.runtime.add(alice);
  w.runtime.add(disc);

  auto s = mutual_authenticate(w.runtime, alice, disc.party());
  REQUIRE(disc.session_with(alice.party()));
  CHECK(disc.session_with(alice.party())->session_id == s.session_id);
  CHECK(w.keys.find(alice.party()));

  alice.send(core::Protocol::ADP, "discover_request", disc.party(), {{"tags", {"a"}}});
  w.runtime.run_until([&] { return !disc.received.empty(); }, 10);
  REQUIRE(disc.received.size() == 1);
  CHECK(disc.rejected().empty());
}

TEST_CASE("peer drops envelopes that do not verify", "[a3ap][peer]") {
  World w;
  testing::RecordingPeer disc(w.fabric, w.service("svc://discovery/d1"));
  disc.attach();
  w.runtime.add(disc);
  auto a = w.agent("alice");
  w.keys.add(a.credential.agent, a.keys.public_key());
  auto mallory = w.agent("mallory");
  auto env = testing::make_envelope(a.credential.agent, disc.party(), {{"x", 1}});
  w.bus.send(sign_envelope(env, mallory.keys), transport::EndpointAddr::sim(disc.party()));
  w.runtime.step();
  CHECK(disc.received.empty());
  CHECK(disc.rejected().size() == 1);
}

TEST_CASE("handshake to an unreachable responder times out", "[a3ap][peer]") {
  World w;
  testing::RecordingPeer alice(w.fabric, w.agent("alice"));
  testing::RecordingPeer ghost(w.fabric, w.service("svc://discovery/ghost"));
  alice.attach();
  ghost.attach();
  w.runtime.add(alice);
  std::optional<Errc> failure;
  alice.authenticate(ghost.party(), [&](const Session*, const Error* e) {
    if (e) failure = e->code();
  });
  ghost.detach();  // hello is in flight and gets dropped
  CHECK(w.runtime.run_until([&] { return failure.has_value(); }, 200));
  CHECK(failure == Errc::Timeout);
  CHECK(w.runtime.steps() > 50);
  CHECK(w.bus.dropped() == 1);
  try {
    mutual_authenticate(w.runtime, alice, ghost.party());
    FAIL();
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Unroutable);
  }
}

TEST_CASE("untrusted initiator fails at the responder", "[a3ap][peer]") {
  World w;
  testing::RecordingPeer disc(w.fabric, w.service("svc://discovery/d1"));
  disc.attach();
  w.runtime.add(disc);
  auto rogue_ids = core::IdSource::seeded(1, "rogue");
  Authority rogue{core::parse_service_id("svc://registry/root"), {"root"}, KeyPair::generate(rogue_ids)};
  auto kp = KeyPair::generate(rogue_ids);
  testing::RecordingPeer alice(w.fabric, {issue_credential("m", "alice", kp.public_key(), rogue, 0), kp});
  alice.attach();
  w.runtime.add(alice);
  CHECK(code_of([&] { mutual_authenticate(w.runtime, alice, disc.party()); }) == Errc::BadCredential);
  CHECK(disc.sessions().empty());
}

// ── ledger ────────────────────────────────────────────────────────────────

TEST_CASE("amount parsing and formatting", "[a3ap][ledger]") {
  CHECK(Amount::parse("0.001").micros() == 1000);
  CHECK(Amount::parse("12").str() == "12.000000");
  CHECK(Amount::parse("0.010000").str() == "0.010000");
  CHECK_THROWS_AS(Amount::parse("0.0000001"), Error);
  CHECK_THROWS_AS(Amount::parse("1e3"), Error);
  CHECK_THROWS_AS(Amount::parse(""), Error);
}

TEST_CASE("ledger arithmetic", "[a3ap][ledger]") {
  Ledger ledger;
  ledger.attach_session(fake_session("s1"));
  BillingPolicy policy{Amount::parse("0.001"), Amount::parse("0.01")};
  CHECK(invoice(ledger, policy, "acp://root/p").str() == "0.000000");
  ledger.record_usage("s1", "acp://root/p", "svc://toolmgr/tm", 10, UnitKind::Tokens, 1);
  ledger.record_usage("s1", "acp://root/p", "svc://toolmgr/tm", 20, UnitKind::Tokens, 2);
  CHECK(invoice(ledger, policy, "acp://root/p").str() == "0.030000");
  ledger.record_usage("s1", "acp://root/p", "acp://root/w", 2, UnitKind::Calls, 3);
  CHECK(invoice(ledger, policy, "acp://root/p").str() == "0.050000");
  CHECK(ledger.total("acp://root/p", "svc://toolmgr/tm", UnitKind::Tokens) == 30);
  CHECK(code_of([&] { ledger.record_usage("s1", "a", "b", 0, UnitKind::Tokens, 0); }) == Errc::ZeroUnits);
  CHECK(code_of([&] { ledger.record_usage("nope", "a", "b", 1, UnitKind::Tokens, 0); }) == Errc::NoSession);
  auto entries = ledger.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) CHECK(entries[i].entry_id == i + 1);
  CHECK(Ledger::from_value(ledger.to_value()).to_value() == ledger.to_value());
}

TEST_CASE("invoices partition the ledger exactly", "[a3ap][ledger][property]") {
  std::mt19937_64 rng(31337);
  const std::vector<std::string> payers{"acp://root/p1", "acp://root/p2", "acp://root/p3"};
  for (int round = 0; round < 200; ++round) {
    Ledger ledger;
    ledger.attach_session(fake_session("s"));
    std::uint64_t tok_price = rng() % 5000, call_price = rng() % 50000;
    BillingPolicy policy{Amount::from_micros(static_cast<std::int64_t>(tok_price)),
                         Amount::from_micros(static_cast<std::int64_t>(call_price))};
    std::map<std::string, std::uint64_t> expected;
    std::uint64_t grand = 0;
    int n = static_cast<int>(rng() % 40);
    for (int i = 0; i < n; ++i) {
      const auto& payer = payers[rng() % payers.size()];
      std::uint64_t units = 1 + rng() % 1000;
      bool calls = (rng() & 1) != 0;
      ledger.record_usage("s", payer, "svc://toolmgr/tm", units, calls ? UnitKind::Calls : UnitKind::Tokens, i);
      std::uint64_t c = units * (calls ? call_price : tok_price);
      expected[payer] += c;
      grand += c;
    }
    std::uint64_t sum = 0;
    for (const auto& p : payers) {
      auto got = invoice(ledger, policy, p).micros();
      REQUIRE(static_cast<std::uint64_t>(got) == expected[p]);
      sum += static_cast<std::uint64_t>(got);
    }
    std::uint64_t by_entry = 0;
    for (const auto& e : ledger.entries()) by_entry += static_cast<std::uint64_t>(charge(e, policy).micros());
    REQUIRE(sum == grand);
    REQUIRE(by_entry == grand);
  }
}
