#include "acp/core/descriptor.hpp"
#include "acp/core/envelope.hpp"
#include "acp/core/error.hpp"
#include "acp/core/ids.hpp"
#include "acp/core/value.hpp"
#include "support/gen.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace acp;
using namespace acp::core;

namespace {

Errc error_code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an acp::Error");
  return Errc::ParseError;
}

CapabilityDescriptor booking_descriptor() {
  CapabilityDescriptor d;
  d.agent = parse_agent_id("acp://root/eu/booking-1");
  d.capability_tags = {"restaurant.search"};
  d.interface.push_back({"search", Schema::record({{"cuisine", Schema::scalar(SchemaKind::String)}}),
                         Schema::list_of(Schema{})});
  return d;
}

}  // namespace

// ── canonical_encode ──────────────────────────────────────────────────────

TEST_CASE("canonical_encode: empty map is two bytes", "[core][encode]") {
  auto bytes = canonical_encode(Value::object());
  CHECK(bytes == "{}");
  CHECK(bytes.size() == 2);
}

TEST_CASE("canonical_encode: keys sorted", "[core][encode]") {
  CHECK(canonical_encode(Value::parse(R"({"b":1,"a":2})")) == R"({"a":2,"b":1})");
}

TEST_CASE("canonical_encode: golden bytes", "[core][encode]") {
  Value v = Value::parse(R"({"b":1,"a":[true,1.5,"x\n"],"c":{"z":-2,"y":2.0},"é":"ü\u0001","big":1e21})");
  CHECK(canonical_encode(v) ==
        "{\"a\":[true,1.5,\"x\\n\"],\"b\":1,\"big\":1e+21,\"c\":{\"y\":2.0,\"z\":-2},"
        "\"\xc3\xa9\":\"\xc3\xbc\\u0001\"}");
}

TEST_CASE("canonical_encode: floats are shortest round-trip and stay floats", "[core][encode]") {
  CHECK(canonical_encode(Value(0.1)) == "0.1");
  CHECK(canonical_encode(Value(1.0)) == "1.0");
  CHECK(canonical_encode(Value(-0.0)) == "-0.0");
  CHECK(canonical_encode(Value(0.65)) == "0.65");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    double d = dist(rng);
    auto text = canonical_encode(Value(d));
    auto back = canonical_decode(text);
    REQUIRE(back.is_number_float());
    CHECK(back.get<double>() == d);
  }
}

TEST_CASE("canonical_encode: unsupported nodes", "[core][encode]") {
  CHECK(error_code_of([] { canonical_encode(Value(nullptr)); }) == Errc::UnsupportedNode);
  CHECK(error_code_of([] { canonical_encode(Value{{"a", {1, nullptr}}}); }) == Errc::UnsupportedNode);
  CHECK(error_code_of([] { canonical_encode(Value(std::nan(""))); }) == Errc::UnsupportedNode);
  CHECK(error_code_of([] { canonical_encode(Value::binary({1, 2})); }) == Errc::UnsupportedNode);
  CHECK(error_code_of([] { canonical_encode(Value(std::string("\xff"))); }) == Errc::UnsupportedNode);
}

TEST_CASE("canonical_decode: malformed text", "[core][encode]") {
  CHECK(error_code_of([] { canonical_decode("{\"a\":"); }) == Errc::ParseError);
  CHECK(error_code_of([] { canonical_decode("[null]"); }) == Errc::UnsupportedNode);
}

TEST_CASE("descriptor encoding round-trips through parse", "[core][encode][property]") {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 500; ++i) {
    auto d = testing::random_descriptor(rng);
    auto once = canonical_encode(d.to_value());
    auto reparsed = CapabilityDescriptor::from_value(canonical_decode(once));
    REQUIRE(canonical_encode(reparsed.to_value()) == once);
  }
}

// ── AgentId ───────────────────────────────────────────────────────────────

TEST_CASE("parse_agent_id: grammar instance", "[core][ids]") {
  auto id = parse_agent_id("acp://root/eu/agent-42");
  CHECK(id.registry_path == std::vector<std::string>{"root", "eu"});
  CHECK(id.agent_name == "agent-42");
  CHECK(id.str() == "acp://root/eu/agent-42");
}

TEST_CASE("parse_agent_id: error cases", "[core][ids]") {
  CHECK(error_code_of([] { parse_agent_id("acp://root"); }) == Errc::EmptyPath);
  CHECK(error_code_of([] { parse_agent_id("acp://"); }) == Errc::EmptyPath);
  CHECK(error_code_of([] { parse_agent_id("http://root/x"); }) == Errc::BadScheme);
  try {
    parse_agent_id("acp://root/EU/x");
    FAIL("expected BadSegment");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadSegment);
    CHECK(e.data().at("index") == 1);
  }
  CHECK(error_code_of([] { parse_agent_id("acp://root//x"); }) == Errc::BadSegment);
  CHECK(error_code_of([] { parse_agent_id("acp://root/x/"); }) == Errc::BadSegment);
  CHECK(error_code_of([] { parse_agent_id("acp://root/" + std::string(64, 'a')); }) == Errc::BadSegment);
  CHECK_NOTHROW(parse_agent_id("acp://root/" + std::string(63, 'a')));
}

TEST_CASE("parse_agent_id: round trip and totality", "[core][ids][property]") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    auto id = testing::random_agent_id(rng);
    REQUIRE(parse_agent_id(format_agent_id(id)) == id);
  }
  static constexpr char kNoise[] = "acp:/AZaz09-._ \x01\xc3";
  std::uniform_int_distribution<std::size_t> len(0, 24), pick(0, sizeof(kNoise) - 2);
  for (int i = 0; i < 5000; ++i) {
    std::string s = (i % 2) ? "acp://" : "";
    auto n = len(rng);
    for (std::size_t k = 0; k < n; ++k) s.push_back(kNoise[pick(rng)]);
    try {
      auto id = parse_agent_id(s);
      CHECK(id.str() == s);
    } catch (const Error& e) {
      CHECK((e.code() == Errc::BadScheme || e.code() == Errc::EmptyPath || e.code() == Errc::BadSegment));
    }
  }
}

TEST_CASE("ServiceId formatting", "[core][ids]") {
  auto s = parse_service_id("svc://registry/root/eu");
  CHECK(s.kind == "registry");
  CHECK(s.path == std::vector<std::string>{"root", "eu"});
  CHECK(s.str() == "svc://registry/root/eu");
  CHECK(error_code_of([] { parse_service_id("svc://registry"); }) == Errc::EmptyPath);
}

// ── validate_descriptor ───────────────────────────────────────────────────

TEST_CASE("validate_descriptor: spot cases", "[core][descriptor]") {
  auto d = booking_descriptor();
  CHECK(validate_descriptor(d).ok());

  auto empty = d;
  empty.capability_tags.clear();
  auto r = validate_descriptor(empty);
  CHECK_FALSE(r.ok());
  CHECK(r.has_path("capability_tags"));

  auto dup = d;
  dup.interface.push_back(dup.interface.front());
  r = validate_descriptor(dup);
  CHECK_FALSE(r.ok());
  CHECK(r.has_path("interface[1].name"));
}

TEST_CASE("validate_descriptor: reports all violations", "[core][descriptor]") {
  auto d = booking_descriptor();
  d.capability_tags = {"Bad..Tag"};
  d.version = 0;
  d.interface.push_back(d.interface.front());
  auto r = validate_descriptor(d);
  CHECK(r.violations().size() == 3);
  CHECK(r.has_path("capability_tags[0]"));
  CHECK(r.has_path("version"));
  CHECK(r.has_path("interface[1].name"));
  CHECK(r.ok() == r.violations().empty());
}

TEST_CASE("validate_descriptor: fuzz", "[core][descriptor][property]") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 500; ++i) {
    auto d = testing::random_descriptor(rng);
    REQUIRE(validate_descriptor(d).ok());
    auto broken = d;
    switch (i % 6) {
      case 0: broken.capability_tags.clear(); break;
      case 1: broken.capability_tags.insert("UPPER.case"); break;
      case 2: broken.capability_tags.insert("trailing."); break;
      case 3:
        broken.interface.push_back({"dup", Schema{}, Schema{}});
        broken.interface.push_back({"dup", Schema{}, Schema{}});
        break;
      case 4: broken.version = 0; break;
      case 5: broken.external.decision.tags.insert(".lead"); break;
    }
    CHECK_FALSE(validate_descriptor(broken).ok());
  }
}

TEST_CASE("tag grammar", "[core][descriptor]") {
  CHECK(is_valid_tag("restaurant.search"));
  CHECK(is_valid_tag("a"));
  CHECK(is_valid_tag("a1.b2.c3"));
  CHECK_FALSE(is_valid_tag(""));
  CHECK_FALSE(is_valid_tag("a."));
  CHECK_FALSE(is_valid_tag(".a"));
  CHECK_FALSE(is_valid_tag("a..b"));
  CHECK_FALSE(is_valid_tag("a-b"));
}

// ── schema ────────────────────────────────────────────────────────────────

TEST_CASE("schema validation reports paths", "[core][schema]") {
  auto s = Schema::from_value(Value::parse(R"({"type":"map","fields":{
      "name":{"type":"string"},
      "tags":{"type":"list","items":{"type":"string"}},
      "party":{"type":"int","optional":true}}})"));
  CHECK(validate_value(s, Value::parse(R"({"name":"x","tags":["a"]})")).ok());
  auto r = validate_value(s, Value::parse(R"({"tags":["a",3],"extra":true})"));
  CHECK(r.has_path("name"));
  CHECK(r.has_path("tags[1]"));
  CHECK(r.has_path("extra"));
  CHECK(s.to_value() == Schema::from_value(s.to_value()).to_value());
  CHECK(error_code_of([] { Schema::from_value(Value::parse(R"({"type":"blob"})")); }) == Errc::BadSchema);
}

// ── envelope ──────────────────────────────────────────────────────────────

TEST_CASE("envelope invariants", "[core][envelope]") {
  Envelope env;
  env.protocol = Protocol::ARP;
  env.msg_type = "register_request";
  env.msg_id = MessageId::from_parts(1, 2);
  env.sender = "acp://root/eu/a";
  env.recipient = "svc://registry/root/eu";
  CHECK(validate_envelope(env).ok());

  auto resp = env;
  resp.msg_type = "register_result";
  CHECK(validate_envelope(resp).has_path("correlation_id"));
  resp.correlation_id = env.msg_id;
  CHECK(validate_envelope(resp).ok());

  auto req = env;
  req.correlation_id = env.msg_id;
  CHECK(validate_envelope(req).has_path("correlation_id"));

  auto bogus = env;
  bogus.msg_type = "register_result";
  bogus.protocol = Protocol::AIP;
  CHECK(validate_envelope(bogus).has_path("msg_type"));

  CHECK(Envelope::decode(env.encode()).encode() == env.encode());
}
