#include <catch_amalgamated.hpp>

#include "acp/core/error.hpp"
#include "acp/harness/replay.hpp"
#include "acp/harness/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

using namespace acp;
using core::Value;

namespace {

const std::string kScenario = std::string(ACP_SOURCE_DIR) + "/scenarios/restaurant.toml";

harness::ScenarioConfig restaurant() { return harness::ScenarioConfig::load(kScenario); }

// One bundled run shared by the read-only checks below.
const harness::Transcript& bundled_run() {
  static const harness::Transcript t = harness::run(restaurant());
  return t;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("acp-harness-" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<const core::Envelope*> of_type(const harness::Transcript& t, const std::string& type) {
  std::vector<const core::Envelope*> out;
  for (const auto& ev : t.events)
    if (ev.envelope.msg_type == type) out.push_back(&ev.envelope);
  return out;
}

std::set<std::string> rules(const harness::Verdict& v) {
  std::set<std::string> out;
  for (const auto& x : v.report.violations()) out.insert(x.rule);
  return out;
}

}  // namespace

TEST_CASE("config: toml values keep their types", "[harness][config]") {
  auto v = harness::parse_toml("a = 1\nb = 1.0\nc = \"x\"\nd = [1, 2]\n[e]\nf = true\n");
  CHECK(v.at("a").is_number_integer());
  CHECK(v.at("b").is_number_float());
  CHECK(v.at("c") == "x");
  CHECK(v.at("d") == Value::array({1, 2}));
  CHECK(v.at("e").at("f") == true);
  CHECK_THROWS_MATCHES(harness::parse_toml("a = [1,\n"), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::ParseError; }));
}

TEST_CASE("config: bundled scenario loads and validates", "[harness][config]") {
  auto cfg = restaurant();
  REQUIRE_NOTHROW(cfg.validate());
  CHECK(cfg.seed == 42);
  CHECK(cfg.registries.size() == 3);
  CHECK(cfg.agents.size() == 5);
  CHECK(cfg.tools.size() == 5);
  CHECK(cfg.replies.contains("recommendation:info_request"));

  SECTION("JSON form with the same layout loads to the same config") {
    auto dir = temp_dir("json");
    auto v = cfg.to_value();
    v["tools"]["fixtures"] = cfg.fixtures_dir.string();
    {
      std::ofstream out(dir / "restaurant.json");
      out << core::canonical_encode(v);
    }
    auto again = harness::ScenarioConfig::load(dir / "restaurant.json");
    CHECK_NOTHROW(again.validate());
    auto a = again.to_value();
    auto b = cfg.to_value();
    a["tools"].erase("fixtures");
    b["tools"].erase("fixtures");
    CHECK(a == b);
  }
}

TEST_CASE("config: cross-reference problems are reported by path", "[harness][config]") {
  auto expect_problem = [](const harness::ScenarioConfig& cfg, const std::string& path, const std::string& rule) {
    try {
      cfg.validate();
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::ConfigError);
      auto report = core::ValidationReport::from_value(e.data().at("problems"));
      bool found = false;
      for (const auto& v : report.violations()) found |= v.path == path && v.rule == rule;
      INFO(e.data().dump());
      CHECK(found);
    }
  };
  SECTION("unknown script") {
    auto cfg = restaurant();
    cfg.agents[1].script = "nope";
    expect_problem(cfg, "agents[1].script", "unknown_script");
  }
  SECTION("duplicate roster id") {
    auto cfg = restaurant();
    cfg.agents[2].principal = cfg.agents[0].principal;
    expect_problem(cfg, "agents[2].name", "duplicate");
  }
  SECTION("missing fixture file") {
    auto cfg = restaurant();
    cfg.resources[0]["config"]["file"] = "no-such-file.json";
    expect_problem(cfg, "tools.resources[0].config.file", "missing_fixture");
  }
  SECTION("registry listed before its parent") {
    auto cfg = restaurant();
    std::swap(cfg.registries[1], cfg.registries[2]);
    expect_problem(cfg, "registry.paths[1]", "orphan");
  }
  SECTION("agent under an unknown registry") {
    auto cfg = restaurant();
    cfg.agents[0].principal.registry = {"root", "eu"};
    expect_problem(cfg, "agents[0].registry", "unknown_registry");
  }
  SECTION("tool naming a missing resource") {
    auto cfg = restaurant();
    cfg.tools[0]["resource_id"] = "ghost";
    expect_problem(cfg, "tools.tools[0].resource_id", "unknown_resource");
  }
  SECTION("goal without sub-goals") {
    auto cfg = restaurant();
    cfg.goal["sub_goals"] = Value::array();
    expect_problem(cfg, "goal", "invalid");
  }
}

TEST_CASE("scenario: bundled config completes with all seven phases", "[harness][scenario]") {
  auto start = std::chrono::steady_clock::now();
  auto t = harness::run(restaurant());
  auto elapsed = std::chrono::steady_clock::now() - start;
  INFO(core::canonical_encode(t.failure));
  REQUIRE(t.completed());
  CHECK(elapsed < std::chrono::seconds(10));
  CHECK(t.steps < 5000);

  std::vector<int> phases;
  for (const auto& p : t.phases) phases.push_back(p.phase);
  CHECK(phases == std::vector<int>{1, 2, 3, 4, 5, 6, 7});

  // Final report: a reservation and a route.
  const auto& agg = t.report.at("aggregate");
  REQUIRE(agg.size() == 4);
  std::map<std::string, Value> by_goal;
  for (const auto& a : agg) by_goal[a.at("sub_goal").get<std::string>()] = a.at("result");
  const auto& reservation = by_goal.at("booking").at("reservation");
  CHECK(reservation.at("restaurant") == "Bamboo Garden");
  CHECK(reservation.at("time") == "19:30");
  CHECK(reservation.at("party_size") == 2);
  CHECK_FALSE(reservation.at("reservation_id").get<std::string>().empty());
  const auto& route = by_goal.at("travel").at("route");
  CHECK(route.at("destination") == "Bamboo Garden");
  CHECK(route.at("origin") == "home");
}

TEST_CASE("scenario: transcript carries the expected traffic", "[harness][scenario]") {
  const auto& t = bundled_run();
  REQUIRE(t.completed());
  const std::string assistant = "acp://root/assistant";
  const std::string anchor = "svc://registry/root";

  // One mutual-auth handshake between the assistant and the registry domain.
  std::size_t hellos = 0;
  for (const auto* e : of_type(t, "hello")) hellos += e->sender == assistant && e->recipient == anchor;
  CHECK(hellos == 1);
  CHECK(of_type(t, "auth_established").size() >= 1);

  // The first discovery answer names at least four agents.
  auto results = of_type(t, "discover_result");
  REQUIRE_FALSE(results.empty());
  CHECK(results.front()->payload.at("results").size() >= 4);

  CHECK(of_type(t, "group_invite").size() == 4);
  CHECK(of_type(t, "group_accept").size() == 4);
  CHECK(of_type(t, "subtask_assign").size() == 4);
  CHECK(of_type(t, "subtask_result").size() == 4);
  CHECK(of_type(t, "task_report").size() == 1);

  std::multiset<std::string> tools;
  for (const auto* e : of_type(t, "tool_invoke")) tools.insert(e->payload.at("tool_id").get<std::string>());
  CHECK(tools.size() >= 5);
  for (const char* id : {"restaurant.search", "restaurant.recommend", "restaurant.availability", "restaurant.book",
                         "maps.route"}) {
    CHECK(tools.count(id) == 1);
  }

  // The restaurant choice is escalated and answered from the user script.
  auto prompts = of_type(t, "user_prompt");
  REQUIRE(prompts.size() == 2);
  CHECK(prompts[0]->payload.at("prompt_id") == "recommendation:info_request");
  CHECK(prompts[1]->payload.at("prompt_id") == "booking:proposal");
  auto replies = of_type(t, "user_reply");
  REQUIRE(replies.size() == 2);
  CHECK(replies[0]->payload.at("answer").at("restaurant") == "Bamboo Garden");
  CHECK(t.faults.empty());
}

TEST_CASE("scenario: same config and seed give the same transcript hash", "[harness][scenario]") {
  auto a = harness::run(restaurant());
  auto b = harness::run(restaurant());
  CHECK(a.transcript_hash == b.transcript_hash);
  CHECK(a.transcript_hash == a.compute_hash());
  auto cfg = restaurant();
  cfg.seed = 43;
  auto c = harness::run(cfg);
  CHECK(c.completed());
  CHECK(c.transcript_hash != a.transcript_hash);
}

TEST_CASE("scenario: no matching restaurant fails in phase 6", "[harness][scenario]") {
  auto dir = temp_dir("empty");
  auto cfg = restaurant();
  {
    auto src = cfg.fixtures_dir / "restaurants.json";
    std::ifstream in(src);
    std::stringstream buf;
    buf << in.rdbuf();
    auto doc = core::canonical_decode(buf.str());
    doc["records"] = Value::array();
    std::ofstream out(dir / "restaurants.json");
    out << core::canonical_encode(doc);
  }
  cfg.resources[0]["config"]["file"] = (dir / "restaurants.json").string();
  try {
    harness::run_scenario(cfg);
    FAIL("expected ScenarioFailed");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::ScenarioFailed);
    CHECK(e.data().at("phase") == 6);
    CHECK(e.data().at("cause").at("code") == "SubtaskFailed");
    auto t = harness::Transcript::from_value(e.data().at("transcript"));
    CHECK_FALSE(t.completed());
    bool rejected = false;
    for (const auto* n : of_type(t, "negotiate")) {
      rejected |= n->sender == "acp://root/cn/beijing/info-scout" && n->payload.at("kind") == "reject";
    }
    CHECK(rejected);
    REQUIRE(of_type(t, "task_report").size() == 1);
    CHECK(t.report.at("status") == "failed");
    CHECK(t.report.at("failure").at("sub_goal") == "information");
    CHECK(harness::replay(t).clean());
  }
}

TEST_CASE("replay: untampered transcript is clean", "[harness][replay]") {
  const auto& t = bundled_run();
  auto v = harness::replay(t);
  INFO(core::canonical_encode(v.to_value()));
  CHECK(v.clean());

  auto file = temp_dir("replay") / "transcript.json";
  t.save(file);
  auto loaded = harness::Transcript::load(file);
  CHECK(loaded.transcript_hash == t.transcript_hash);
  CHECK(loaded.compute_hash() == t.transcript_hash);
  CHECK(harness::replay_file(file).clean());
}

TEST_CASE("replay: a flipped payload byte is located by seq", "[harness][replay][property]") {
  const auto& base = bundled_run();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = base;
    // Pick an event with a non-empty string somewhere in its payload.
    std::uniform_int_distribution<std::size_t> pick(0, t.events.size() - 1);
    auto& ev = t.events[pick(rng)];
    std::vector<Value*> strings;
    std::function<void(Value&)> walk = [&](Value& v) {
      if (v.is_string() && !v.get_ref<std::string&>().empty()) strings.push_back(&v);
      if (v.is_object() || v.is_array())
        for (auto& c : v) walk(c);
    };
    walk(ev.envelope.payload);
    if (strings.empty()) continue;
    auto& s = strings[std::uniform_int_distribution<std::size_t>(0, strings.size() - 1)(rng)]->get_ref<std::string&>();
    auto i = std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng);
    s[i] = s[i] == 'x' ? 'y' : 'x';
    t.transcript_hash = t.compute_hash();  // re-sealing the file does not hide the edit

    auto v = harness::replay(t);
    bool located = false;
    for (const auto& x : v.report.violations()) located |= x.rule == "signature" && x.path == "seq=" + std::to_string(ev.seq);
    INFO("seq " << ev.seq << " " << ev.envelope.msg_type);
    CHECK(located);
  }
}

TEST_CASE("replay: tampering is reported under the right rule", "[harness][replay]") {
  const auto& base = bundled_run();
  auto seal = [](harness::Transcript& t) { t.transcript_hash = t.compute_hash(); };

  SECTION("content changed without resealing") {
    auto t = base;
    t.steps += 1;
    CHECK(rules(harness::replay(t)) == std::set<std::string>{"hash"});
  }
  SECTION("reordered phase markers") {
    auto t = base;
    std::swap(t.phases[2], t.phases[4]);
    seal(t);
    CHECK(rules(harness::replay(t)) == std::set<std::string>{"phase_order"});
  }
  SECTION("missing phase marker") {
    auto t = base;
    t.phases.erase(t.phases.begin() + 3);
    seal(t);
    CHECK(rules(harness::replay(t)).contains("phase_order"));
  }
  SECTION("illegal state transition") {
    auto t = base;
    // Executing -> Completed skips aggregation.
    for (auto it = t.transitions.begin(); it != t.transitions.end(); ++it) {
      if (it->second.to == aip::TaskState::Aggregating) {
        t.transitions.erase(it);
        break;
      }
    }
    seal(t);
    CHECK(rules(harness::replay(t)) == std::set<std::string>{"transition"});
  }
  SECTION("anchor log entry mutated") {
    auto t = base;
    auto& log = t.anchors.at("svc://registry/root/cn");
    auto head = log[0].at("record_hash").get<std::string>();
    head[0] = head[0] == '0' ? '1' : '0';
    log[0]["record_hash"] = head;
    seal(t);
    CHECK(rules(harness::replay(t)).contains("anchor"));
  }
  SECTION("invoice disagrees with the calls") {
    auto t = base;
    auto payer = t.invoice.begin().key();
    t.invoice[payer] = "9.000000";
    seal(t);
    CHECK(rules(harness::replay(t)) == std::set<std::string>{"invoice"});
  }
  SECTION("AIP messages out of order") {
    auto t = base;
    std::size_t report = 0, result = 0;
    for (std::size_t i = 0; i < t.events.size(); ++i) {
      if (t.events[i].envelope.msg_type == "task_report") report = i;
      if (t.events[i].envelope.msg_type == "subtask_result" && result == 0) result = i;
    }
    std::swap(t.events[report].envelope, t.events[result].envelope);
    seal(t);
    CHECK(rules(harness::replay(t)).contains("aip_order"));
  }
  SECTION("unparseable file") {
    auto file = temp_dir("bad") / "bad.json";
    std::ofstream(file) << "{\"events\": [";
    CHECK_THROWS_MATCHES(harness::replay_file(file), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::ParseError; }));
  }
}

TEST_CASE("replay: invoice equals the live ledger and hand-computed charges", "[harness][ledger]") {
  const auto& t = bundled_run();
  auto v = harness::replay(t);
  REQUIRE(v.clean());
  std::map<std::string, std::string> live;
  for (const auto& [payer, amount] : t.invoice.items()) live[payer] = amount.get<std::string>();
  std::map<std::string, std::string> replayed;
  for (const auto& [payer, amount] : v.invoice) replayed[payer] = amount.str();
  CHECK(replayed == live);

  // Token price 0.0005 and call price 0.01 from the bundled config; one call
  // per tool: search 40 tokens; recommend 60; availability 10 + book 25;
  // route 30.
  CHECK(live == std::map<std::string, std::string>{
                    {"acp://root/cn/beijing/info-scout", "0.030000"},     // 0.020 + 0.010
                    {"acp://root/cn/taste-advisor", "0.040000"},          // 0.030 + 0.010
                    {"acp://root/cn/beijing/table-keeper", "0.037500"},   // 0.0175 + 0.020
                    {"acp://root/cn/route-guide", "0.025000"},            // 0.015 + 0.010
                });
}

TEST_CASE("scenario: interactive answers replace the canned replies", "[harness][scenario]") {
  harness::RunOptions opts;
  std::vector<std::string> asked;
  opts.ask = [&](const Value& prompt) -> Value {
    asked.push_back(prompt.at("prompt_id").get<std::string>());
    if (prompt.at("kind") == "info_request") return {{"restaurant", "Lotus Leaf"}};
    return {{"accept", true}};
  };
  auto t = harness::run(restaurant(), opts);
  REQUIRE(t.completed());
  CHECK(asked == std::vector<std::string>{"recommendation:info_request"});
  for (const auto& a : t.report.at("aggregate")) {
    if (a.at("sub_goal") == "booking") CHECK(a.at("result").at("reservation").at("restaurant") == "Lotus Leaf");
    if (a.at("sub_goal") == "travel") CHECK(a.at("result").at("route").at("mode") == "subway");
  }
}

TEST_CASE("scenario: socket transport runs the same flow", "[harness][scenario][socket]") {
  harness::RunOptions opts;
  opts.transport = "socket";
  opts.max_wall = std::chrono::seconds(30);
  auto t = harness::run(restaurant(), opts);
  INFO(core::canonical_encode(t.failure));
  REQUIRE(t.completed());
  CHECK(t.transport == "socket");
  auto v = harness::replay(t);
  INFO(core::canonical_encode(v.to_value()));
  CHECK(v.clean());

  // Per-pair FIFO: every sender's messages to one recipient arrive in send order.
  std::map<std::pair<std::string, std::string>, std::int64_t> last;
  for (const auto& ev : t.events) {
    auto key = std::make_pair(ev.envelope.sender, ev.envelope.recipient);
    auto [it, fresh] = last.try_emplace(key, ev.envelope.timestamp);
    if (!fresh) {
      CHECK(ev.envelope.timestamp >= it->second);
      it->second = ev.envelope.timestamp;
    }
  }
}
