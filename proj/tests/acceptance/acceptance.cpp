// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include "acp/a3ap/signing.hpp"
#include "acp/adp/catalog.hpp"
#include "acp/aip/transcript_check.hpp"
#include "acp/arp/anchor_log.hpp"
#include "acp/arp/registry_service.hpp"
#include "acp/core/error.hpp"
#include "acp/harness/replay.hpp"
#include "acp/transport/socket_transport.hpp"
#include "acp/transport/sim_bus.hpp"
#include "support/aip_oracle.hpp"
#include "support/discovery_oracle.hpp"
#include "support/fixtures.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace acp;
using core::Value;

namespace {

const std::string kScenario = std::string(ACP_SOURCE_DIR) + "/scenarios/restaurant.toml";

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ── a signed-peer network on either backend ───────────────────────────────

class Probe : public a3ap::Peer {
 public:
  using a3ap::Peer::Peer;
  std::vector<core::Envelope> inbox;

 protected:
  void handle(const core::Envelope& env) override { inbox.push_back(env); }
};

struct Net {
  const bool sockets;
  std::unique_ptr<transport::Transport> bus;
  transport::AddressBook addresses;
  a3ap::KeyRing keys;
  a3ap::TrustStore trust;
  core::IdSource ids = core::IdSource::seeded(42, "acceptance");
  a3ap::Authority root{core::parse_service_id("svc://registry/root"), {"root"}, a3ap::KeyPair::generate(ids)};
  std::unique_ptr<a3ap::Fabric> fabric;
  std::unique_ptr<a3ap::Runtime> runtime;
  std::vector<a3ap::Peer*> hosted;

  explicit Net(bool use_sockets)
      : sockets(use_sockets),
        addresses(use_sockets ? transport::EndpointAddr::Kind::Socket : transport::EndpointAddr::Kind::Sim) {
    if (sockets) {
      bus = std::make_unique<transport::SocketTransport>();
    } else {
      bus = std::make_unique<transport::SimBus>();
    }
    trust.add(root.id.str(), root.keys.public_key());
    fabric = std::make_unique<a3ap::Fabric>(a3ap::Fabric{*bus, addresses, keys, trust, 42, sockets ? 5000 : 50});
    runtime = std::make_unique<a3ap::Runtime>(*bus);
  }
  ~Net() {
    for (auto* p : hosted) p->detach();
  }

  std::pair<a3ap::Credential, a3ap::KeyPair> agent(const std::string& name, const a3ap::Authority* by = nullptr) {
    auto kp = a3ap::KeyPair::generate(ids);
    return {a3ap::issue_credential("owner-1", name, kp.public_key(), by ? *by : root, 0), kp};
  }

  void host(a3ap::Peer& p) {
    keys.add(p.party(), p.keys().public_key());
    if (sockets) addresses.set(p.party(), transport::EndpointAddr::socket("127.0.0.1", 0));
    p.attach();
    runtime->add(p);
    hosted.push_back(&p);
  }

  bool run_until(const std::function<bool()>& done) {
    return runtime->run_until(done, 100000, std::chrono::seconds(10));
  }
};

const char* backend(bool sockets) { return sockets ? "socket" : "sim"; }

// ── 1: registration phases ────────────────────────────────────────────────

const std::vector<std::string> kPhaseOrder{"identity_verification", "metadata_submission", "compliance_review",
                                           "anchoring"};

// Names of the phases reported in a register_result, or an explanation.
std::vector<std::string> reported_phases(const Value& payload, bool& all_ok_but_last, bool& last_ok) {
  Value phases = payload.contains("result") ? payload.at("result").at("phases")
                                            : payload.at("error").at("data").at("phases");
  std::vector<std::string> names;
  all_ok_but_last = true;
  for (std::size_t i = 0; i < phases.size(); ++i) {
    names.push_back(phases[i].at("phase").get<std::string>());
    bool ok = phases[i].at("ok").get<bool>();
    if (i + 1 < phases.size() && !ok) all_ok_but_last = false;
    if (i + 1 == phases.size()) last_ok = ok;
  }
  return names;
}

Outcome registration_leg(bool sockets) {
  const auto start = Clock::now();
  Net net(sockets);
  arp::RegistryNode node({"root"}, net.trust, arp::tag_denylist({"weapons.sale"}));
  auto svc_cred = a3ap::issue_service_credential("operator", net.root.id, net.root.keys.public_key(), net.root, 0);
  arp::RegistryService registry(*net.fabric, svc_cred, net.root.keys, node);
  net.host(registry);

  struct Case {
    std::string name;
    std::set<std::string> tags;
    bool rogue = false;
    std::size_t expect_phases = 4;  // phases attempted
  };
  const std::vector<Case> cases = {
      {"info-scout", {"restaurant.search"}},
      {"taste-advisor", {"restaurant.recommend"}},
      {"table-keeper", {"restaurant.booking"}},
      {"route-guide", {"route.planning"}},
      {"forged", {"x"}, true, 1},           // untrusted authority: identity fails
      {"no-tags", {}, false, 2},            // invalid descriptor: metadata fails
      {"arms", {"weapons.sale"}, false, 3},  // denied tag: compliance fails
  };
  auto rogue_ids = core::IdSource::seeded(3, "rogue");
  a3ap::Authority rogue{net.root.id, {"root"}, a3ap::KeyPair::generate(rogue_ids)};

  std::vector<std::unique_ptr<Probe>> probes;
  for (const auto& c : cases) {
    auto [cred, kp] = net.agent(c.name, c.rogue ? &rogue : nullptr);
    probes.push_back(std::make_unique<Probe>(*net.fabric, cred, kp));
    net.host(*probes.back());
    core::CapabilityDescriptor d;
    d.agent = core::parse_agent_id(cred.agent);
    d.capability_tags = c.tags;
    d.version = 1;
    Value payload = {{"credential", cred.to_value()}, {"descriptor", d.to_value()}};
    probes.back()->send(core::Protocol::ARP, "register_request", registry.party(), payload);
  }
  bool answered = net.run_until([&] {
    return std::all_of(probes.begin(), probes.end(), [](const auto& p) { return !p->inbox.empty(); });
  });
  if (!answered) return {false, std::string(backend(sockets)) + ": missing register_result"};

  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& payload = probes[i]->inbox.front().payload;
    bool prefix_ok = false, last_ok = false;
    auto names = reported_phases(payload, prefix_ok, last_ok);
    std::vector<std::string> want(kPhaseOrder.begin(), kPhaseOrder.begin() + cases[i].expect_phases);
    bool success = cases[i].expect_phases == 4 && !cases[i].rogue;
    if (names != want || !prefix_ok || last_ok != success || payload.contains("result") != success) {
      return {false, std::string(backend(sockets)) + ": " + cases[i].name + " reported " + core::canonical_encode(payload)};
    }
  }
  if (node.anchor().size() != 4 || !arp::verify_anchor(node.anchor())) {
    return {false, std::string(backend(sockets)) + ": anchor log does not hold exactly the 4 accepted registrations"};
  }
  double t = seconds_since(start);
  if (t >= 1.0) return {false, std::string(backend(sockets)) + " took " + fmt("%.3f s", t)};
  return {true, std::string(backend(sockets)) + " " + fmt("%.3f s", t)};
}

// Observer-level check: the node emits the phases in order as they run.
Outcome registration_observer() {
  testing::World w;
  arp::RegistryNode node({"root"}, w.trust);
  auto id = w.agent("observer-check");
  std::vector<std::string> seen;
  node.register_agent(id.credential, testing::descriptor_for(id.credential.agent, {"a"}), 0,
                      [&](const arp::PhaseEvent& e) { seen.emplace_back(arp::to_string(e.phase)); });
  if (seen != kPhaseOrder) return {false, "observer saw a different sequence"};
  return {true, ""};
}

// ── 2: AIP order ──────────────────────────────────────────────────────────

std::vector<core::Envelope> aip_messages(const harness::Transcript& t) {
  std::vector<core::Envelope> out;
  for (const auto& ev : t.events)
    if (ev.envelope.protocol == core::Protocol::AIP) out.push_back(ev.envelope);
  return out;
}

// invites, answers -> assignments, acceptances -> starts -> per sub-task
// negotiation -> its result -> report.
std::string figure_order_problem(const std::vector<core::Envelope>& m) {
  auto first = [&](std::initializer_list<const char*> types) {
    for (std::size_t i = 0; i < m.size(); ++i)
      for (auto t : types)
        if (m[i].msg_type == t) return static_cast<long>(i);
    return static_cast<long>(m.size());
  };
  auto last = [&](std::initializer_list<const char*> types) {
    long out = -1;
    for (std::size_t i = 0; i < m.size(); ++i)
      for (auto t : types)
        if (m[i].msg_type == t) out = static_cast<long>(i);
    return out;
  };
  if (m.empty() || m.front().msg_type != "task_request") return "task_request is not first";
  if (m.back().msg_type != "task_report") return "task_report is not last";
  if (last({"group_invite"}) < 0 || last({"group_accept"}) < 0) return "no group formation";
  if (last({"group_invite", "group_accept", "group_decline"}) > first({"subtask_assign"}))
    return "group formation overlaps assignment";
  if (last({"subtask_assign", "subtask_accept"}) > first({"subtask_start"})) return "assignment overlaps execution";
  std::map<std::string, long> started, finished;
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto id = m[i].payload.value("subtask_id", std::string{});
    if (m[i].msg_type == "subtask_start") started[id] = static_cast<long>(i);
    if (m[i].msg_type == "subtask_result") finished[id] = static_cast<long>(i);
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].msg_type != "negotiate") continue;
    auto id = m[i].payload.at("subtask_id").get<std::string>();
    auto at = static_cast<long>(i);
    if (!started.contains(id) || !finished.contains(id) || at < started[id] || at > finished[id])
      return "negotiation outside its sub-task's execution";
  }
  if (started.size() != 4 || finished.size() != 4) return "not every sub-task ran";
  return {};
}

Outcome aip_order_leg(bool sockets) {
  harness::RunOptions opts;
  if (sockets) {
    opts.transport = "socket";
    opts.max_wall = std::chrono::seconds(30);
  }
  auto t = harness::run(harness::ScenarioConfig::load(kScenario), opts);
  if (!t.completed()) return {false, std::string(backend(sockets)) + ": scenario did not complete"};
  auto golden = aip_messages(t);
  if (auto problem = figure_order_problem(golden); !problem.empty()) {
    return {false, std::string(backend(sockets)) + ": " + problem};
  }
  if (!aip::check_message_order(golden).ok()) return {false, std::string(backend(sockets)) + ": golden rejected"};
  auto stats = testing::reorder_trials(golden, 1000, sockets ? 99 : 7, [](const std::vector<core::Envelope>& m) {
    return aip::check_message_order(m).ok();
  });
  std::ostringstream d;
  d << backend(sockets) << ": " << golden.size() << " messages, " << stats.violating << "/1000 violating moves, "
    << (stats.violating - stats.missed) << " rejected";
  if (stats.missed != 0 || stats.false_alarms != 0 || stats.violating == 0) {
    d << ", " << stats.false_alarms << " harmless moves rejected";
    return {false, d.str()};
  }
  return {true, d.str()};
}

// ── 3, 4: discovery ───────────────────────────────────────────────────────

Outcome discovery_oracle() {
  std::mt19937_64 rng(3);
  std::size_t mismatches = 0, total = 0;
  for (int cat = 0; cat < 200; ++cat) {
    auto entries = testing::random_catalog(rng);
    for (int k = 0; k < 50; ++k) {
      auto q = testing::random_query(rng);
      auto got = adp::discover(std::span<const adp::CatalogEntry>(entries), q);
      auto want = testing::discover_oracle(entries, q);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].agent.str() == want[i].agent && got[i].score == want[i].score;
      }
      mismatches += !same;
      ++total;
    }
  }
  return {mismatches == 0, std::to_string(total) + " queries, " + std::to_string(mismatches) + " mismatches"};
}

Outcome scoring_spot_values() {
  auto d = testing::descriptor_for("acp://root/a", {"a"});
  adp::Query partial;
  partial.required_tags = {"a", "b"};
  adp::Query full;
  full.required_tags = {"a"};
  double s1 = adp::match_score(partial, d), s2 = adp::match_score(full, d);
  bool ok = std::abs(s1 - 0.65) <= 1e-12 && std::abs(s2 - 1.0) <= 1e-12;
  return {ok, fmt("partial %.15f", s1) + fmt(", full %.15f", s2)};
}

// ── 5: signatures ─────────────────────────────────────────────────────────

Outcome signature_leg(bool sockets) {
  Net net(sockets);
  auto [ac, ak] = net.agent("alice");
  auto [bc, bk] = net.agent("bob");
  Probe alice(*net.fabric, ac, ak), bob(*net.fabric, bc, bk);
  net.host(alice);
  net.host(bob);

  constexpr int kEnvelopes = 1000, kPerEnvelope = 10;
  std::mt19937_64 rng(sockets ? 51 : 50);
  for (int i = 0; i < kEnvelopes; ++i) {
    std::string blob(1 + rng() % 40, 'x');
    for (auto& c : blob) c = static_cast<char>('a' + rng() % 26);
    alice.send(core::Protocol::ADP, "discover_request", bob.party(), {{"n", i}, {"blob", blob}, {"f", 0.5}});
  }
  if (!net.run_until([&] { return bob.inbox.size() >= kEnvelopes; })) {
    return {false, std::string(backend(sockets)) + ": " + std::to_string(bob.inbox.size()) + " envelopes arrived"};
  }
  std::size_t false_rejects = 0, accepted_mutants = 0, out_of_order = 0;
  for (int i = 0; i < kEnvelopes; ++i) {
    const auto& env = bob.inbox[static_cast<std::size_t>(i)];
    out_of_order += env.payload.at("n") != i;  // per-pair FIFO
    const auto frame = env.encode();
    false_rejects += !a3ap::verify_frame(frame, ak.public_key());
    std::uniform_int_distribution<std::size_t> pos(0, frame.size() - 1);
    for (int k = 0; k < kPerEnvelope; ++k) {
      auto mutated = frame;
      auto p = pos(rng);
      mutated[p] = static_cast<char>(static_cast<unsigned char>(mutated[p]) ^ (1 + rng() % 255));
      accepted_mutants += a3ap::verify_frame(mutated, ak.public_key());
    }
  }
  std::ostringstream d;
  d << backend(sockets) << ": " << kEnvelopes * kPerEnvelope << " mutations, " << accepted_mutants << " accepted, "
    << false_rejects << " false rejections, " << out_of_order << " out of order";
  return {accepted_mutants == 0 && false_rejects == 0 && out_of_order == 0, d.str()};
}

// ── 6: anchor log ─────────────────────────────────────────────────────────

Outcome anchor_integrity() {
  std::mt19937_64 rng(606);
  int honest_failures = 0, undetected = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    arp::AnchorLog log;
    std::size_t n = trial < 10 ? 1000 : 1 + rng() % 200;
    for (std::size_t i = 0; i < n; ++i) {
      core::Digest rh;
      for (auto& b : rh) b = static_cast<std::uint8_t>(rng());
      log.append(rh);
    }
    honest_failures += !arp::verify_anchor(log);
    auto entries = log.entries();
    auto& e = entries[rng() % entries.size()];
    switch (rng() % 4) {
      case 0: e.record_hash[rng() % 32] ^= static_cast<std::uint8_t>(1 + rng() % 255); break;
      case 1: e.prev_head[rng() % 32] ^= static_cast<std::uint8_t>(1 + rng() % 255); break;
      case 2: e.head[rng() % 32] ^= static_cast<std::uint8_t>(1 + rng() % 255); break;
      default: e.seq += 1 + rng() % 5; break;
    }
    undetected += arp::verify_anchor(entries);
  }
  return {honest_failures == 0 && undetected == 0, "1000 trials, " + std::to_string(honest_failures) +
                                                       " honest logs rejected, " + std::to_string(undetected) +
                                                       " mutations undetected"};
}

// ── 7: ledger ─────────────────────────────────────────────────────────────

Outcome ledger_reconciliation(const harness::Transcript& t) {
  auto computed = harness::invoice_from_messages(t);
  std::map<std::string, std::string> live, replayed;
  for (const auto& [payer, amount] : t.invoice.items()) live[payer] = amount.get<std::string>();
  for (const auto& [payer, amount] : computed) replayed[payer] = amount.str();
  std::ostringstream d;
  for (const auto& [payer, amount] : live) d << payer.substr(payer.rfind('/') + 1) << '=' << amount << ' ';
  return {!live.empty() && live == replayed, d.str() + (live == replayed ? "(equal)" : "(differs)")};
}

// ── 8: resolution ─────────────────────────────────────────────────────────

Outcome resolution_bound() {
  std::size_t resolutions = 0, violations = 0, failures = 0, deepest = 0, most_agents = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    testing::World w;
    arp::RegistryTree tree(w.trust);
    std::vector<std::vector<std::string>> paths{{"root"}};
    tree.add_node({"root"});
    std::size_t n_nodes = 2 + rng() % 14;
    while (paths.size() < n_nodes) {
      // Half the picks extend the newest node so deep chains are common.
      auto parent = (rng() & 1) ? paths.back() : paths[rng() % paths.size()];
      if (parent.size() > 4) continue;  // depth counts edges below the root
      auto child = parent;
      child.push_back("n" + std::to_string(paths.size()));
      tree.add_node(child);
      paths.push_back(child);
    }
    std::vector<core::AgentId> agents;
    std::size_t n_agents = 1 + rng() % 50;
    for (std::size_t i = 0; i < n_agents; ++i) {
      const auto& p = paths[rng() % paths.size()];
      auto id = w.agent_at(p, "a" + std::to_string(i));
      tree.node(p)->register_agent(id.credential, testing::descriptor_for(id.credential.agent, {"x"}), 0);
      agents.push_back(core::parse_agent_id(id.credential.agent));
    }
    deepest = std::max(deepest, tree.depth());
    most_agents = std::max(most_agents, n_agents);
    for (const auto& start : paths) {
      for (const auto& id : agents) {
        ++resolutions;
        try {
          auto res = tree.resolve(start, id);
          if (!(res.record.agent() == id)) ++failures;
          if (res.hops > (start.size() - 1) + tree.depth()) ++violations;
        } catch (const Error&) {
          ++failures;
        }
      }
    }
  }
  return {violations == 0 && failures == 0 && deepest == 4, std::to_string(resolutions) + " resolutions, " +
                                                std::to_string(failures) + " failed, " + std::to_string(violations) +
                                                " over the hop bound, max depth " + std::to_string(deepest) +
                                                ", up to " + std::to_string(most_agents) + " agents"};
}

// ── 9: end to end ─────────────────────────────────────────────────────────

Outcome end_to_end(harness::Transcript& first) {
  const auto start = Clock::now();
  first = harness::run(harness::ScenarioConfig::load(kScenario));
  double t = seconds_since(start);
  if (!first.completed()) return {false, "status " + first.status + ": " + core::canonical_encode(first.failure)};
  std::vector<int> phases;
  for (const auto& p : first.phases) phases.push_back(p.phase);
  if (phases != std::vector<int>{1, 2, 3, 4, 5, 6, 7}) return {false, "phase markers out of order"};
  bool reservation = false, route = false;
  for (const auto& a : first.report.at("aggregate")) {
    const auto& r = a.at("result");
    reservation |= r.contains("reservation") && r.at("reservation").contains("reservation_id");
    route |= r.contains("route") && r.at("route").contains("mode");
  }
  if (!reservation || !route) return {false, "report lacks a reservation or a route"};
  if (t >= 10.0) return {false, fmt("took %.3f s", t)};
  auto again = harness::run(harness::ScenarioConfig::load(kScenario));
  if (again.transcript_hash != first.transcript_hash) return {false, "re-run changed the transcript hash"};
  return {true, fmt("%.3f s, ", t) + std::to_string(first.steps) + " steps, hash " +
                    first.transcript_hash.substr(0, 16) + "... stable"};
}

Outcome guarded(const std::function<Outcome()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return {false, std::string(acp::to_string(e.code())) + ": " + e.detail()};
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
}

Outcome both(const Outcome& a, const Outcome& b) { return {a.pass && b.pass, a.detail + "; " + b.detail}; }

}  // namespace

int main() {
  int failed = 0;
  auto line = [&](int n, const std::string& title, const Outcome& o) {
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " - " << title << " [" << o.detail << "]"
              << std::endl;
    failed += !o.pass;
  };

  auto reg_sim = guarded([] {
    auto o = registration_observer();
    if (!o.pass) return o;
    return registration_leg(false);
  });
  auto reg_sock = guarded([] { return registration_leg(true); });
  auto order_sim = guarded([] { return aip_order_leg(false); });
  auto order_sock = guarded([] { return aip_order_leg(true); });
  auto sig_sim = guarded([] { return signature_leg(false); });
  auto sig_sock = guarded([] { return signature_leg(true); });
  harness::Transcript golden;
  auto e2e = guarded([&] { return end_to_end(golden); });

  line(1, "registration runs the four phases in order and stops at a failure (< 1 s)", reg_sim);
  line(2, "happy-path AIP order; validator rejects every violating single-message move", order_sim);
  line(3, "discover equals the brute-force oracle on 200 catalogs x 50 queries", guarded(discovery_oracle));
  line(4, "match_score spot values 0.65 and 1.0 within 1e-12", guarded(scoring_spot_values));
  line(5, "10,000 single-byte mutations all fail verification; no false rejections", sig_sim);
  line(6, "anchor log verifies honestly and detects single-entry mutations", guarded(anchor_integrity));
  line(7, "replayed invoice equals the live ledger invoice",
       golden.completed() ? guarded([&] { return ledger_reconciliation(golden); })
                          : Outcome{false, "no completed scenario run"});
  line(8, "resolution hop bound on random registry trees", guarded(resolution_bound));
  line(9, "bundled scenario completes with seven phases, reservation and route, stable hash (< 10 s)", e2e);
  line(10, "criteria 1, 2 and 5 on the socket backend, per-pair FIFO", both(both(reg_sock, order_sock), sig_sock));

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
