#include "acp/harness/replay.hpp"

#include "acp/a3ap/keys.hpp"
#include "acp/a3ap/signing.hpp"
#include "acp/aip/transcript_check.hpp"
#include "acp/arp/anchor_log.hpp"
#include "acp/arp/registry_node.hpp"
#include "acp/core/error.hpp"

#include <fstream>
#include <sstream>

namespace acp::harness {
namespace {

using core::Value;

std::string at_seq(std::uint64_t seq) { return "seq=" + std::to_string(seq); }

void check_signatures(const Transcript& t, core::ValidationReport& r) {
  std::map<std::string, a3ap::PublicKey> keys;
  for (const auto& [party, hex] : t.keys.items()) {
    try {
      keys[party] = a3ap::public_key_from_hex(hex.get<std::string>());
    } catch (const std::exception&) {
      r.add("keys." + party, "unknown_sender", "unreadable public key");
    }
  }
  for (const auto& ev : t.events) {
    auto it = keys.find(ev.envelope.sender);
    if (it == keys.end()) {
      r.add(at_seq(ev.seq), "unknown_sender", ev.envelope.sender);
      continue;
    }
    if (!a3ap::verify_envelope(ev.envelope, it->second)) {
      r.add(at_seq(ev.seq), "signature", ev.envelope.msg_type + " from " + ev.envelope.sender);
    }
  }
}

void check_aip(const Transcript& t, core::ValidationReport& r) {
  auto envs = t.envelopes();
  auto report = aip::check_message_order(envs);
  for (const auto& v : report.violations()) {
    std::string path = v.path;
    // "messages[i]..." -> "seq=<n>..."
    if (path.rfind("messages[", 0) == 0) {
      auto close = path.find(']');
      auto i = std::stoul(path.substr(9, close - 9));
      if (i < t.events.size()) path = at_seq(t.events[i].seq) + path.substr(close + 1);
    }
    r.add(path, "aip_order", v.rule + (v.detail.empty() ? "" : ": " + v.detail));
  }
}

void check_transitions(const Transcript& t, core::ValidationReport& r) {
  std::map<std::string, std::vector<aip::Transition>> by_task;
  for (const auto& [task, tr] : t.transitions) by_task[task].push_back(tr);
  for (const auto& [task, list] : by_task) {
    auto report = aip::check_transitions(list);
    for (const auto& v : report.violations()) {
      r.add("transitions." + task + "." + v.path, "transition", v.rule + (v.detail.empty() ? "" : ": " + v.detail));
    }
  }
  if (t.completed()) {
    auto it = by_task.find(t.report.value("task_id", std::string{}));
    if (it == by_task.end() || it->second.empty() || it->second.back().to != aip::TaskState::Completed) {
      r.add("transitions", "transition", "completed run without a Completed transition");
    }
  }
}

void check_registrations(const Transcript& t, core::ValidationReport& r) {
  std::map<std::string, std::vector<arp::AnchorEntry>> logs;
  for (const auto& [registry, log] : t.anchors.items()) {
    try {
      logs[registry] = arp::AnchorLog::from_value(log).entries();
    } catch (const Error& e) {
      r.add("anchors." + registry, "anchor", e.detail());
      continue;
    }
    if (!arp::verify_anchor(logs[registry])) r.add("anchors." + registry, "anchor", "hash chain does not verify");
  }
  for (const auto& ev : t.events) {
    const auto& env = ev.envelope;
    if (env.msg_type != "register_result" || env.payload.value("op", std::string{}) != "register") continue;
    Value phases = env.payload.contains("result") ? env.payload.at("result").value("phases", Value::array())
                                                  : env.payload.at("error").value("data", Value::object())
                                                        .value("phases", Value::array());
    for (std::size_t i = 0; i < phases.size(); ++i) {
      auto want = i < std::size(arp::kPhases) ? std::string(arp::to_string(arp::kPhases[i])) : std::string("?");
      if (phases[i].value("phase", std::string{}) != want) {
        r.add(at_seq(ev.seq), "registration", "phase " + std::to_string(i) + " is not " + want);
        break;
      }
      bool last = i + 1 == phases.size();
      if (!phases[i].value("ok", false) && !last) {
        r.add(at_seq(ev.seq), "registration", "phases continued after a failure");
        break;
      }
    }
    if (!env.payload.contains("result")) continue;
    if (phases.size() != std::size(arp::kPhases)) {
      r.add(at_seq(ev.seq), "registration", "accepted registration without all four phases");
    }
    const auto& res = env.payload.at("result");
    auto log = logs.find(env.sender);
    auto seq = res.value("anchor_seq", std::uint64_t{0});
    if (log == logs.end() || seq == 0 || seq > log->second.size()) {
      r.add(at_seq(ev.seq), "anchor", "anchor seq " + std::to_string(seq) + " missing from " + env.sender);
      continue;
    }
    if (core::to_hex(log->second[seq - 1].head) != res.value("anchor_head", std::string{})) {
      r.add(at_seq(ev.seq), "anchor", "anchor head differs from the registry log");
    }
  }
}

void check_phases(const Transcript& t, core::ValidationReport& r) {
  std::map<std::string, std::vector<int>> by_task;
  for (const auto& p : t.phases) by_task[p.task_id].push_back(p.phase);
  for (const auto& [task, seq] : by_task) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] != static_cast<int>(i) + 1) {
        r.add("phases." + task + "[" + std::to_string(i) + "]", "phase_order",
              "expected phase " + std::to_string(i + 1) + ", found " + std::to_string(seq[i]));
        break;
      }
    }
    if (t.completed() && seq.size() != 7) {
      r.add("phases." + task, "phase_order", "completed run with " + std::to_string(seq.size()) + " phase markers");
    }
  }
  if (t.completed() && by_task.empty()) r.add("phases", "phase_order", "completed run without phase markers");
}

void check_invoice(const Transcript& t, const std::map<std::string, a3ap::Amount>& computed,
                   core::ValidationReport& r) {
  std::map<std::string, std::string> live;
  for (const auto& [payer, amount] : t.invoice.items()) live[payer] = amount.get<std::string>();
  for (const auto& [payer, amount] : computed) {
    auto it = live.find(payer);
    if (it == live.end() || it->second != amount.str()) {
      r.add("invoice." + payer, "invoice",
            "messages imply " + amount.str() + ", ledger says " + (it == live.end() ? "nothing" : it->second));
    }
  }
  for (const auto& [payer, amount] : live) {
    if (!computed.contains(payer) && a3ap::Amount::parse(amount).micros() != 0) {
      r.add("invoice." + payer, "invoice", "ledger charges " + amount + " with no matching tool call");
    }
  }
}

}  // namespace

Value Verdict::to_value() const {
  Value inv = Value::object();
  for (const auto& [payer, amount] : invoice) inv[payer] = amount.str();
  return {{"clean", clean()}, {"violations", report.to_value()}, {"invoice", inv}};
}

std::map<std::string, a3ap::Amount> invoice_from_messages(const Transcript& t) {
  const auto tools_cfg = t.config.value("tools", Value::object());
  std::map<std::string, std::int64_t> cost;
  for (const auto& tool : tools_cfg.value("tools", Value::array())) {
    cost[tool.value("tool_id", std::string{})] = tool.value("cost_tokens_per_call", std::int64_t{0});
  }
  const bool per_call = tools_cfg.value("call_metering", false);
  const auto billing = a3ap::BillingPolicy::from_value(
      t.config.value("billing", Value{{"price_per_token", "0"}, {"price_per_call", "0"}}));

  std::map<std::string, const core::Envelope*> requests;  // msg id -> request
  std::map<std::string, a3ap::Amount> out;
  auto charge = [&](const std::string& payer, const std::string& tool_id) {
    auto tokens = cost.count(tool_id) ? cost.at(tool_id) : 0;
    auto amount = a3ap::Amount::from_micros(tokens * billing.price_per_token.micros());
    if (per_call) amount += billing.price_per_call;
    if (tokens > 0 || per_call) out[payer] += amount;
  };
  for (const auto& ev : t.events) {
    const auto& env = ev.envelope;
    if (env.msg_type == "tool_invoke" || env.msg_type == "workflow_submit") requests[env.msg_id.hex()] = &env;
    if (!env.correlation_id || env.payload.contains("error")) continue;
    auto req = requests.find(env.correlation_id->hex());
    if (req == requests.end()) continue;
    const auto& request = *req->second;
    if (env.msg_type == "tool_result" && env.payload.value("op", std::string{}) == "invoke") {
      charge(request.sender, request.payload.value("tool_id", std::string{}));
    } else if (env.msg_type == "workflow_status") {
      std::map<std::string, std::string> step_tool;
      for (const auto& s : request.payload.at("workflow").value("steps", Value::array())) {
        step_tool[s.value("step_id", std::string{})] = s.value("tool_id", std::string{});
      }
      for (const auto& e : env.payload.at("run").value("trace", Value::array())) {
        if (e.value("outcome", std::string{}) == "success") charge(request.sender, step_tool[e.value("step_id", "")]);
      }
    }
  }
  return out;
}

Verdict replay(const Transcript& t) {
  Verdict v;
  if (t.compute_hash() != t.transcript_hash) v.report.add("transcript_hash", "hash", "content does not match the hash");
  check_signatures(t, v.report);
  check_aip(t, v.report);
  check_transitions(t, v.report);
  check_registrations(t, v.report);
  check_phases(t, v.report);
  try {
    v.invoice = invoice_from_messages(t);
    check_invoice(t, v.invoice, v.report);
  } catch (const std::exception& e) {
    v.report.add("invoice", "invoice", e.what());
  }
  return v;
}

Verdict replay_file(const std::filesystem::path& file) { return replay(Transcript::load(file)); }

}  // namespace acp::harness
