#include "acp/a3ap/peer.hpp"

#include "acp/a3ap/signing.hpp"

#include <algorithm>

namespace acp::a3ap {

using core::Envelope;
using core::Protocol;

Peer::Peer(Fabric& fabric, Credential credential, KeyPair keys)
    : fabric_(fabric),
      credential_(std::move(credential)),
      keys_(std::move(keys)),
      ids_(fabric.seed ? core::IdSource::seeded(*fabric.seed, credential_.agent) : core::IdSource::random()) {
  fabric_.keys.add(credential_.agent, keys_.public_key());
}

Peer::~Peer() = default;

void Peer::attach() {
  auto addr = fabric_.addresses.resolve(party());
  registration_ = fabric_.transport.register_endpoint(addr, [this](const Envelope& env) { receive(env); });
  if (registration_->address() != addr) fabric_.addresses.set(party(), registration_->address());
}

void Peer::detach() { registration_.reset(); }

Envelope Peer::send(Protocol protocol, std::string msg_type, const std::string& to, core::Value payload,
                    std::optional<core::MessageId> correlation) {
  Envelope env;
  env.protocol = protocol;
  env.msg_type = std::move(msg_type);
  env.msg_id = ids_.next_id();
  env.correlation_id = std::move(correlation);
  env.sender = party();
  env.recipient = to;
  env.timestamp = now();
  env.payload = std::move(payload);
  env = sign_envelope(std::move(env), keys_);
  fabric_.transport.send(env, fabric_.addresses.resolve(to));
  return env;
}

Envelope Peer::reply(const Envelope& request, std::string msg_type, core::Value payload) {
  return send(request.protocol, std::move(msg_type), request.sender, std::move(payload), request.msg_id);
}

std::optional<PublicKey> Peer::sender_key(const Envelope& env) const { return fabric_.keys.find(env.sender); }

const Session* Peer::session_with(const std::string& peer) const {
  auto it = sessions_.find(peer);
  return it == sessions_.end() ? nullptr : &it->second;
}

void Peer::authenticate(const std::string& responder, AuthCallback done) {
  if (const auto* s = session_with(responder)) {
    if (done) done(s, nullptr);
    return;
  }
  if (initiating_.contains(responder)) {
    // Chain the callbacks of concurrent requests for the same peer.
    auto& init = initiating_[responder];
    auto prev = std::move(init.done);
    init.done = [prev, done](const Session* s, const Error* e) {
      if (prev) prev(s, e);
      if (done) done(s, e);
    };
    return;
  }
  Initiation init;
  init.handshake = std::make_unique<InitiatorHandshake>(credential_, keys_, fabric_.trust, ids_);
  init.started = now();
  init.done = std::move(done);
  auto hello = send(Protocol::A3AP, "hello", responder, init.handshake->hello_payload());
  init.handshake->sent_hello(hello);
  initiating_.emplace(responder, std::move(init));
}

void Peer::fail_initiation(const std::string& peer, const Error& e) {
  auto it = initiating_.find(peer);
  if (it == initiating_.end()) return;
  auto done = std::move(it->second.done);
  initiating_.erase(it);
  faults_.push_back(e);
  on_session_failed(peer, e);
  if (done) done(nullptr, &e);
}

void Peer::receive(const Envelope& env) {
  if (env.recipient != party()) {
    faults_.emplace_back(Errc::Unroutable, "envelope for " + env.recipient + " delivered to " + party());
    return;
  }
  if (env.protocol == Protocol::A3AP && env.msg_type != "usage_report") {
    handle_handshake(env);
    return;
  }
  auto key = sender_key(env);
  if (!key || !verify_envelope(env, *key)) {
    rejected_.push_back(env.msg_id.hex());
    return;
  }
  try {
    handle(env);
  } catch (const Error& e) {
    faults_.push_back(e);
  }
}

void Peer::handle_handshake(const Envelope& env) {
  const std::string& peer = env.sender;
  try {
    if (env.msg_type == "hello") {
      auto hs = std::make_unique<ResponderHandshake>(credential_, keys_, fabric_.trust, ids_);
      core::Value payload;
      try {
        payload = hs->on_hello(env);
      } catch (const Error& e) {
        faults_.push_back(e);
        send(Protocol::A3AP, "auth_response", peer,
             {{"credential", credential_.to_value()}, {"error", e.to_value()}}, env.msg_id);
        return;
      }
      auto response = send(Protocol::A3AP, "auth_response", peer, std::move(payload), env.msg_id);
      hs->sent_response(response);
      responding_[peer] = std::move(hs);
    } else if (env.msg_type == "auth_response") {
      auto it = initiating_.find(peer);
      if (it == initiating_.end()) throw Error(Errc::BadProof, "unsolicited auth_response from " + peer);
      if (env.payload.contains("error")) {
        fail_initiation(peer, Error::from_value(env.payload.at("error")));
        return;
      }
      core::Value confirm_payload;
      try {
        confirm_payload = it->second.handshake->on_response(env);
      } catch (const Error& e) {
        fail_initiation(peer, e);
        return;
      }
      auto confirm = send(Protocol::A3AP, "auth_confirm", peer, std::move(confirm_payload), env.msg_id);
      it->second.handshake->sent_confirm(confirm);
    } else if (env.msg_type == "auth_confirm") {
      auto it = responding_.find(peer);
      if (it == responding_.end()) throw Error(Errc::BadProof, "unsolicited auth_confirm from " + peer);
      auto hs = std::move(it->second);
      responding_.erase(it);
      core::Value established_payload;
      try {
        established_payload = hs->on_confirm(env);
      } catch (const Error& e) {
        faults_.push_back(e);
        send(Protocol::A3AP, "auth_established", peer, {{"error", e.to_value()}}, env.msg_id);
        return;
      }
      auto established = send(Protocol::A3AP, "auth_established", peer, std::move(established_payload), env.msg_id);
      auto session = hs->sent_established(established);
      fabric_.keys.add(peer, hs->peer_credential()->public_key);
      sessions_[peer] = session;
      on_session_established(session);
    } else if (env.msg_type == "auth_established") {
      auto it = initiating_.find(peer);
      if (it == initiating_.end()) throw Error(Errc::BadProof, "unsolicited auth_established from " + peer);
      if (env.payload.contains("error")) {
        fail_initiation(peer, Error::from_value(env.payload.at("error")));
        return;
      }
      Session session;
      try {
        session = it->second.handshake->on_established(env);
      } catch (const Error& e) {
        fail_initiation(peer, e);
        return;
      }
      fabric_.keys.add(peer, it->second.handshake->peer_credential()->public_key);
      auto done = std::move(it->second.done);
      initiating_.erase(it);
      sessions_[peer] = session;
      on_session_established(session);
      if (done) done(&sessions_[peer], nullptr);
    }
  } catch (const Error& e) {
    faults_.push_back(e);
  }
}

void Peer::on_tick(std::int64_t now) {
  std::vector<std::string> expired;
  for (const auto& [peer, init] : initiating_) {
    if (now - init.started > fabric_.timeout) expired.push_back(peer);
  }
  for (const auto& peer : expired) {
    fail_initiation(peer, Error(Errc::Timeout, "no handshake reply from " + peer));
  }
}

void Runtime::remove(Peer& peer) { std::erase(peers_, &peer); }

std::vector<transport::BusEvent> Runtime::step(std::chrono::milliseconds wait) {
  auto events = transport_.pump(wait);
  ++steps_;
  const auto now = transport_.now();
  // Peers may be removed while ticking.
  auto peers = peers_;
  for (auto* p : peers) p->on_tick(now);
  return events;
}

bool Runtime::run_until(const std::function<bool()>& done, std::size_t max_steps,
                        std::chrono::milliseconds max_wall) {
  const auto deadline = std::chrono::steady_clock::now() + max_wall;
  for (std::size_t i = 0; i < max_steps; ++i) {
    if (done()) return true;
    if (std::chrono::steady_clock::now() > deadline) return false;
    step();
  }
  return done();
}

Session mutual_authenticate(Runtime& runtime, Peer& initiator, const std::string& responder, std::size_t max_steps) {
  struct Outcome {
    std::optional<Session> session;
    std::optional<Error> error;
  };
  auto outcome = std::make_shared<Outcome>();
  initiator.authenticate(responder, [outcome](const Session* s, const Error* e) {
    if (s) outcome->session = *s;
    if (e) outcome->error = *e;
  });
  runtime.run_until([&] { return outcome->session || outcome->error; }, max_steps);
  if (outcome->error) throw *outcome->error;
  if (!outcome->session) throw Error(Errc::Timeout, "handshake with " + responder + " did not finish");
  return *outcome->session;
}

}  // namespace acp::a3ap
