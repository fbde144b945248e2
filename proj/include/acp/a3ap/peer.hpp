#pragma once

#include "acp/a3ap/credential.hpp"
#include "acp/a3ap/handshake.hpp"
#include "acp/a3ap/keys.hpp"
#include "acp/core/envelope.hpp"
#include "acp/core/error.hpp"
#include "acp/transport/transport.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace acp::a3ap {

// Deployment wiring shared by every principal hosted in one process.
struct Fabric {
  transport::Transport& transport;
  transport::AddressBook& addresses;
  KeyRing& keys;             // public keys of known principals (learned keys are added)
  const TrustStore& trust;   // configured authority roots
  std::optional<std::uint64_t> seed;  // set: reproducible ids and nonces
  std::int64_t timeout = 50;          // sim steps, or milliseconds on sockets
};

// A signed-messaging endpoint. Every outgoing envelope is signed with the
// principal's key; every incoming envelope is verified before dispatch.
// Handshake traffic (A3AP hello..auth_established) is handled here; all
// other traffic reaches handle().
class Peer {
 public:
  Peer(Fabric& fabric, Credential credential, KeyPair keys);
  virtual ~Peer();
  Peer(const Peer&) = delete;
  Peer& operator=(const Peer&) = delete;

  // Registers the endpoint; socket endpoints publish their bound port to the
  // address book.
  void attach();
  void detach();

  const std::string& party() const noexcept { return credential_.agent; }
  const Credential& credential() const noexcept { return credential_; }
  const KeyPair& keys() const noexcept { return keys_; }
  std::int64_t now() const { return fabric_.transport.now(); }

  core::Envelope send(core::Protocol protocol, std::string msg_type, const std::string& to, core::Value payload,
                      std::optional<core::MessageId> correlation = std::nullopt);
  core::Envelope reply(const core::Envelope& request, std::string msg_type, core::Value payload);

  using AuthCallback = std::function<void(const Session*, const Error*)>;
  void authenticate(const std::string& responder, AuthCallback done = {});
  const Session* session_with(const std::string& peer) const;
  const std::map<std::string, Session>& sessions() const noexcept { return sessions_; }

  virtual void on_tick(std::int64_t now);

  // Envelopes dropped because their signature did not verify (msg ids).
  const std::vector<std::string>& rejected() const noexcept { return rejected_; }
  // Errors raised while handling otherwise valid envelopes.
  const std::vector<Error>& faults() const noexcept { return faults_; }

 protected:
  virtual void handle(const core::Envelope& env) = 0;
  // Key used to verify a non-handshake envelope; defaults to the key ring.
  virtual std::optional<PublicKey> sender_key(const core::Envelope& env) const;
  virtual void on_session_established(const Session&) {}
  virtual void on_session_failed(const std::string& /*peer*/, const Error&) {}

  Fabric& fabric() noexcept { return fabric_; }
  const Fabric& fabric() const noexcept { return fabric_; }
  core::IdSource& ids() noexcept { return ids_; }
  void record_fault(const Error& e) { faults_.push_back(e); }

 private:
  void receive(const core::Envelope& env);
  void handle_handshake(const core::Envelope& env);
  void fail_initiation(const std::string& peer, const Error& e);

  struct Initiation {
    std::unique_ptr<InitiatorHandshake> handshake;
    std::int64_t started = 0;
    AuthCallback done;
  };

  Fabric& fabric_;
  Credential credential_;
  KeyPair keys_;
  core::IdSource ids_;
  std::optional<transport::Registration> registration_;
  std::map<std::string, Initiation> initiating_;
  std::map<std::string, std::unique_ptr<ResponderHandshake>> responding_;
  std::map<std::string, Session> sessions_;
  std::vector<std::string> rejected_;
  std::vector<Error> faults_;
};

// Drives a transport and the peers hosted on it. On the sim bus each step
// is one bus step followed by a tick to every peer.
class Runtime {
 public:
  explicit Runtime(transport::Transport& transport) : transport_(transport) {}

  void add(Peer& peer) { peers_.push_back(&peer); }
  void remove(Peer& peer);

  std::vector<transport::BusEvent> step(std::chrono::milliseconds wait = std::chrono::milliseconds(5));
  // True when done() held before max_steps steps / max_wall elapsed.
  bool run_until(const std::function<bool()>& done, std::size_t max_steps,
                 std::chrono::milliseconds max_wall = std::chrono::seconds(10));
  std::size_t steps() const noexcept { return steps_; }
  transport::Transport& transport() noexcept { return transport_; }

 private:
  transport::Transport& transport_;
  std::vector<Peer*> peers_;
  std::size_t steps_ = 0;
};

// Runs the four-message handshake between a hosted initiator and responder
// to completion. Throws Error(BadCredential | BadProof | Timeout).
Session mutual_authenticate(Runtime& runtime, Peer& initiator, const std::string& responder,
                            std::size_t max_steps = 200);

}  // namespace acp::a3ap
