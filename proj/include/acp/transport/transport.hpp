#pragma once

#include "acp/core/envelope.hpp"
#include "acp/transport/endpoint.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <vector>

namespace acp::transport {

using Inbox = std::function<void(const core::Envelope&)>;

struct BusEvent {
  std::uint64_t seq = 0;
  core::Envelope envelope;
  std::int64_t delivered_at = 0;
  std::string to;  // endpoint the envelope was delivered to
};

struct DeliveryTicket {
  std::uint64_t send_index = 0;
  bool written = false;  // socket: frame fully written; sim: queued
};

class Transport;

// Deregisters the endpoint when destroyed.
class Registration {
 public:
  Registration() = default;
  Registration(Transport* owner, std::uint64_t token, EndpointAddr bound)
      : owner_(owner), token_(token), bound_(std::move(bound)) {}
  Registration(Registration&& other) noexcept { *this = std::move(other); }
  Registration& operator=(Registration&& other) noexcept;
  Registration(const Registration&) = delete;
  Registration& operator=(const Registration&) = delete;
  ~Registration() { release(); }

  void release();
  bool active() const noexcept { return owner_ != nullptr; }
  // The address actually bound (socket port 0 resolves to the ephemeral port).
  const EndpointAddr& address() const noexcept { return bound_; }

 private:
  Transport* owner_ = nullptr;
  std::uint64_t token_ = 0;
  EndpointAddr bound_;
};

class Transport {
 public:
  virtual ~Transport() = default;

  // Throws Error(AddrInUse) when the address is already registered.
  virtual Registration register_endpoint(const EndpointAddr& addr, Inbox inbox) = 0;

  // Throws Error(InvalidEnvelope | Unroutable | FrameTooLarge | ConnectionFailed).
  virtual DeliveryTicket send(const core::Envelope& env, const EndpointAddr& to) = 0;

  // Delivers pending envelopes to their inboxes on the calling thread and
  // returns the delivered events. The sim bus performs exactly one step;
  // the socket backend waits up to `wait` for the first arrival.
  virtual std::vector<BusEvent> pump(std::chrono::milliseconds wait) = 0;

  // Logical tick (sim) or Unix milliseconds (socket).
  virtual std::int64_t now() const = 0;
  virtual bool has_pending() const = 0;
  virtual bool deterministic() const noexcept = 0;

  // Called for every delivered event, in delivery order.
  void set_observer(std::function<void(const BusEvent&)> observer) { observer_ = std::move(observer); }

 protected:
  friend class Registration;
  virtual void deregister(std::uint64_t token) = 0;
  void notify(const BusEvent& ev) const {
    if (observer_) observer_(ev);
  }

  // Shared precondition checks for send().
  static std::string checked_frame_body(const core::Envelope& env);

 private:
  std::function<void(const BusEvent&)> observer_;
};

// Runs one simulation step; throws Error(NotSimBackend) for other backends.
std::vector<BusEvent> step(Transport& bus);

}  // namespace acp::transport
