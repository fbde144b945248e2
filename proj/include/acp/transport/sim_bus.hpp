#pragma once

#include "acp/transport/transport.hpp"

#include <map>
#include <string>
#include <vector>

namespace acp::transport {

// Deterministic in-memory bus. Envelopes sent during step k are delivered in
// step k+1, ordered by (send tick, sender, send order); delivery sequence
// numbers are global and dense.
class SimBus final : public Transport {
 public:
  SimBus() = default;

  Registration register_endpoint(const EndpointAddr& addr, Inbox inbox) override;
  DeliveryTicket send(const core::Envelope& env, const EndpointAddr& to) override;
  std::vector<BusEvent> pump(std::chrono::milliseconds) override { return step(); }
  std::int64_t now() const override { return clock_; }
  bool has_pending() const override { return !queue_.empty(); }
  bool deterministic() const noexcept override { return true; }

  std::vector<BusEvent> step();
  std::size_t dropped() const noexcept { return dropped_; }

 protected:
  void deregister(std::uint64_t token) override;

 private:
  struct Pending {
    std::int64_t sent_at;
    std::string sender;
    std::uint64_t send_index;
    core::Envelope envelope;
    std::string to;
  };
  struct Endpoint {
    std::uint64_t token;
    Inbox inbox;
  };

  std::map<std::string, Endpoint> endpoints_;
  std::vector<Pending> queue_;
  std::int64_t clock_ = 0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t next_send_ = 1;
  std::uint64_t next_token_ = 1;
  std::size_t dropped_ = 0;
};

}  // namespace acp::transport
