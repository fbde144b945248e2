#pragma once

#include "acp/transport/transport.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>

namespace acp::transport {

// TCP backend. Each registered endpoint owns a listening socket; outgoing
// envelopes reuse one connection per destination so per-pair FIFO order is
// the stream order. Reader threads decode frames into a shared queue and
// pump() hands them to inboxes on the caller's thread.
class SocketTransport final : public Transport {
 public:
  SocketTransport();
  ~SocketTransport() override;
  SocketTransport(const SocketTransport&) = delete;
  SocketTransport& operator=(const SocketTransport&) = delete;

  Registration register_endpoint(const EndpointAddr& addr, Inbox inbox) override;
  DeliveryTicket send(const core::Envelope& env, const EndpointAddr& to) override;
  std::vector<BusEvent> pump(std::chrono::milliseconds wait) override;
  std::int64_t now() const override;
  bool has_pending() const override;
  bool deterministic() const noexcept override { return false; }

  // Frames rejected by readers (malformed or oversized).
  std::size_t rejected_frames() const noexcept { return rejected_.load(); }

 protected:
  void deregister(std::uint64_t token) override;

 private:
  struct Listener;
  struct Outgoing;
  struct Arrival {
    std::uint64_t token;
    core::Envelope envelope;
  };

  void accept_loop(Listener* listener);
  void read_loop(Listener* listener, int fd);
  void close_listener(Listener& l);
  std::shared_ptr<Outgoing> connection_to(const EndpointAddr& to);

  mutable std::mutex mu_;  // listeners_, outgoing_
  std::map<std::uint64_t, std::unique_ptr<Listener>> listeners_;
  std::map<std::string, std::shared_ptr<Outgoing>> outgoing_;
  std::uint64_t next_token_ = 1;

  mutable std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<Arrival> queue_;

  std::uint64_t next_seq_ = 1;
  std::atomic<std::uint64_t> next_send_{1};
  std::atomic<std::size_t> rejected_{0};
};

}  // namespace acp::transport
