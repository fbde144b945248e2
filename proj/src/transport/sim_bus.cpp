#include "acp/transport/sim_bus.hpp"

#include "acp/core/error.hpp"
#include "acp/transport/framing.hpp"

#include <algorithm>
#include <tuple>

namespace acp::transport {

Registration& Registration::operator=(Registration&& other) noexcept {
  if (this != &other) {
    release();
    owner_ = std::exchange(other.owner_, nullptr);
    token_ = other.token_;
    bound_ = std::move(other.bound_);
  }
  return *this;
}

void Registration::release() {
  if (owner_) {
    auto* owner = std::exchange(owner_, nullptr);
    owner->deregister(token_);
  }
}

std::string Transport::checked_frame_body(const core::Envelope& env) {
  auto report = core::validate_envelope(env);
  if (!report.ok()) {
    const auto& v = report.violations().front();
    throw Error(Errc::InvalidEnvelope, v.path + ": " + v.rule + " " + v.detail, report.to_value());
  }
  auto body = env.encode();
  if (body.size() > kMaxFrameBytes) {
    throw Error(Errc::FrameTooLarge, "envelope of " + std::to_string(body.size()) + " bytes exceeds 16 MiB");
  }
  return body;
}

std::vector<BusEvent> step(Transport& bus) {
  auto* sim = dynamic_cast<SimBus*>(&bus);
  if (!sim) throw Error(Errc::NotSimBackend, "step() requires the sim bus");
  return sim->step();
}

Registration SimBus::register_endpoint(const EndpointAddr& addr, Inbox inbox) {
  if (addr.kind != EndpointAddr::Kind::Sim || !addr.valid()) {
    throw Error(Errc::Unroutable, "sim bus only accepts sim endpoints: " + addr.str());
  }
  if (endpoints_.contains(addr.sim_name)) {
    throw Error(Errc::AddrInUse, addr.str() + " is already registered");
  }
  const auto token = next_token_++;
  endpoints_.emplace(addr.sim_name, Endpoint{token, std::move(inbox)});
  return Registration(this, token, addr);
}

void SimBus::deregister(std::uint64_t token) {
  std::erase_if(endpoints_, [&](const auto& kv) { return kv.second.token == token; });
}

DeliveryTicket SimBus::send(const core::Envelope& env, const EndpointAddr& to) {
  checked_frame_body(env);
  if (to.kind != EndpointAddr::Kind::Sim || !endpoints_.contains(to.sim_name)) {
    throw Error(Errc::Unroutable, "no endpoint registered at " + to.str());
  }
  const auto index = next_send_++;
  queue_.push_back({clock_, env.sender, index, env, to.sim_name});
  return {index, true};
}

std::vector<BusEvent> SimBus::step() {
  std::vector<Pending> batch;
  batch.swap(queue_);
  std::stable_sort(batch.begin(), batch.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.sent_at, a.sender, a.send_index) < std::tie(b.sent_at, b.sender, b.send_index);
  });
  const auto tick = clock_;
  std::vector<BusEvent> events;
  events.reserve(batch.size());
  for (auto& p : batch) {
    BusEvent ev{next_seq_++, std::move(p.envelope), tick, p.to};
    auto it = endpoints_.find(p.to);
    if (it == endpoints_.end()) {
      ++dropped_;
      continue;
    }
    // Copy: the inbox may deregister its own endpoint while running.
    Inbox inbox = it->second.inbox;
    notify(ev);
    inbox(ev.envelope);
    events.push_back(std::move(ev));
  }
  ++clock_;
  return events;
}

}  // namespace acp::transport
