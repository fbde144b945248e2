#include "acp/transport/socket_transport.hpp"

#include "acp/core/error.hpp"
#include "acp/transport/framing.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <vector>

namespace acp::transport {

struct SocketTransport::Listener {
  std::uint64_t token = 0;
  int fd = -1;
  EndpointAddr bound;
  Inbox inbox;
  std::thread acceptor;
  std::mutex mu;
  std::vector<int> conns;
  std::vector<std::thread> readers;
  std::atomic<bool> closing{false};
};

struct SocketTransport::Outgoing {
  std::mutex mu;
  int fd = -1;
};

namespace {

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

sockaddr_in resolve_ipv4(const std::string& host, std::uint16_t port) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (host == "localhost" || host.empty()) {
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    return sa;
  }
  if (::inet_pton(AF_INET, host.c_str(), &sa.sin_addr) == 1) return sa;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    throw Error(Errc::ConnectionFailed, "cannot resolve host '" + host + "'");
  }
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return sa;
}

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

}  // namespace

SocketTransport::SocketTransport() = default;

SocketTransport::~SocketTransport() {
  std::map<std::uint64_t, std::unique_ptr<Listener>> listeners;
  {
    std::lock_guard lock(mu_);
    listeners.swap(listeners_);
    for (auto& [_, out] : outgoing_) {
      std::lock_guard ol(out->mu);
      close_fd(out->fd);
    }
    outgoing_.clear();
  }
  for (auto& [_, l] : listeners) close_listener(*l);
}

Registration SocketTransport::register_endpoint(const EndpointAddr& addr, Inbox inbox) {
  if (addr.kind != EndpointAddr::Kind::Socket || !addr.valid()) {
    throw Error(Errc::Unroutable, "socket backend only accepts host:port endpoints: " + addr.str());
  }
  auto sa = resolve_ipv4(addr.host, addr.port);
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw Error(Errc::ConnectionFailed, std::string("socket(): ") + std::strerror(errno));
  int yes = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
    int err = errno;
    ::close(fd);
    if (err == EADDRINUSE) throw Error(Errc::AddrInUse, addr.str() + " is already bound");
    throw Error(Errc::ConnectionFailed, "bind " + addr.str() + ": " + std::strerror(err));
  }
  if (::listen(fd, 64) != 0) {
    int err = errno;
    ::close(fd);
    throw Error(Errc::ConnectionFailed, "listen " + addr.str() + ": " + std::strerror(err));
  }
  sockaddr_in actual{};
  socklen_t len = sizeof actual;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len);

  auto l = std::make_unique<Listener>();
  l->fd = fd;
  l->bound = EndpointAddr::socket(addr.host, ntohs(actual.sin_port));
  l->inbox = std::move(inbox);
  Listener* raw = l.get();
  std::uint64_t token;
  {
    std::lock_guard lock(mu_);
    token = next_token_++;
    l->token = token;
    listeners_.emplace(token, std::move(l));
  }
  raw->acceptor = std::thread([this, raw] { accept_loop(raw); });
  return Registration(this, token, raw->bound);
}

void SocketTransport::accept_loop(Listener* l) {
  while (!l->closing.load()) {
    int cfd = ::accept(l->fd, nullptr, nullptr);
    if (cfd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    std::lock_guard lock(l->mu);
    if (l->closing.load()) {
      ::close(cfd);
      return;
    }
    l->conns.push_back(cfd);
    l->readers.emplace_back([this, l, cfd] { read_loop(l, cfd); });
  }
}

void SocketTransport::read_loop(Listener* l, int fd) {
  FrameDecoder decoder;
  char buf[64 * 1024];
  while (!l->closing.load()) {
    auto n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return;
    try {
      decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
      while (decoder.has_frame()) {
        auto frame = decoder.next();
        auto env = core::Envelope::decode(frame);
        if (env.encode() != frame) throw Error(Errc::ParseError, "non-canonical frame");
        {
          std::lock_guard lock(queue_mu_);
          queue_.push_back({l->token, std::move(env)});
        }
        queue_cv_.notify_one();
      }
    } catch (const Error&) {
      ++rejected_;
      ::shutdown(fd, SHUT_RDWR);
      return;
    }
  }
}

void SocketTransport::close_listener(Listener& l) {
  l.closing.store(true);
  ::shutdown(l.fd, SHUT_RDWR);
  if (l.acceptor.joinable()) l.acceptor.join();
  close_fd(l.fd);
  std::vector<std::thread> readers;
  {
    std::lock_guard lock(l.mu);
    for (int c : l.conns) ::shutdown(c, SHUT_RDWR);
    readers.swap(l.readers);
  }
  for (auto& t : readers) t.join();
  std::lock_guard lock(l.mu);
  for (int& c : l.conns) close_fd(c);
  l.conns.clear();
}

void SocketTransport::deregister(std::uint64_t token) {
  std::unique_ptr<Listener> l;
  {
    std::lock_guard lock(mu_);
    auto it = listeners_.find(token);
    if (it == listeners_.end()) return;
    l = std::move(it->second);
    listeners_.erase(it);
  }
  close_listener(*l);
}

std::shared_ptr<SocketTransport::Outgoing> SocketTransport::connection_to(const EndpointAddr& to) {
  std::lock_guard lock(mu_);
  auto& slot = outgoing_[to.str()];
  if (!slot) slot = std::make_shared<Outgoing>();
  return slot;
}

DeliveryTicket SocketTransport::send(const core::Envelope& env, const EndpointAddr& to) {
  auto body = checked_frame_body(env);
  if (to.kind != EndpointAddr::Kind::Socket || !to.valid()) {
    throw Error(Errc::Unroutable, "socket backend cannot reach " + to.str());
  }
  const auto frame = encode_frame(body);
  auto out = connection_to(to);
  std::lock_guard lock(out->mu);
  // Outgoing connections carry no inbound data, so readable EOF means the
  // endpoint went away (possibly replaced by a new listener on the port).
  if (out->fd >= 0) {
    char probe;
    auto n = ::recv(out->fd, &probe, 1, MSG_PEEK | MSG_DONTWAIT);
    if (n == 0 || (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK)) close_fd(out->fd);
  }
  for (int attempt = 0; attempt < 2; ++attempt) {
    if (out->fd < 0) {
      auto sa = resolve_ipv4(to.host, to.port);
      int fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) throw Error(Errc::ConnectionFailed, std::string("socket(): ") + std::strerror(errno));
      if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0) {
        int err = errno;
        ::close(fd);
        throw Error(Errc::ConnectionFailed, "connect " + to.str() + ": " + std::strerror(err));
      }
      int yes = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
      out->fd = fd;
    }
    if (write_all(out->fd, frame)) return {next_send_++, true};
    close_fd(out->fd);
  }
  throw Error(Errc::ConnectionFailed, "write to " + to.str() + " failed");
}

std::vector<BusEvent> SocketTransport::pump(std::chrono::milliseconds wait) {
  std::deque<Arrival> batch;
  {
    std::unique_lock lock(queue_mu_);
    queue_cv_.wait_for(lock, wait, [&] { return !queue_.empty(); });
    batch.swap(queue_);
  }
  std::vector<BusEvent> events;
  const auto at = now();
  for (auto& a : batch) {
    Inbox inbox;
    EndpointAddr bound;
    {
      std::lock_guard lock(mu_);
      auto it = listeners_.find(a.token);
      if (it == listeners_.end()) continue;
      inbox = it->second->inbox;
      bound = it->second->bound;
    }
    BusEvent ev{next_seq_++, std::move(a.envelope), at, bound.str()};
    notify(ev);
    inbox(ev.envelope);
    events.push_back(std::move(ev));
  }
  return events;
}

std::int64_t SocketTransport::now() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

bool SocketTransport::has_pending() const {
  std::lock_guard lock(queue_mu_);
  return !queue_.empty();
}

}  // namespace acp::transport
