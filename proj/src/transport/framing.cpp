#include "acp/transport/framing.hpp"

#include "acp/core/error.hpp"

namespace acp::transport {

std::string encode_frame(std::string_view body) {
  if (body.size() > kMaxFrameBytes) {
    throw Error(Errc::FrameTooLarge, "frame of " + std::to_string(body.size()) + " bytes exceeds 16 MiB");
  }
  std::string out = std::to_string(body.size());
  out.push_back('\n');
  out.append(body);
  return out;
}

void FrameDecoder::feed(std::string_view bytes) {
  buffer_.append(bytes);
  while (true) {
    auto nl = buffer_.find('\n');
    if (nl == std::string::npos) {
      // 16 MiB has 8 digits; anything longer without a newline is garbage.
      if (buffer_.size() > 9) throw Error(Errc::ParseError, "frame header too long");
      return;
    }
    if (nl == 0 || nl > 9) throw Error(Errc::ParseError, "bad frame header length");
    std::size_t len = 0;
    for (std::size_t i = 0; i < nl; ++i) {
      char c = buffer_[i];
      if (c < '0' || c > '9') throw Error(Errc::ParseError, "non-digit in frame header");
      len = len * 10 + static_cast<std::size_t>(c - '0');
    }
    if (len > kMaxFrameBytes) throw Error(Errc::FrameTooLarge, "incoming frame exceeds 16 MiB");
    if (buffer_.size() < nl + 1 + len) return;
    frames_.push_back(buffer_.substr(nl + 1, len));
    buffer_.erase(0, nl + 1 + len);
  }
}

std::string FrameDecoder::next() {
  std::string f = std::move(frames_.front());
  frames_.pop_front();
  return f;
}

}  // namespace acp::transport
