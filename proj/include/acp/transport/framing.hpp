#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <string_view>

namespace acp::transport {

inline constexpr std::size_t kMaxFrameBytes = 16u * 1024u * 1024u;

// "<decimal byte count>\n<body>". Throws Error(FrameTooLarge) past 16 MiB.
std::string encode_frame(std::string_view body);

// Incremental decoder for a byte stream of frames.
class FrameDecoder {
 public:
  // Appends bytes; throws Error(FrameTooLarge) or Error(ParseError) on a bad
  // length header. Completed bodies are queued for next().
  void feed(std::string_view bytes);
  bool has_frame() const noexcept { return !frames_.empty(); }
  std::string next();
  std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  std::string buffer_;
  std::deque<std::string> frames_;
};

}  // namespace acp::transport
