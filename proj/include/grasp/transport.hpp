#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "grasp/protocol.hpp"

namespace grasp {

inline constexpr std::uint16_t kDefaultPort = 7461;
inline constexpr std::chrono::milliseconds kDefaultPollInterval{3000};

// A message link between the two endpoints. Every implementation carries the
// encoded form, so values arrive with identical quantization no matter which
// link is in use.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual void send(const Message& msg) = 0;

  // Blocks up to `timeout`; nullopt means nothing arrived in time. A broken
  // link throws TransportError.
  virtual std::optional<Message> receive(std::chrono::milliseconds timeout) = 0;

  // Whether the link opens with HELLO and closes with BYE. The polled-file
  // link has no notion of connection, so it skips both.
  virtual bool handshakes() const { return true; }
};

// In-process queue pair for single-binary sessions.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>
make_inproc_pair();

// TCP, newline-delimited frames. The robot listens, the brain connects;
// wire_connect retries until the deadline so start order does not matter.
std::unique_ptr<Transport> wire_listen(std::uint16_t port,
                                       std::chrono::milliseconds accept_timeout);
std::unique_ptr<Transport> wire_connect(const std::string& host,
                                        std::uint16_t port,
                                        std::chrono::milliseconds timeout);

// Polled-file link over a shared directory:
//   objectstatus.txt   "1" object staged, "0" feedback ready / reset
//   cnnoutput.txt      "0.5\n<rotation to 6 dp>" (no trailing newline)
//   graspfeedback.txt  "1" or "0"
//   gc_file.txt        decimal grasp counter; a content change tells the
//                      robot a fresh command is waiting
// Writers replace files atomically; a missing or empty file is simply not
// ready yet. gc_source supplies the counter stamped at each command.
std::unique_ptr<Transport> file_transport_brain(
    const std::filesystem::path& dir, std::function<std::int64_t()> gc_source,
    std::chrono::milliseconds poll_interval = kDefaultPollInterval);
std::unique_ptr<Transport> file_transport_robot(
    const std::filesystem::path& dir,
    std::chrono::milliseconds poll_interval = kDefaultPollInterval);

inline constexpr const char* kStatusFile = "objectstatus.txt";
inline constexpr const char* kCommandFile = "cnnoutput.txt";
inline constexpr const char* kFeedbackFile = "graspfeedback.txt";

}  // namespace grasp
