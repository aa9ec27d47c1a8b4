#include "grasp/transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <system_error>
#include <thread>

#include "grasp/dataset.hpp"
#include "grasp/errors.hpp"

namespace grasp {

using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- in-process

struct FrameQueue {
  std::mutex m;
  std::condition_variable cv;
  std::deque<std::string> frames;
  bool closed = false;
};

class InProcTransport : public Transport {
 public:
  InProcTransport(std::shared_ptr<FrameQueue> rx, std::shared_ptr<FrameQueue> tx)
      : rx_(std::move(rx)), tx_(std::move(tx)) {}

  ~InProcTransport() override {
    for (auto* q : {rx_.get(), tx_.get()}) {
      std::lock_guard lock(q->m);
      q->closed = true;
      q->cv.notify_all();
    }
  }

  void send(const Message& msg) override {
    std::string frame = encode_frame(msg);
    {
      std::lock_guard lock(tx_->m);
      if (tx_->closed) throw TransportError("peer closed the link");
      tx_->frames.push_back(std::move(frame));
    }
    tx_->cv.notify_one();
  }

  std::optional<Message> receive(std::chrono::milliseconds timeout) override {
    std::unique_lock lock(rx_->m);
    if (!rx_->cv.wait_for(lock, timeout, [&] {
          return !rx_->frames.empty() || rx_->closed;
        }))
      return std::nullopt;
    if (rx_->frames.empty()) throw TransportError("peer closed the link");
    std::string frame = std::move(rx_->frames.front());
    rx_->frames.pop_front();
    lock.unlock();
    return decode_frame(frame);
  }

 private:
  std::shared_ptr<FrameQueue> rx_, tx_;
};

// ----------------------------------------------------------------------- tcp

class WireTransport : public Transport {
 public:
  explicit WireTransport(int fd) : fd_(fd) {
    int one = 1;  // strict ping-pong traffic, never delay a frame
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  ~WireTransport() override {
    if (fd_ >= 0) ::close(fd_);
  }

  void send(const Message& msg) override {
    std::string frame = encode_frame(msg);
    std::size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off,
                         MSG_NOSIGNAL);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("send failed: ") +
                             std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::optional<Message> receive(std::chrono::milliseconds timeout) override {
    auto deadline = Clock::now() + timeout;
    for (;;) {
      auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buf_.substr(0, nl + 1);
        buf_.erase(0, nl + 1);
        return decode_frame(line);
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - Clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd pfd{fd_, POLLIN, 0};
      int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (pr < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("poll failed: ") +
                             std::strerror(errno));
      }
      if (pr == 0) return std::nullopt;
      char chunk[4096];
      ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("recv failed: ") +
                             std::strerror(errno));
      }
      if (n == 0) throw TransportError("peer closed the connection");
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int fd_;
  std::string buf_;
};

[[noreturn]] void throw_socket_error(const char* what) {
  throw TransportError(std::string(what) + ": " + std::strerror(errno));
}

// ------------------------------------------------------------------ files

std::string read_text(const fs::path& p, bool& exists) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    exists = false;
    return {};
  }
  exists = true;
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text_atomic(const fs::path& p, const std::string& content) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw TransportError("cannot write " + p.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec)
    throw TransportError("cannot write " + p.string() + ": " + ec.message());
}

bool parse_strict_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() &&
         std::isfinite(out);
}

// Sleep in poll-interval steps until the deadline; returns false once past it.
bool wait_step(Clock::time_point deadline, std::chrono::milliseconds poll) {
  auto now = Clock::now();
  if (now >= deadline) return false;
  std::this_thread::sleep_for(std::min(
      poll, std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                                  now)));
  return true;
}

// Identity of one on-disk version of a file. Every write lands via rename,
// so a rewrite swaps the inode; content alone can repeat (status flips
// 0 -> 1 faster than a poll interval) but the stamp cannot.
struct FileStamp {
  bool exists = false;
  ino_t ino = 0;
  off_t size = 0;
  std::int64_t mtime_ns = 0;

  friend bool operator==(const FileStamp&, const FileStamp&) = default;
};

FileStamp stamp_file(const fs::path& p) {
  struct stat st{};
  if (::stat(p.c_str(), &st) != 0) return {};
  return {true, st.st_ino, st.st_size,
          static_cast<std::int64_t>(st.st_mtim.tv_sec) * 1000000000 +
              st.st_mtim.tv_nsec};
}

class FileBrainTransport : public Transport {
  enum class Phase { kExpectDetect, kCommandDue, kExpectResult };

 public:
  FileBrainTransport(fs::path dir, std::function<std::int64_t()> gc_source,
                     std::chrono::milliseconds poll)
      : dir_(std::move(dir)), gc_source_(std::move(gc_source)), poll_(poll) {
    if (!gc_source_)
      throw ConfigError("file transport needs a grasp counter source");
    fs::create_directories(dir_);
  }

  bool handshakes() const override { return false; }

  void send(const Message& msg) override {
    if (const auto* cmd = std::get_if<GraspCommand>(&msg)) {
      if (phase_ != Phase::kCommandDue)
        throw TransportError("command sent with no staged object");
      // Mark both reply files before the command lands: any later stamp
      // change is the robot answering this command.
      feedback_mark_ = stamp_file(dir_ / kFeedbackFile);
      status_mark_ = stamp_file(dir_ / kStatusFile);
      char buf[48];
      std::snprintf(buf, sizeof buf, "0.5\n%.6f", cmd->rotation);
      write_text_atomic(dir_ / kCommandFile, buf);
      write_text_atomic(dir_ / kGcFileName, std::to_string(gc_source_()));
      phase_ = Phase::kExpectResult;
      return;
    }
    if (std::holds_alternative<Reset>(msg)) {
      write_text_atomic(dir_ / kStatusFile, "0");
      pending_detect_ = false;
      phase_ = Phase::kExpectDetect;
      return;
    }
    if (std::holds_alternative<Hello>(msg) || std::holds_alternative<Bye>(msg))
      return;  // no connection to open or close
    throw TransportError(std::string("brain side cannot send ") +
                         message_name(msg));
  }

  std::optional<Message> receive(std::chrono::milliseconds timeout) override {
    if (phase_ == Phase::kCommandDue)
      throw TransportError("receive before the pending command was sent");
    auto deadline = Clock::now() + timeout;
    for (;;) {
      if (phase_ == Phase::kExpectDetect) {
        if (pending_detect_) {  // staging observed while reading the result
          pending_detect_ = false;
          phase_ = Phase::kCommandDue;
          return ObjectDetected{};
        }
        bool exists = false;
        std::string status = read_text(dir_ / kStatusFile, exists);
        if (exists && status == "1") {
          phase_ = Phase::kCommandDue;
          return ObjectDetected{};
        }
        if (exists && !status.empty() && status != "0")
          throw TransportError("malformed object status: \"" + status + "\"");
      } else if (result_ready()) {
        bool have = false;
        std::string fb = read_text(dir_ / kFeedbackFile, have);
        if (!have)
          throw TransportError("feedback file missing after status cleared");
        if (fb != "0" && fb != "1")
          throw TransportError("malformed grasp feedback: \"" + fb + "\"");
        // The robot may already have staged its next object, flipping the
        // status back to 1 between our polls. Catch up from the content.
        std::string status = read_text(dir_ / kStatusFile, have);
        pending_detect_ = have && status == "1";
        phase_ = Phase::kExpectDetect;
        return GraspResult{fb == "1"};
      }
      if (!wait_step(deadline, poll_)) return std::nullopt;
    }
  }

 private:
  // The robot answers a command by writing feedback, then status 0, then
  // (when it stages the next object) status 1 again. The 0 can be gone
  // before a poll lands, so instead of matching content we require fresh
  // stamps on both files: the status rewrite proves it passed through 0
  // after the feedback was committed.
  bool result_ready() const {
    return stamp_file(dir_ / kFeedbackFile) != feedback_mark_ &&
           stamp_file(dir_ / kStatusFile) != status_mark_;
  }

  fs::path dir_;
  std::function<std::int64_t()> gc_source_;
  std::chrono::milliseconds poll_;
  Phase phase_ = Phase::kExpectDetect;
  bool pending_detect_ = false;
  FileStamp feedback_mark_;
  FileStamp status_mark_;
};

class FileRobotTransport : public Transport {
  enum class Phase { kIdle, kAwaitCommand, kExecutePending };

 public:
  FileRobotTransport(fs::path dir, std::chrono::milliseconds poll)
      : dir_(std::move(dir)), poll_(poll) {
    fs::create_directories(dir_);
    bool exists = false;
    last_gc_ = read_text(dir_ / kGcFileName, exists);  // baseline for change
  }

  bool handshakes() const override { return false; }

  void send(const Message& msg) override {
    if (std::holds_alternative<ObjectDetected>(msg)) {
      if (phase_ != Phase::kIdle)
        throw TransportError("object staged while a grasp is in flight");
      write_text_atomic(dir_ / kStatusFile, "1");
      phase_ = Phase::kAwaitCommand;
      return;
    }
    if (const auto* r = std::get_if<GraspResult>(&msg)) {
      if (phase_ != Phase::kExecutePending)
        throw TransportError("feedback sent with no command in flight");
      write_text_atomic(dir_ / kFeedbackFile, r->success ? "1" : "0");
      write_text_atomic(dir_ / kStatusFile, "0");
      phase_ = Phase::kIdle;
      return;
    }
    if (std::holds_alternative<Hello>(msg) || std::holds_alternative<Bye>(msg))
      return;
    throw TransportError(std::string("robot side cannot send ") +
                         message_name(msg));
  }

  std::optional<Message> receive(std::chrono::milliseconds timeout) override {
    if (phase_ != Phase::kAwaitCommand)
      throw TransportError("receive with no staged object");
    auto deadline = Clock::now() + timeout;
    for (;;) {
      bool exists = false;
      std::string gc = read_text(dir_ / kGcFileName, exists);
      if (exists && !gc.empty() && gc != last_gc_) {
        last_gc_ = gc;
        phase_ = Phase::kExecutePending;
        return read_command();
      }
      std::string status = read_text(dir_ / kStatusFile, exists);
      if (exists && status == "0") {  // peer reset while we were staged
        phase_ = Phase::kIdle;
        return Reset{};
      }
      if (!wait_step(deadline, poll_)) return std::nullopt;
    }
  }

 private:
  Message read_command() {
    bool exists = false;
    std::string text = read_text(dir_ / kCommandFile, exists);
    if (!exists)
      throw TransportError("command file missing after counter changed");
    auto nl = text.find('\n');
    if (nl == std::string::npos)
      throw TransportError("malformed command file: \"" + text + "\"");
    std::string_view grip_s(text.data(), nl);
    std::string_view rot_s(text.data() + nl + 1, text.size() - nl - 1);
    double grip = 0.0, rot = 0.0;
    if (!parse_strict_double(grip_s, grip) ||
        !parse_strict_double(rot_s, rot) || grip != kGripConstant ||
        std::abs(rot) > kMotorLimit)
      throw TransportError("malformed command file: \"" + text + "\"");
    return GraspCommand{grip, rot};
  }

  fs::path dir_;
  std::chrono::milliseconds poll_;
  Phase phase_ = Phase::kIdle;
  std::string last_gc_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>>
make_inproc_pair() {
  auto a = std::make_shared<FrameQueue>();
  auto b = std::make_shared<FrameQueue>();
  return {std::make_unique<InProcTransport>(a, b),
          std::make_unique<InProcTransport>(b, a)};
}

std::unique_ptr<Transport> wire_listen(
    std::uint16_t port, std::chrono::milliseconds accept_timeout) {
  int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) throw_socket_error("socket failed");
  int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
    ::close(lfd);
    throw_socket_error("bind failed");
  }
  if (::listen(lfd, 1) < 0) {
    ::close(lfd);
    throw_socket_error("listen failed");
  }
  pollfd pfd{lfd, POLLIN, 0};
  int pr = ::poll(&pfd, 1, static_cast<int>(accept_timeout.count()));
  if (pr <= 0) {
    ::close(lfd);
    throw TransportError("no peer connected before the accept deadline");
  }
  int fd = ::accept(lfd, nullptr, nullptr);
  ::close(lfd);
  if (fd < 0) throw_socket_error("accept failed");
  return std::make_unique<WireTransport>(fd);
}

std::unique_ptr<Transport> wire_connect(const std::string& host,
                                        std::uint16_t port,
                                        std::chrono::milliseconds timeout) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    throw TransportError("unusable host address: " + host);

  auto deadline = Clock::now() + timeout;
  for (;;) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw_socket_error("socket failed");
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0)
      return std::make_unique<WireTransport>(fd);
    ::close(fd);
    if (Clock::now() >= deadline)
      throw TransportError("could not connect to " + host + ":" +
                           std::to_string(port));
    std::this_thread::sleep_for(std::chrono::milliseconds(25));
  }
}

std::unique_ptr<Transport> file_transport_brain(
    const fs::path& dir, std::function<std::int64_t()> gc_source,
    std::chrono::milliseconds poll_interval) {
  return std::make_unique<FileBrainTransport>(dir, std::move(gc_source),
                                              poll_interval);
}

std::unique_ptr<Transport> file_transport_robot(
    const fs::path& dir, std::chrono::milliseconds poll_interval) {
  return std::make_unique<FileRobotTransport>(dir, poll_interval);
}

}  // namespace grasp
