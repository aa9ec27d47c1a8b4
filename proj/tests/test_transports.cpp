#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "doctest.h"
#include "grasp/dataset.hpp"
#include "grasp/errors.hpp"
#include "grasp/network.hpp"
#include "grasp/session.hpp"
#include "grasp/transport.hpp"

using namespace grasp;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

template <typename T>
bool is(const Message& m) {
  return std::holds_alternative<T>(m);
}

fs::path temp_dir(const char* leaf) {
  fs::path dir = fs::temp_directory_path() / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// the robot scripts below replace files the same way the real writers do
void put_file(const fs::path& p, const std::string& content) {
  fs::path tmp = p;
  tmp += ".new";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    REQUIRE(out.good());
  }
  fs::rename(tmp, p);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

std::uint16_t test_port(int offset) {
  return static_cast<std::uint16_t>(21000 + (::getpid() % 8000) + offset);
}

// listening blocks, so it runs on a worker; asserts wait for the join
struct Listener {
  std::unique_ptr<Transport> link;
  std::exception_ptr error;
  std::thread th;

  Listener(std::uint16_t port, std::chrono::milliseconds timeout) {
    th = std::thread([this, port, timeout] {
      try {
        link = wire_listen(port, timeout);
      } catch (...) {
        error = std::current_exception();
      }
    });
  }
  ~Listener() {
    if (th.joinable()) th.join();
  }
  Transport& join() {
    th.join();
    REQUIRE(!error);
    REQUIRE(link != nullptr);
    return *link;
  }
};

int raw_connect(std::uint16_t port) {
  for (int i = 0; i < 400; ++i) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return -1;
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0)
      return fd;
    ::close(fd);
    std::this_thread::sleep_for(5ms);
  }
  return -1;
}

void raw_send(int fd, const std::string& bytes) {
  REQUIRE(::send(fd, bytes.data(), bytes.size(), 0) ==
          static_cast<ssize_t>(bytes.size()));
}

std::vector<std::string> dir_names(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

}  // namespace

TEST_CASE("in-process pair shuttles frames in order") {
  auto [a, b] = make_inproc_pair();
  CHECK(a->handshakes());
  CHECK(b->handshakes());

  a->send(Hello{});
  auto m1 = b->receive(1000ms);
  REQUIRE(m1.has_value());
  CHECK(std::get<Hello>(*m1).version == 1);

  b->send(ObjectDetected{});
  b->send(GraspResult{true});
  auto m2 = a->receive(1000ms);
  auto m3 = a->receive(1000ms);
  REQUIRE(m2.has_value());
  REQUIRE(m3.has_value());
  CHECK(is<ObjectDetected>(*m2));
  CHECK(std::get<GraspResult>(*m3).success);

  // the queue carries encoded frames, so rotations arrive wire-quantized
  a->send(GraspCommand{0.5, 1.0 / 18.0});
  auto m4 = b->receive(1000ms);
  REQUIRE(m4.has_value());
  CHECK(std::get<GraspCommand>(*m4).rotation == 0.055556);

  CHECK(!a->receive(20ms).has_value());
}

TEST_CASE("in-process close is an error, but queued frames drain first") {
  auto [a, b] = make_inproc_pair();
  b->send(GraspResult{false});
  b->send(Bye{});
  b.reset();

  auto m1 = a->receive(200ms);
  REQUIRE(m1.has_value());
  CHECK(is<GraspResult>(*m1));
  auto m2 = a->receive(200ms);
  REQUIRE(m2.has_value());
  CHECK(is<Bye>(*m2));

  CHECK_THROWS_AS(a->receive(200ms), TransportError);
  CHECK_THROWS_AS(a->send(Reset{}), TransportError);
}

TEST_CASE("wire transport round trip") {
  const std::uint16_t port = test_port(0);
  Listener listener(port, 3000ms);
  auto brain = wire_connect("127.0.0.1", port, 3000ms);
  Transport& robot = listener.join();
  CHECK(brain->handshakes());
  CHECK(robot.handshakes());

  brain->send(Hello{});
  auto hello = robot.receive(2000ms);
  REQUIRE(hello.has_value());
  CHECK(is<Hello>(*hello));

  robot.send(ObjectDetected{});
  auto det = brain->receive(2000ms);
  REQUIRE(det.has_value());
  CHECK(is<ObjectDetected>(*det));

  brain->send(GraspCommand{0.5, -1.0 / 18.0});
  auto cmd = robot.receive(2000ms);
  REQUIRE(cmd.has_value());
  CHECK(std::get<GraspCommand>(*cmd).rotation == -0.055556);

  robot.send(GraspResult{true});
  auto res = brain->receive(2000ms);
  REQUIRE(res.has_value());
  CHECK(std::get<GraspResult>(*res).success);

  CHECK(!robot.receive(20ms).has_value());
}

TEST_CASE("wire connect retries until the listener shows up") {
  const std::uint16_t port = test_port(1);
  std::unique_ptr<Transport> brain;
  std::exception_ptr error;
  std::thread connecting([&] {
    try {
      brain = wire_connect("127.0.0.1", port, 3000ms);
    } catch (...) {
      error = std::current_exception();
    }
  });
  std::this_thread::sleep_for(150ms);
  auto robot = wire_listen(port, 3000ms);
  connecting.join();
  REQUIRE(!error);
  REQUIRE(brain != nullptr);

  brain->send(Reset{});
  auto m = robot->receive(2000ms);
  REQUIRE(m.has_value());
  CHECK(is<Reset>(*m));
}

TEST_CASE("wire framing survives coalescing and splits") {
  const std::uint16_t port = test_port(2);
  Listener listener(port, 3000ms);
  int fd = raw_connect(port);
  REQUIRE(fd >= 0);
  Transport& robot = listener.join();

  SUBCASE("two frames in one segment come out as two messages") {
    raw_send(fd, "RESULT 1\nDETECT\n");
    auto m1 = robot.receive(2000ms);
    REQUIRE(m1.has_value());
    CHECK(std::get<GraspResult>(*m1).success);
    auto m2 = robot.receive(50ms);  // already buffered, no fresh bytes needed
    REQUIRE(m2.has_value());
    CHECK(is<ObjectDetected>(*m2));
  }

  SUBCASE("a frame split across segments waits for its newline") {
    raw_send(fd, "DET");
    CHECK(!robot.receive(60ms).has_value());
    raw_send(fd, "ECT\n");
    auto m = robot.receive(2000ms);
    REQUIRE(m.has_value());
    CHECK(is<ObjectDetected>(*m));
  }

  SUBCASE("eof mid-frame is a broken link") {
    raw_send(fd, "CMD 0.5");
    ::close(fd);
    fd = -1;
    CHECK_THROWS_AS(robot.receive(2000ms), TransportError);
  }

  SUBCASE("garbage frames surface as parse errors") {
    raw_send(fd, "JUNK A\n");
    CHECK_THROWS_AS(robot.receive(2000ms), ParseError);
  }

  if (fd >= 0) ::close(fd);
}

TEST_CASE("wire deadlines expire cleanly") {
  SUBCASE("nobody connects before the accept deadline") {
    CHECK_THROWS_AS(wire_listen(test_port(3), 120ms), TransportError);
  }
  SUBCASE("nobody listens before the connect deadline") {
    CHECK_THROWS_AS(wire_connect("127.0.0.1", test_port(4), 150ms),
                    TransportError);
  }
  SUBCASE("unusable host address") {
    CHECK_THROWS_AS(wire_connect("not-an-address", test_port(4), 50ms),
                    TransportError);
  }
}

TEST_CASE("polled-file link: brain side") {
  fs::path dir = temp_dir("grasp_files_brain");
  std::int64_t gc = 7;
  auto brain = file_transport_brain(dir, [&] { return gc; }, 5ms);
  CHECK(!brain->handshakes());

  SUBCASE("hello and bye have nothing to do") {
    brain->send(Hello{});
    brain->send(Bye{});
    CHECK(!fs::exists(dir / kStatusFile));
    CHECK(!fs::exists(dir / kCommandFile));
  }

  SUBCASE("nothing staged means nothing received") {
    CHECK(!brain->receive(40ms).has_value());
    put_file(dir / kStatusFile, "0");
    CHECK(!brain->receive(40ms).has_value());
    put_file(dir / kStatusFile, "");  // writer caught mid-replace
    CHECK(!brain->receive(40ms).has_value());
  }

  SUBCASE("a staged object arrives as a detection") {
    put_file(dir / kStatusFile, "1");
    auto m = brain->receive(500ms);
    REQUIRE(m.has_value());
    CHECK(is<ObjectDetected>(*m));
  }

  SUBCASE("garbage status is a broken link") {
    put_file(dir / kStatusFile, "banana");
    CHECK_THROWS_WITH_AS(brain->receive(500ms),
                         "malformed object status: \"banana\"",
                         TransportError);
  }

  SUBCASE("a command lands as the two command files") {
    put_file(dir / kStatusFile, "1");
    REQUIRE(brain->receive(500ms).has_value());
    brain->send(GraspCommand{0.5, -0.25});
    CHECK(slurp(dir / kCommandFile) == "0.5\n-0.250000");
    CHECK(slurp(dir / kGcFileName) == "7");

    // feedback alone is not an answer; the status must have cycled too
    put_file(dir / kFeedbackFile, "0");
    CHECK(!brain->receive(80ms).has_value());
    put_file(dir / kStatusFile, "0");
    auto fb = brain->receive(500ms);
    REQUIRE(fb.has_value());
    CHECK(!std::get<GraspResult>(*fb).success);
  }

  SUBCASE("garbage feedback is a broken link") {
    put_file(dir / kStatusFile, "1");
    REQUIRE(brain->receive(500ms).has_value());
    brain->send(GraspCommand{0.5, 0.0});
    put_file(dir / kFeedbackFile, "2");
    put_file(dir / kStatusFile, "0");
    CHECK_THROWS_WITH_AS(brain->receive(500ms),
                         "malformed grasp feedback: \"2\"", TransportError);
  }

  SUBCASE("a command needs a staged object first") {
    CHECK_THROWS_WITH_AS(brain->send(GraspCommand{0.5, 0.1}),
                         "command sent with no staged object", TransportError);
  }

  SUBCASE("receiving with a command due is a sequencing bug") {
    put_file(dir / kStatusFile, "1");
    REQUIRE(brain->receive(500ms).has_value());
    CHECK_THROWS_WITH_AS(brain->receive(40ms),
                         "receive before the pending command was sent",
                         TransportError);
  }

  SUBCASE("the brain side never writes feedback") {
    CHECK_THROWS_WITH_AS(brain->send(GraspResult{true}),
                         "brain side cannot send RESULT", TransportError);
  }
}

TEST_CASE("polled-file link: robot side") {
  fs::path dir = temp_dir("grasp_files_robot");

  SUBCASE("staging writes the status flag") {
    auto robot = file_transport_robot(dir, 5ms);
    CHECK(!robot->handshakes());
    robot->send(ObjectDetected{});
    CHECK(slurp(dir / kStatusFile) == "1");
    CHECK_THROWS_WITH_AS(robot->send(ObjectDetected{}),
                         "object staged while a grasp is in flight",
                         TransportError);
  }

  SUBCASE("a counter change delivers the command") {
    auto robot = file_transport_robot(dir, 5ms);
    robot->send(ObjectDetected{});
    put_file(dir / kCommandFile, "0.5\n0.111111");
    CHECK(!robot->receive(40ms).has_value());  // counter still unchanged
    put_file(dir / kGcFileName, "3");
    auto m = robot->receive(500ms);
    REQUIRE(m.has_value());
    CHECK(std::get<GraspCommand>(*m).grip == 0.5);
    CHECK(std::get<GraspCommand>(*m).rotation == 0.111111);

    robot->send(GraspResult{true});
    CHECK(slurp(dir / kFeedbackFile) == "1");
    CHECK(slurp(dir / kStatusFile) == "0");
  }

  SUBCASE("the counter baseline comes from the existing file") {
    put_file(dir / kGcFileName, "5");
    put_file(dir / kCommandFile, "0.5\n0.250000");
    auto robot = file_transport_robot(dir, 5ms);
    robot->send(ObjectDetected{});
    CHECK(!robot->receive(40ms).has_value());  // "5" was already there
    put_file(dir / kGcFileName, "6");
    auto m = robot->receive(500ms);
    REQUIRE(m.has_value());
    CHECK(std::get<GraspCommand>(*m).rotation == 0.25);
  }

  SUBCASE("a cleared status while staged is a reset") {
    auto robot = file_transport_robot(dir, 5ms);
    robot->send(ObjectDetected{});
    put_file(dir / kStatusFile, "0");
    auto m = robot->receive(500ms);
    REQUIRE(m.has_value());
    CHECK(is<Reset>(*m));
    robot->send(ObjectDetected{});  // idle again, restaging is fine
    CHECK(slurp(dir / kStatusFile) == "1");
  }

  SUBCASE("command file problems are broken links") {
    put_file(dir / kCommandFile, "0.7\n0.1");
    auto robot = file_transport_robot(dir, 5ms);
    robot->send(ObjectDetected{});
    put_file(dir / kGcFileName, "1");
    CHECK_THROWS_WITH_AS(robot->receive(500ms),
                         "malformed command file: \"0.7\n0.1\"",
                         TransportError);
  }

  SUBCASE("a counter change without a command file is a broken link") {
    auto robot = file_transport_robot(dir, 5ms);
    robot->send(ObjectDetected{});
    put_file(dir / kGcFileName, "1");
    CHECK_THROWS_WITH_AS(robot->receive(500ms),
                         "command file missing after counter changed",
                         TransportError);
  }

  SUBCASE("receive needs a staged object") {
    auto robot = file_transport_robot(dir, 5ms);
    CHECK_THROWS_WITH_AS(robot->receive(40ms), "receive with no staged object",
                         TransportError);
  }

  SUBCASE("feedback needs a command in flight") {
    auto robot = file_transport_robot(dir, 5ms);
    CHECK_THROWS_WITH_AS(robot->send(GraspResult{true}),
                         "feedback sent with no command in flight",
                         TransportError);
  }

  SUBCASE("the robot side never writes commands") {
    auto robot = file_transport_robot(dir, 5ms);
    CHECK_THROWS_WITH_AS(robot->send(GraspCommand{0.5, 0.1}),
                         "robot side cannot send CMD", TransportError);
  }
}

TEST_CASE("polled-file link: both ends talk through one directory") {
  fs::path dir = temp_dir("grasp_files_pair");
  std::int64_t gc = 0;
  auto brain = file_transport_brain(dir, [&] { return gc; }, 1ms);
  auto robot = file_transport_robot(dir, 1ms);

  for (int i = 0; i < 5; ++i) {
    robot->send(ObjectDetected{});
    auto det = brain->receive(500ms);
    REQUIRE(det.has_value());
    REQUIRE(is<ObjectDetected>(*det));

    gc = i;
    const double rotation = (10.0 * i - 90.0) / 360.0;
    brain->send(GraspCommand{0.5, rotation});
    auto cmd = robot->receive(500ms);
    REQUIRE(cmd.has_value());
    CHECK(std::abs(std::get<GraspCommand>(*cmd).rotation - rotation) <= 5e-7);

    const bool success = (i % 2) == 0;
    robot->send(GraspResult{success});
    auto fb = brain->receive(500ms);
    REQUIRE(fb.has_value());
    CHECK(std::get<GraspResult>(*fb).success == success);
  }

  // an abandoned cycle: the brain resets instead of commanding
  robot->send(ObjectDetected{});
  REQUIRE(brain->receive(500ms).has_value());
  brain->send(Reset{});
  auto reset = robot->receive(500ms);
  REQUIRE(reset.has_value());
  CHECK(is<Reset>(*reset));

  // and the link still works afterwards
  robot->send(ObjectDetected{});
  auto det = brain->receive(500ms);
  REQUIRE(det.has_value());
  CHECK(is<ObjectDetected>(*det));
}

TEST_CASE("polled-file link: a result chased by an instant restage is not lost") {
  fs::path dir = temp_dir("grasp_files_race");
  std::int64_t gc = 0;
  // a long poll interval guarantees the writes all land between brain polls
  auto brain = file_transport_brain(dir, [&] { return gc; }, 50ms);

  put_file(dir / kStatusFile, "1");
  REQUIRE(brain->receive(500ms).has_value());
  brain->send(GraspCommand{0.5, 0.0});

  // the robot answers and immediately stages the next object: feedback,
  // status 0, status 1 all before the brain looks again
  put_file(dir / kFeedbackFile, "1");
  put_file(dir / kStatusFile, "0");
  put_file(dir / kStatusFile, "1");

  auto fb = brain->receive(1000ms);
  REQUIRE(fb.has_value());
  REQUIRE(is<GraspResult>(*fb));
  CHECK(std::get<GraspResult>(*fb).success);

  // the restage was picked up from the same poll, no extra file activity
  auto det = brain->receive(1000ms);
  REQUIRE(det.has_value());
  CHECK(is<ObjectDetected>(*det));
}

TEST_CASE("every transport yields the same dataset bytes") {
  Network net = init_network(5);
  fs::path base = temp_dir("grasp_equiv");

  auto run_one = [&](TransportKind kind, const char* tag,
                     std::ostringstream& log, std::ostringstream& rlog) {
    SessionConfig cfg;
    cfg.seed = 11;
    cfg.attempts = 12;
    cfg.epsilon = 0.3;
    cfg.transport = kind;
    cfg.dataset_dir = base / (std::string("ds_") + tag);
    cfg.files_dir = base / (std::string("links_") + tag);
    cfg.port = test_port(8);
    cfg.poll_interval = 2ms;
    cfg.step_timeout = 20000ms;
    cfg.log = &log;
    cfg.robot_log = &rlog;
    return run_session(cfg, net);
  };

  std::ostringstream log_a, rlog_a, log_b, rlog_b, log_c, rlog_c;
  auto in_proc = run_one(TransportKind::kInProc, "inproc", log_a, rlog_a);
  auto wire = run_one(TransportKind::kWire, "wire", log_b, rlog_b);
  auto files = run_one(TransportKind::kFiles, "files", log_c, rlog_c);

  CHECK(in_proc.robot.executed == wire.robot.executed);
  CHECK(in_proc.robot.executed == files.robot.executed);
  CHECK(in_proc.brain.recorded.total == wire.brain.recorded.total);
  CHECK(in_proc.brain.recorded.total == files.brain.recorded.total);
  CHECK(in_proc.brain.recorded.total + in_proc.brain.skipped == 12);

  // identical attempt-by-attempt decisions, not just identical tallies
  CHECK(log_a.str() == log_b.str());
  CHECK(log_a.str() == log_c.str());
  CHECK(rlog_a.str() == rlog_b.str());
  CHECK(rlog_a.str() == rlog_c.str());

  auto names = dir_names(base / "ds_inproc");
  CHECK(names == dir_names(base / "ds_wire"));
  CHECK(names == dir_names(base / "ds_files"));
  CHECK(names.size() ==
        static_cast<std::size_t>(in_proc.brain.recorded.total) + 1);

  for (const auto& name : names) {
    INFO("file: ", name);
    std::string bytes = slurp(base / "ds_inproc" / name);
    CHECK(bytes == slurp(base / "ds_wire" / name));
    CHECK(bytes == slurp(base / "ds_files" / name));
  }
}
