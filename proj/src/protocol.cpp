#include "grasp/protocol.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "grasp/errors.hpp"

namespace grasp {
namespace {

bool parse_int(std::string_view s, int& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size() && std::isfinite(out);
}

// Exactly one space between tokens, no leading/trailing blanks.
std::vector<std::string_view> split_strict(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t sp = line.find(' ', start);
    if (sp == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, sp - start));
    start = sp + 1;
  }
  return out;
}

}  // namespace

std::string encode_frame(const Message& msg) {
  return std::visit(
      [](const auto& m) -> std::string {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Hello>) {
          return "HELLO " + std::to_string(m.version) + "\n";
        } else if constexpr (std::is_same_v<T, ObjectDetected>) {
          return "DETECT\n";
        } else if constexpr (std::is_same_v<T, GraspCommand>) {
          if (m.grip != kGripConstant)
            throw DomainError("grasp command grip must be 0.5");
          if (!std::isfinite(m.rotation) || std::abs(m.rotation) > kMotorLimit)
            throw DomainError("grasp command rotation outside motor limits");
          char buf[48];
          std::snprintf(buf, sizeof buf, "CMD 0.5 %.6f\n", m.rotation);
          return buf;
        } else if constexpr (std::is_same_v<T, GraspResult>) {
          return m.success ? "RESULT 1\n" : "RESULT 0\n";
        } else if constexpr (std::is_same_v<T, Reset>) {
          return "RESET\n";
        } else {
          return "BYE\n";
        }
      },
      msg);
}

Message decode_frame(const std::string& line) {
  std::string_view v = line;
  if (!v.empty() && v.back() == '\n') v.remove_suffix(1);
  auto fail = [&](const char* why) {
    throw ParseError(std::string("frame: ") + why, std::string(v));
  };
  if (v.empty()) fail("empty frame");

  auto tok = split_strict(v);
  for (const auto& t : tok)
    if (t.empty()) fail("blank token");

  const std::string_view verb = tok[0];
  if (verb == "HELLO") {
    if (tok.size() != 2) fail("HELLO takes one field");
    int version = 0;
    if (!parse_int(tok[1], version)) fail("malformed version");
    return Hello{version};
  }
  if (verb == "DETECT") {
    if (tok.size() != 1) fail("DETECT takes no fields");
    return ObjectDetected{};
  }
  if (verb == "CMD") {
    if (tok.size() != 3) fail("CMD takes two fields");
    double grip = 0.0, rotation = 0.0;
    if (!parse_double(tok[1], grip)) fail("malformed grip value");
    if (!parse_double(tok[2], rotation)) fail("malformed rotation value");
    if (grip != kGripConstant) fail("grip must be 0.5");
    if (std::abs(rotation) > kMotorLimit) fail("rotation outside motor limits");
    return GraspCommand{grip, rotation};
  }
  if (verb == "RESULT") {
    if (tok.size() != 2) fail("RESULT takes one field");
    if (tok[1] == "1") return GraspResult{true};
    if (tok[1] == "0") return GraspResult{false};
    fail("result flag must be 0 or 1");
  }
  if (verb == "RESET") {
    if (tok.size() != 1) fail("RESET takes no fields");
    return Reset{};
  }
  if (verb == "BYE") {
    if (tok.size() != 1) fail("BYE takes no fields");
    return Bye{};
  }
  fail("unknown verb");
  return Reset{};  // unreachable
}

const char* message_name(const Message& msg) {
  return std::visit(
      [](const auto& m) -> const char* {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Hello>) return "HELLO";
        if constexpr (std::is_same_v<T, ObjectDetected>) return "DETECT";
        if constexpr (std::is_same_v<T, GraspCommand>) return "CMD";
        if constexpr (std::is_same_v<T, GraspResult>) return "RESULT";
        if constexpr (std::is_same_v<T, Reset>) return "RESET";
        return "BYE";
      },
      msg);
}

const char* to_string(BrainState s) {
  switch (s) {
    case BrainState::kWaitDetect: return "WaitDetect";
    case BrainState::kPredicting: return "Predicting";
    case BrainState::kAwaitFeedback: return "AwaitFeedback";
    case BrainState::kRecording: return "Recording";
  }
  return "?";
}

const char* to_string(RobotState s) {
  switch (s) {
    case RobotState::kIdle: return "Idle";
    case RobotState::kReported: return "Reported";
    case RobotState::kExecuting: return "Executing";
    case RobotState::kFeedbackSent: return "FeedbackSent";
  }
  return "?";
}

namespace {

template <typename Event>
const char* event_name_impl(const Event& e) {
  return std::visit(
      [](const auto& m) -> const char* {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Hello>) return "HELLO";
        else if constexpr (std::is_same_v<T, ObjectDetected>) return "DETECT";
        else if constexpr (std::is_same_v<T, GraspCommand>) return "CMD";
        else if constexpr (std::is_same_v<T, GraspResult>) return "RESULT";
        else if constexpr (std::is_same_v<T, Reset>) return "RESET";
        else if constexpr (std::is_same_v<T, Bye>) return "BYE";
        else if constexpr (std::is_same_v<T, PredictionReady>)
          return "PredictionReady";
        else if constexpr (std::is_same_v<T, RecordDone>) return "RecordDone";
        else if constexpr (std::is_same_v<T, SensorTrigger>)
          return "SensorTrigger";
        else if constexpr (std::is_same_v<T, GraspDone>) return "GraspDone";
        else if constexpr (std::is_same_v<T, Delivered>) return "Delivered";
        else return "Timeout";
      },
      e);
}

}  // namespace

const char* event_name(const BrainEvent& e) { return event_name_impl(e); }
const char* event_name(const RobotEvent& e) { return event_name_impl(e); }

BrainStep brain_step(BrainState state, const BrainEvent& event) {
  BrainStep out{state, {}, std::nullopt};
  auto deny = [&]() {
    out.violation = Violation{to_string(state), event_name(event)};
  };

  // Reset returns to the start state from anywhere, dropping pending work.
  if (std::holds_alternative<Reset>(event)) {
    out.state = BrainState::kWaitDetect;
    if (state != BrainState::kWaitDetect) out.actions.push_back(ActAbandon{});
    return out;
  }

  switch (state) {
    case BrainState::kWaitDetect:
      if (std::holds_alternative<ObjectDetected>(event)) {
        out.state = BrainState::kPredicting;
        out.actions.push_back(ActCapture{});
        return out;
      }
      break;
    case BrainState::kPredicting:
      if (const auto* p = std::get_if<PredictionReady>(&event)) {
        out.state = BrainState::kAwaitFeedback;
        out.actions.push_back(ActSend{Message{p->cmd}});
        return out;
      }
      break;
    case BrainState::kAwaitFeedback:
      if (const auto* r = std::get_if<GraspResult>(&event)) {
        out.state = BrainState::kRecording;
        out.actions.push_back(ActRecord{r->success});
        return out;
      }
      if (std::holds_alternative<Timeout>(event)) {
        out.state = BrainState::kWaitDetect;
        out.actions.push_back(ActSend{Message{Reset{}}});
        out.actions.push_back(ActAbandon{});
        return out;
      }
      break;
    case BrainState::kRecording:
      if (std::holds_alternative<RecordDone>(event)) {
        out.state = BrainState::kWaitDetect;
        return out;
      }
      break;
  }
  deny();
  return out;
}

RobotStep robot_step(RobotState state, const RobotEvent& event) {
  RobotStep out{state, {}, std::nullopt};
  auto deny = [&]() {
    out.violation = Violation{to_string(state), event_name(event)};
  };

  if (std::holds_alternative<Reset>(event)) {
    out.state = RobotState::kIdle;
    return out;
  }
  // Session end is acceptable while no grasp is in flight.
  if (std::holds_alternative<Bye>(event)) {
    if (state == RobotState::kIdle || state == RobotState::kReported) {
      out.state = RobotState::kIdle;
      return out;
    }
    deny();
    return out;
  }

  switch (state) {
    case RobotState::kIdle:
      if (std::holds_alternative<SensorTrigger>(event)) {
        out.state = RobotState::kReported;
        out.actions.push_back(ActSend{Message{ObjectDetected{}}});
        return out;
      }
      break;
    case RobotState::kReported:
      if (const auto* c = std::get_if<GraspCommand>(&event)) {
        out.state = RobotState::kExecuting;
        out.actions.push_back(ActExecute{*c});
        return out;
      }
      break;
    case RobotState::kExecuting:
      if (const auto* d = std::get_if<GraspDone>(&event)) {
        out.state = RobotState::kFeedbackSent;
        out.actions.push_back(ActSend{Message{GraspResult{d->success}}});
        return out;
      }
      if (std::holds_alternative<Timeout>(event)) {
        out.state = RobotState::kIdle;
        return out;
      }
      break;
    case RobotState::kFeedbackSent:
      if (std::holds_alternative<Delivered>(event)) {
        out.state = RobotState::kIdle;
        return out;
      }
      break;
  }
  deny();
  return out;
}

}  // namespace grasp
