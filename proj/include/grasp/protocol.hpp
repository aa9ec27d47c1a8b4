#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "grasp/geometry.hpp"

namespace grasp {

inline constexpr int kProtocolVersion = 1;

// Messages that cross the link. One line each on the wire:
//   "HELLO 1", "DETECT", "CMD 0.5 -0.138889", "RESULT 1", "RESET", "BYE"
struct Hello {
  int version = kProtocolVersion;
};
struct ObjectDetected {};
struct GraspCommand {
  double grip = kGripConstant;
  double rotation = 0.0;  // within [-kMotorLimit, kMotorLimit]
};
struct GraspResult {
  bool success = false;
};
struct Reset {};
struct Bye {};

using Message =
    std::variant<Hello, ObjectDetected, GraspCommand, GraspResult, Reset, Bye>;

std::string encode_frame(const Message& msg);  // newline-terminated
// Accepts a line with or without the trailing newline. Throws ParseError on
// unknown verbs, wrong arity, malformed numbers, or out-of-range values.
Message decode_frame(const std::string& line);

const char* message_name(const Message& msg);

// Local (non-wire) events driving the machines.
struct PredictionReady {
  GraspCommand cmd;
};
struct RecordDone {};
struct SensorTrigger {};
struct GraspDone {
  bool success = false;
};
struct Delivered {};  // feedback handed to the link, robot may rearm
struct Timeout {};

enum class BrainState { kWaitDetect, kPredicting, kAwaitFeedback, kRecording };
enum class RobotState { kIdle, kReported, kExecuting, kFeedbackSent };

const char* to_string(BrainState s);
const char* to_string(RobotState s);

using BrainEvent = std::variant<Hello, ObjectDetected, GraspCommand,
                                GraspResult, Reset, Bye, PredictionReady,
                                RecordDone, Timeout>;
using RobotEvent = std::variant<Hello, ObjectDetected, GraspCommand,
                                GraspResult, Reset, Bye, SensorTrigger,
                                GraspDone, Delivered, Timeout>;

const char* event_name(const BrainEvent& e);
const char* event_name(const RobotEvent& e);

// Side effects a transition asks its host to perform.
struct ActCapture {};  // grab the scene, run detection and prediction
struct ActSend {
  Message msg;
};
struct ActRecord {
  bool success = false;  // finalize the pending dataset point
};
struct ActExecute {
  GraspCommand cmd;
};
struct ActAbandon {};  // drop the pending capture, leave it provisional

using BrainAction = std::variant<ActCapture, ActSend, ActRecord, ActAbandon>;
using RobotAction = std::variant<ActSend, ActExecute>;

// A step either transitions (possibly emitting actions) or reports a protocol
// violation, in which case the state is unchanged and actions are empty.
struct Violation {
  std::string state;
  std::string event;
  std::string text() const { return event + " in state " + state; }
};

struct BrainStep {
  BrainState state;
  std::vector<BrainAction> actions;
  std::optional<Violation> violation;
};
struct RobotStep {
  RobotState state;
  std::vector<RobotAction> actions;
  std::optional<Violation> violation;
};

// Pure transition functions: every (state, event) pair is either a defined
// transition or a defined violation.
BrainStep brain_step(BrainState state, const BrainEvent& event);
RobotStep robot_step(RobotState state, const RobotEvent& event);

}  // namespace grasp
