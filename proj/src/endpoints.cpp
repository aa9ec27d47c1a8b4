#include "grasp/endpoints.hpp"

#include <cstdio>
#include <ostream>

#include "grasp/errors.hpp"
#include "grasp/protocol.hpp"

namespace grasp {
namespace {

BrainEvent to_brain_event(const Message& m) {
  return std::visit([](const auto& v) { return BrainEvent{v}; }, m);
}

RobotEvent to_robot_event(const Message& m) {
  return std::visit([](const auto& v) { return RobotEvent{v}; }, m);
}

[[noreturn]] void violated(const Violation& v) {
  throw TransportError("protocol violation: " + v.text());
}

void shake_hands_as_robot(Transport& link,
                          std::chrono::milliseconds timeout) {
  auto m = link.receive(timeout);
  if (!m) throw TransportError("no greeting from the brain side");
  const auto* hello = std::get_if<Hello>(&*m);
  if (!hello)
    throw TransportError(std::string("handshake: expected HELLO, got ") +
                         message_name(*m));
  if (hello->version != kProtocolVersion)
    throw TransportError("unsupported protocol version " +
                         std::to_string(hello->version));
  link.send(Hello{});
}

void shake_hands_as_brain(Transport& link,
                          std::chrono::milliseconds timeout) {
  link.send(Hello{});
  auto m = link.receive(timeout);
  if (!m) throw TransportError("no greeting reply from the robot side");
  const auto* hello = std::get_if<Hello>(&*m);
  if (!hello)
    throw TransportError(std::string("handshake: expected HELLO, got ") +
                         message_name(*m));
  if (hello->version != kProtocolVersion)
    throw TransportError("unsupported protocol version " +
                         std::to_string(hello->version));
}

}  // namespace

RobotReport run_robot(Transport& link, const RobotConfig& cfg) {
  if (cfg.attempts < 0) throw ConfigError("attempts must be non-negative");
  if (link.handshakes()) shake_hands_as_robot(link, cfg.step_timeout);

  RobotReport report;
  bool peer_gone = false;
  for (int i = 0; i < cfg.attempts && !peer_gone; ++i) {
    Rng spawn_rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(i),
                               kStreamSpawn);
    SimObject obj = spawn_object(spawn_rng, cfg.world);

    RobotState st = RobotState::kIdle;
    auto feed = [&](const RobotEvent& ev) {
      RobotStep step = robot_step(st, ev);
      if (step.violation) violated(*step.violation);
      st = step.state;
      return step.actions;
    };
    auto perform = [&](const std::vector<RobotAction>& actions) {
      for (const auto& a : actions)
        if (const auto* s = std::get_if<ActSend>(&a)) link.send(s->msg);
    };

    perform(feed(SensorTrigger{}));  // stage the object, report it

    auto msg = link.receive(cfg.step_timeout);
    if (!msg)
      throw TransportError("timed out waiting for a grasp command");

    if (std::holds_alternative<Reset>(*msg)) {
      feed(Reset{});
      ++report.resets;
      if (cfg.log)
        *cfg.log << "[robot] attempt " << i << ": peer reset the cycle\n";
      continue;
    }
    if (std::holds_alternative<Bye>(*msg)) {
      feed(Bye{});
      peer_gone = true;
      break;
    }

    RobotStep step = robot_step(st, to_robot_event(*msg));
    if (step.violation) violated(*step.violation);
    st = step.state;

    for (const auto& a : step.actions) {
      if (const auto* exec = std::get_if<ActExecute>(&a)) {
        double gripper = motor_to_degrees(MotorRotation(exec->cmd.rotation));
        Rng oracle_rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(i),
                                    kStreamOracle);
        bool ok = grasp_oracle(obj, gripper, cfg.oracle, oracle_rng);
        if (cfg.log) {
          char line[160];
          std::snprintf(line, sizeof line,
                        "[robot] attempt %d: gripper=%.1fdeg "
                        "orientation=%.1fdeg -> %s\n",
                        i, gripper, obj.orientation, ok ? "success" : "failure");
          *cfg.log << line;
        }
        perform(feed(GraspDone{ok}));
        feed(Delivered{});
        ++report.executed;
      } else if (const auto* s = std::get_if<ActSend>(&a)) {
        link.send(s->msg);
      }
    }
  }

  if (link.handshakes() && !peer_gone) {
    auto msg = link.receive(cfg.step_timeout);
    if (!msg) throw TransportError("peer never ended the session");
    if (!std::holds_alternative<Bye>(*msg)) {
      RobotStep step = robot_step(RobotState::kIdle, to_robot_event(*msg));
      if (step.violation) violated(*step.violation);
      throw TransportError(std::string("expected session end, got ") +
                           message_name(*msg));
    }
  }
  return report;
}

BrainReport run_brain(Transport& link, DatasetWriter& writer,
                      const BrainConfig& cfg, const Network& net) {
  if (cfg.attempts < 0) throw ConfigError("attempts must be non-negative");
  if (cfg.epsilon < 0.0 || cfg.epsilon > 1.0)
    throw ConfigError("epsilon must lie in [0, 1]");
  if (cfg.patch_side != net.arch.in_h || cfg.patch_side != net.arch.in_w)
    throw ShapeError("patch side does not match the network input");
  if (link.handshakes()) shake_hands_as_brain(link, cfg.step_timeout);

  BrainReport report;
  for (int i = 0; i < cfg.attempts; ++i) {
    BrainState st = BrainState::kWaitDetect;
    auto feed = [&](const BrainEvent& ev) {
      BrainStep step = brain_step(st, ev);
      if (step.violation) violated(*step.violation);
      st = step.state;
      return step.actions;
    };

    auto msg = link.receive(cfg.step_timeout);
    if (!msg) throw TransportError("timed out waiting for an object report");
    if (!std::holds_alternative<ObjectDetected>(*msg)) {
      BrainStep step = brain_step(st, to_brain_event(*msg));
      if (step.violation) violated(*step.violation);
      throw TransportError(std::string("expected an object report, got ") +
                           message_name(*msg));
    }
    feed(ObjectDetected{});  // -> Predicting, capture runs below

    Rng spawn_rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(i),
                               kStreamSpawn);
    SimObject obj = spawn_object(spawn_rng, cfg.world);
    Rng noise_rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(i),
                               kStreamNoise);
    Image scene = render(obj, cfg.world, &noise_rng);

    std::vector<Detection> found = detect(scene, cfg.detector);
    if (found.empty()) {
      link.send(Reset{});
      feed(Reset{});
      AttemptRecord rec;
      rec.skipped = true;
      report.attempts.push_back(rec);
      ++report.skipped;
      if (cfg.log)
        *cfg.log << "[brain] attempt " << i << ": no detection, cycle reset\n";
      continue;
    }

    const Detection& det = found.front();
    Image patch = crop_patch(scene, det, cfg.patch_side);
    Prediction pred = forward(net, patch);
    AngleClass chosen = pred.chosen;
    bool explored = false;
    Rng policy_rng = derive_rng(cfg.seed, static_cast<std::uint64_t>(i),
                                kStreamPolicy);
    if (policy_rng.uniform() < cfg.epsilon) {
      chosen = AngleClass(static_cast<int>(
          policy_rng.uniform_int(kNumAngleClasses)));
      explored = true;
    }
    MotorRotation rotation = degrees_to_motor(class_to_degrees(chosen));

    std::int64_t gc = writer.begin_point(cfg.store_scene ? scene : patch);
    for (const auto& a :
         feed(PredictionReady{GraspCommand{kGripConstant, rotation.value()}}))
      if (const auto* s = std::get_if<ActSend>(&a)) link.send(s->msg);

    auto fb = link.receive(cfg.step_timeout);
    if (!fb) {
      for (const auto& a : feed(Timeout{}))
        if (const auto* s = std::get_if<ActSend>(&a)) {
          try {
            link.send(s->msg);  // best-effort reset toward a dead peer
          } catch (const TransportError&) {
          }
        }
      throw TransportError("no grasp feedback before the step timeout");
    }
    if (!std::holds_alternative<GraspResult>(*fb)) {
      BrainStep step = brain_step(st, to_brain_event(*fb));
      if (step.violation) violated(*step.violation);
      throw TransportError(std::string("expected grasp feedback, got ") +
                           message_name(*fb));
    }
    bool success = std::get<GraspResult>(*fb).success;
    for (const auto& a : feed(GraspResult{success}))
      if (const auto* r = std::get_if<ActRecord>(&a))
        writer.finish_point(gc, chosen, r->success);
    feed(RecordDone{});

    AttemptRecord rec;
    rec.gc = gc;
    rec.explored = explored;
    rec.class_index = chosen.index();
    rec.rotation = rotation.value();
    rec.confidence = det.confidence;
    rec.cx = det.cx;
    rec.cy = det.cy;
    rec.success = success;
    report.attempts.push_back(rec);
    success ? ++report.recorded.successful : ++report.recorded.unsuccessful;
    ++report.recorded.total;

    if (cfg.log) {
      char line[200];
      std::snprintf(line, sizeof line,
                    "[brain] attempt %d: label=%s conf=%.3f x=%.1f y=%.1f "
                    "class=%d output=%.6f%s -> %s\n",
                    i, det.label.c_str(), det.confidence, det.cx, det.cy,
                    chosen.index(), rotation.value(),
                    explored ? " (explore)" : "",
                    success ? "success" : "failure");
      *cfg.log << line;
    }
  }

  if (link.handshakes()) link.send(Bye{});
  return report;
}

}  // namespace grasp
