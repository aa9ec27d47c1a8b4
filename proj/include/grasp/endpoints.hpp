#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "grasp/dataset.hpp"
#include "grasp/network.hpp"
#include "grasp/perception.hpp"
#include "grasp/sim_world.hpp"
#include "grasp/transport.hpp"

namespace grasp {

inline constexpr std::chrono::milliseconds kDefaultStepTimeout{30000};

// Both endpoints derive per-attempt streams from the same seed, so the robot
// adjudicating attempt i and the brain photographing attempt i agree on the
// object without any image crossing the link.

struct RobotConfig {
  std::uint64_t seed = 0;
  int attempts = 10;
  WorldConfig world;
  OracleConfig oracle;
  std::chrono::milliseconds step_timeout = kDefaultStepTimeout;
  std::ostream* log = nullptr;
};

struct RobotReport {
  int executed = 0;  // grasps adjudicated
  int resets = 0;    // cycles the peer abandoned
};

// Stages one object per attempt, reports it, executes the commanded grasp
// against the oracle, and returns the outcome. Throws TransportError when the
// peer breaks protocol or goes quiet past the step timeout.
RobotReport run_robot(Transport& link, const RobotConfig& cfg);

struct BrainConfig {
  std::uint64_t seed = 0;
  int attempts = 10;
  double epsilon = 0.2;  // probability of substituting a random class
  WorldConfig world;
  DetectorConfig detector;
  int patch_side = 32;
  bool store_scene = false;  // archive the full scene instead of the patch
  std::chrono::milliseconds step_timeout = kDefaultStepTimeout;
  std::ostream* log = nullptr;
};

struct AttemptRecord {
  std::int64_t gc = -1;  // -1 for skipped attempts (nothing recorded)
  bool skipped = false;
  bool explored = false;  // class came from the epsilon draw
  int class_index = 0;
  double rotation = 0.0;  // motor value sent
  double confidence = 0.0;
  double cx = 0.0, cy = 0.0;
  bool success = false;
};

struct BrainReport {
  std::vector<AttemptRecord> attempts;
  DatasetStats recorded;  // finalized points only
  int skipped = 0;
};

// Waits for each object report, photographs its own copy of the scene,
// predicts (epsilon-greedy over the network), commands the grasp, and
// self-labels the stored patch from the feedback. Skipped attempts (no
// detection) reset the cycle and leave no dataset point.
BrainReport run_brain(Transport& link, DatasetWriter& writer,
                      const BrainConfig& cfg, const Network& net);

}  // namespace grasp
