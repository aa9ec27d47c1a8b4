#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include "grasp/endpoints.hpp"
#include "grasp/network.hpp"

namespace grasp {

enum class TransportKind { kInProc, kWire, kFiles };

TransportKind transport_kind_from_name(const std::string& name);
const char* to_string(TransportKind kind);

struct SessionConfig {
  std::uint64_t seed = 0;
  int attempts = 10;
  double epsilon = 0.2;
  TransportKind transport = TransportKind::kInProc;
  WorldConfig world;
  OracleConfig oracle;
  DetectorConfig detector;
  int patch_side = 32;
  bool store_scene = false;  // archive full scenes instead of patches
  std::filesystem::path dataset_dir;
  std::filesystem::path files_dir;  // polled-file link dir; defaults to
                                    // dataset_dir when empty
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;
  std::chrono::milliseconds poll_interval = kDefaultPollInterval;
  std::chrono::milliseconds step_timeout = kDefaultStepTimeout;
  std::ostream* log = nullptr;        // brain-side attempt lines
  std::ostream* robot_log = nullptr;  // robot-side adjudication lines
};

struct SessionOutcome {
  BrainReport brain;
  RobotReport robot;
  double seconds = 0.0;
};

// Runs both endpoints of one collection session in this process, the robot
// on a worker thread, joined over the configured transport.
SessionOutcome run_session(const SessionConfig& cfg, const Network& net);

// How a patch turns into a class during evaluation.
using Policy = std::function<AngleClass(const Image& patch, Rng& rng)>;

Policy greedy_policy(const Network& net);  // keeps its own copy
Policy random_policy();
Policy fixed_policy(AngleClass c);

struct EvalConfig {
  std::uint64_t seed = 0;
  int attempts = 100;
  WorldConfig world;
  OracleConfig oracle;
  DetectorConfig detector;
  int patch_side = 32;
};

struct EvalResult {
  int attempts = 0;
  int successes = 0;
  double rate = 0.0;  // successes / attempts

  double percent() const { return 100.0 * rate; }
};

// No link, no dataset writes: spawn, photograph, choose, adjudicate. An
// attempt with no detection counts as a failure.
EvalResult evaluate_policy(const Policy& policy, const EvalConfig& cfg);

struct CycleConfig {
  SessionConfig session;  // collection phase
  TrainConfig train;
  int eval_attempts = 500;
  std::uint64_t eval_seed = 0;  // 0 derives one from the session seed
};

struct CycleOutcome {
  EvalResult before;  // same evaluation stream on both sides of training
  EvalResult after;
  SessionOutcome collection;
  DatasetStats dataset;  // points the trainer actually saw
  TrainMetrics metrics;
  Network trained;
  double delta_points = 0.0;  // after minus before, percentage points
};

// collect -> train -> paired evaluation before/after on one eval stream.
CycleOutcome run_training_cycle(const CycleConfig& cfg, Network net);

// Aligned summary table plus key=value lines for the same numbers.
std::string format_stats_table(const DatasetStats& stats);
std::string format_stats_kv(const DatasetStats& stats);

}  // namespace grasp
