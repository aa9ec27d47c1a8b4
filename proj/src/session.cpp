#include "grasp/session.hpp"

#include <cstdio>
#include <exception>
#include <memory>
#include <thread>

#include "grasp/errors.hpp"

namespace grasp {

TransportKind transport_kind_from_name(const std::string& name) {
  if (name == "inproc") return TransportKind::kInProc;
  if (name == "wire") return TransportKind::kWire;
  if (name == "files") return TransportKind::kFiles;
  throw ConfigError("unknown transport: " + name);
}

const char* to_string(TransportKind kind) {
  switch (kind) {
    case TransportKind::kInProc: return "inproc";
    case TransportKind::kWire: return "wire";
    case TransportKind::kFiles: return "files";
  }
  return "?";
}

SessionOutcome run_session(const SessionConfig& cfg, const Network& net) {
  if (cfg.dataset_dir.empty())
    throw ConfigError("a session needs a dataset directory");
  if (cfg.attempts < 1) throw ConfigError("a session needs attempts >= 1");

  DatasetWriter writer(cfg.dataset_dir);

  RobotConfig rc;
  rc.seed = cfg.seed;
  rc.attempts = cfg.attempts;
  rc.world = cfg.world;
  rc.oracle = cfg.oracle;
  rc.step_timeout = cfg.step_timeout;
  rc.log = cfg.robot_log;

  BrainConfig bc;
  bc.seed = cfg.seed;
  bc.attempts = cfg.attempts;
  bc.epsilon = cfg.epsilon;
  bc.world = cfg.world;
  bc.detector = cfg.detector;
  bc.patch_side = cfg.patch_side;
  bc.store_scene = cfg.store_scene;
  bc.step_timeout = cfg.step_timeout;
  bc.log = cfg.log;

  std::unique_ptr<Transport> brain_link, robot_link;
  switch (cfg.transport) {
    case TransportKind::kInProc: {
      auto pair = make_inproc_pair();
      brain_link = std::move(pair.first);
      robot_link = std::move(pair.second);
      break;
    }
    case TransportKind::kFiles: {
      const auto dir = cfg.files_dir.empty() ? cfg.dataset_dir : cfg.files_dir;
      brain_link = file_transport_brain(
          dir, [&writer] { return writer.current_gc(); }, cfg.poll_interval);
      robot_link = file_transport_robot(dir, cfg.poll_interval);
      break;
    }
    case TransportKind::kWire:
      break;  // sockets are created on each side below
  }

  SessionOutcome outcome;
  auto started = std::chrono::steady_clock::now();

  std::exception_ptr robot_error;
  std::thread robot([&] {
    try {
      std::unique_ptr<Transport> listened;
      Transport* link = robot_link.get();
      if (cfg.transport == TransportKind::kWire) {
        listened = wire_listen(cfg.port, cfg.step_timeout);
        link = listened.get();
      }
      outcome.robot = run_robot(*link, rc);
    } catch (...) {
      robot_error = std::current_exception();
    }
  });

  std::exception_ptr brain_error;
  try {
    Transport* link = brain_link.get();
    std::unique_ptr<Transport> connected;
    if (cfg.transport == TransportKind::kWire) {
      connected = wire_connect(cfg.host, cfg.port, cfg.step_timeout);
      link = connected.get();
    }
    outcome.brain = run_brain(*link, writer, bc, net);
  } catch (...) {
    brain_error = std::current_exception();
  }

  robot.join();
  if (brain_error && robot_error) {
    auto what = [](std::exception_ptr ep) -> std::string {
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        return e.what();
      } catch (...) {
        return "unknown error";
      }
    };
    throw TransportError("brain: " + what(brain_error) +
                         "; robot: " + what(robot_error));
  }
  if (brain_error) std::rethrow_exception(brain_error);
  if (robot_error) std::rethrow_exception(robot_error);

  outcome.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                        .count();
  return outcome;
}

Policy greedy_policy(const Network& net) {
  auto owned = std::make_shared<Network>(net);
  return [owned](const Image& patch, Rng&) {
    return forward(*owned, patch).chosen;
  };
}

Policy random_policy() {
  return [](const Image&, Rng& rng) {
    return AngleClass(static_cast<int>(rng.uniform_int(kNumAngleClasses)));
  };
}

Policy fixed_policy(AngleClass c) {
  return [c](const Image&, Rng&) { return c; };
}

EvalResult evaluate_policy(const Policy& policy, const EvalConfig& cfg) {
  if (cfg.attempts <= 0) throw ConfigError("evaluation needs attempts > 0");
  EvalResult result;
  result.attempts = cfg.attempts;
  for (int i = 0; i < cfg.attempts; ++i) {
    const auto idx = static_cast<std::uint64_t>(i);
    Rng spawn_rng = derive_rng(cfg.seed, idx, kStreamSpawn);
    SimObject obj = spawn_object(spawn_rng, cfg.world);
    Rng noise_rng = derive_rng(cfg.seed, idx, kStreamNoise);
    Image scene = render(obj, cfg.world, &noise_rng);
    auto found = detect(scene, cfg.detector);
    if (found.empty()) continue;  // nothing to grasp counts against the run
    Image patch = crop_patch(scene, found.front(), cfg.patch_side);
    Rng policy_rng = derive_rng(cfg.seed, idx, kStreamPolicy);
    AngleClass chosen = policy(patch, policy_rng);
    Rng oracle_rng = derive_rng(cfg.seed, idx, kStreamOracle);
    if (grasp_oracle(obj, class_to_degrees(chosen), cfg.oracle, oracle_rng))
      ++result.successes;
  }
  result.rate = static_cast<double>(result.successes) / result.attempts;
  return result;
}

CycleOutcome run_training_cycle(const CycleConfig& cfg, Network net) {
  EvalConfig ec;
  ec.seed = cfg.eval_seed != 0
                ? cfg.eval_seed
                : derive_rng(cfg.session.seed, 0, kStreamEval).next_u64();
  ec.attempts = cfg.eval_attempts;
  ec.world = cfg.session.world;
  ec.oracle = cfg.session.oracle;
  ec.detector = cfg.session.detector;
  ec.patch_side = cfg.session.patch_side;

  CycleOutcome out;
  out.before = evaluate_policy(greedy_policy(net), ec);
  out.collection = run_session(cfg.session, net);

  LoadReport loaded = load_dataset(cfg.session.dataset_dir);
  if (loaded.points.empty())
    throw TrainError("collection produced no training points");
  out.dataset = stats(loaded.points);

  auto trained = train(std::move(net), loaded.points, cfg.train);
  out.trained = std::move(trained.first);
  out.metrics = std::move(trained.second);

  out.after = evaluate_policy(greedy_policy(out.trained), ec);
  out.delta_points = out.after.percent() - out.before.percent();
  return out;
}

std::string format_stats_table(const DatasetStats& stats) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "+----------------------+--------+\n"
                "| Successful Grasps    | %6lld |\n"
                "| Unsuccessful Grasps  | %6lld |\n"
                "| Total Grasp Attempts | %6lld |\n"
                "| Success Rate         | %5.2f%% |\n"
                "+----------------------+--------+\n",
                static_cast<long long>(stats.successful),
                static_cast<long long>(stats.unsuccessful),
                static_cast<long long>(stats.total),
                100.0 * stats.success_rate());
  return buf;
}

std::string format_stats_kv(const DatasetStats& stats) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "successful=%lld\nunsuccessful=%lld\ntotal=%lld\n"
                "success_rate_percent=%.6f\n",
                static_cast<long long>(stats.successful),
                static_cast<long long>(stats.unsuccessful),
                static_cast<long long>(stats.total),
                100.0 * stats.success_rate());
  return buf;
}

}  // namespace grasp
