#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "grasp/errors.hpp"
#include "grasp/session.hpp"

namespace {

using namespace grasp;

struct WorldFlags {
  std::string preset = "default";
  double tolerance = 15.0;
  double round_aspect = 1.2;
  double flip_prob = 0.0;
  double noise = -1.0;  // <0 keeps the preset's value
};

void add_world_flags(CLI::App* cmd, WorldFlags& f) {
  cmd->add_option("--world", f.preset, "object preset: default|elongated|discs")
      ->check(CLI::IsMember({"default", "elongated", "discs"}));
  cmd->add_option("--tolerance", f.tolerance,
                  "oracle angular tolerance, degrees");
  cmd->add_option("--round-aspect", f.round_aspect,
                  "aspect at or below which any angle succeeds");
  cmd->add_option("--flip-prob", f.flip_prob, "oracle label noise probability");
  cmd->add_option("--noise", f.noise, "additive image noise sigma");
}

WorldConfig make_world(const WorldFlags& f) {
  WorldConfig w;
  if (f.preset == "elongated") w = WorldConfig::elongated();
  if (f.preset == "discs") w = WorldConfig::discs();
  if (f.noise >= 0.0) w.noise_sigma = f.noise;
  return w;
}

OracleConfig make_oracle(const WorldFlags& f) {
  OracleConfig o;
  o.tolerance_deg = f.tolerance;
  o.round_aspect = f.round_aspect;
  o.flip_prob = f.flip_prob;
  return o;
}

Network load_or_init(const std::string& model_path, std::uint64_t seed) {
  if (model_path.empty()) return init_network(seed);
  return load_model(model_path);
}

void write_report(const std::string& path, const std::string& body) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::trunc);
  out << body;
  if (!out) throw DataError("cannot write report file: " + path);
}

std::string kv(const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.6f\n", key, v);
  return buf;
}

std::string kv(const char* key, long long v) {
  return std::string(key) + "=" + std::to_string(v) + "\n";
}

int run_cli(int argc, char** argv) {
  CLI::App app{"self-supervised grasping loop: simulate, predict, label, retrain"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");

  // ------------------------------------------------------------- session
  auto* session = app.add_subcommand(
      "session", "run one self-labeling collection session (both endpoints)");
  SessionConfig sess;
  sess.attempts = 72;
  WorldFlags sess_world;
  std::string sess_transport = "inproc", sess_model, sess_report, sess_dir,
              sess_files;
  int sess_poll = 3000, sess_timeout = 30000;
  bool sess_verbose = false;
  session->add_option("--seed", sess.seed, "session seed");
  session->add_option("--attempts", sess.attempts, "grasp attempts to run");
  session->add_option("--epsilon", sess.epsilon,
                      "random-class exploration probability");
  session->add_option("--transport", sess_transport,
                      "link between endpoints: inproc|wire|files")
      ->check(CLI::IsMember({"inproc", "wire", "files"}));
  session->add_option("--dir", sess_dir, "dataset directory")->required();
  session->add_option("--files-dir", sess_files,
                      "directory for the polled-file link (default: --dir)");
  session->add_option("--model", sess_model,
                      "model file to load (omitted: fresh network from seed)");
  session->add_option("--port", sess.port, "wire transport port");
  session->add_option("--poll-interval", sess_poll,
                      "file transport poll interval, ms");
  session->add_option("--timeout", sess_timeout, "per-step timeout, ms");
  session->add_option("--report", sess_report, "write key=value summary here");
  session->add_flag("--store-scene", sess.store_scene,
                    "archive full scenes instead of classifier patches");
  session->add_flag("--verbose", sess_verbose, "also print robot-side lines");
  add_world_flags(session, sess_world);
  session->callback([&] {
    sess.transport = transport_kind_from_name(sess_transport);
    sess.world = make_world(sess_world);
    sess.oracle = make_oracle(sess_world);
    sess.dataset_dir = sess_dir;
    sess.files_dir = sess_files;
    sess.poll_interval = std::chrono::milliseconds(sess_poll);
    sess.step_timeout = std::chrono::milliseconds(sess_timeout);
    sess.log = &std::cout;
    sess.robot_log = sess_verbose ? &std::cout : nullptr;

    Network net = load_or_init(sess_model, sess.seed);
    SessionOutcome out = run_session(sess, net);
    std::cout << format_stats_table(out.brain.recorded);
    std::cout << "skipped=" << out.brain.skipped << " seconds=" << out.seconds
              << "\n";
    std::string body;
    body += std::string("transport=") + to_string(sess.transport) + "\n";
    body += kv("seed", static_cast<long long>(sess.seed));
    body += kv("attempts", static_cast<long long>(sess.attempts));
    body += kv("skipped", static_cast<long long>(out.brain.skipped));
    body += format_stats_kv(out.brain.recorded);
    body += kv("seconds", out.seconds);
    write_report(sess_report, body);
  });

  // --------------------------------------------------------------- train
  auto* train_cmd = app.add_subcommand(
      "train", "fit the network to a recorded dataset directory");
  std::string tr_dir, tr_model, tr_save = "model.bin", tr_report;
  std::uint64_t tr_seed = 0;
  TrainConfig tr_cfg;
  bool tr_no_shuffle = false;
  train_cmd->add_option("--dir", tr_dir, "dataset directory")->required();
  train_cmd->add_option("--model", tr_model,
                        "starting model (omitted: fresh network from seed)");
  train_cmd->add_option("--save", tr_save, "where to store the trained model");
  train_cmd->add_option("--seed", tr_seed, "seed for a fresh network");
  train_cmd->add_option("--epochs", tr_cfg.epochs, "training epochs");
  train_cmd->add_option("--lr", tr_cfg.learning_rate, "learning rate");
  train_cmd->add_option("--batch", tr_cfg.batch_size, "batch size");
  train_cmd->add_option("--momentum", tr_cfg.momentum, "momentum coefficient");
  train_cmd->add_option("--shuffle-seed", tr_cfg.shuffle_seed,
                        "epoch shuffle seed (default: --seed)");
  train_cmd->add_flag("--no-shuffle", tr_no_shuffle,
                      "visit points in dataset order every epoch");
  train_cmd->add_option("--report", tr_report, "write key=value summary here");
  train_cmd->callback([&] {
    tr_cfg.shuffle = !tr_no_shuffle;
    if (train_cmd->count("--shuffle-seed") == 0) tr_cfg.shuffle_seed = tr_seed;
    LoadReport loaded = load_dataset(tr_dir);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& e : loaded.errors) std::cerr << "error: " << e << "\n";
    if (loaded.points.empty())
      throw TrainError("no finalized points in " + tr_dir);
    std::cout << "training on " << loaded.points.size() << " points\n";
    Network net = load_or_init(tr_model, tr_seed);
    auto [trained, metrics] = train(std::move(net), loaded.points, tr_cfg);
    for (std::size_t e = 0; e < metrics.epoch_mean_loss.size(); ++e)
      std::cout << "epoch " << e << ": mean loss "
                << metrics.epoch_mean_loss[e] << "\n";
    if (!tr_save.empty()) {
      save_model(trained, tr_save);
      std::cout << "saved " << tr_save << "\n";
    }
    std::string body = kv("points", (long long)loaded.points.size());
    body += kv("epochs", (long long)tr_cfg.epochs);
    if (!metrics.epoch_mean_loss.empty()) {
      body += kv("first_epoch_loss", metrics.epoch_mean_loss.front());
      body += kv("last_epoch_loss", metrics.epoch_mean_loss.back());
    }
    write_report(tr_report, body);
  });

  // ------------------------------------------------------------ evaluate
  auto* eval_cmd = app.add_subcommand(
      "evaluate", "measure a policy's success rate on fresh seeded objects");
  EvalConfig ev;
  ev.attempts = 500;
  WorldFlags ev_world;
  std::string ev_model, ev_policy = "greedy", ev_report;
  int ev_fixed_class = 9;
  eval_cmd->add_option("--seed", ev.seed, "evaluation stream seed");
  eval_cmd->add_option("--attempts", ev.attempts, "evaluation attempts");
  eval_cmd->add_option("--model", ev_model,
                       "model file (omitted: fresh network from seed)");
  eval_cmd->add_option("--policy", ev_policy, "greedy|random|fixed")
      ->check(CLI::IsMember({"greedy", "random", "fixed"}));
  eval_cmd->add_option("--class", ev_fixed_class,
                       "class index for the fixed policy");
  eval_cmd->add_option("--report", ev_report, "write key=value summary here");
  add_world_flags(eval_cmd, ev_world);
  eval_cmd->callback([&] {
    ev.world = make_world(ev_world);
    ev.oracle = make_oracle(ev_world);
    Policy policy;
    if (ev_policy == "greedy")
      policy = greedy_policy(load_or_init(ev_model, ev.seed));
    else if (ev_policy == "random")
      policy = random_policy();
    else
      policy = fixed_policy(AngleClass(ev_fixed_class));
    EvalResult r = evaluate_policy(policy, ev);
    std::printf("%d/%d successful grasps (%.2f%%)\n", r.successes, r.attempts,
                r.percent());
    std::string body = kv("attempts", (long long)r.attempts);
    body += kv("successes", (long long)r.successes);
    body += kv("rate_percent", r.percent());
    write_report(ev_report, body);
  });

  // --------------------------------------------------------------- cycle
  auto* cycle_cmd = app.add_subcommand(
      "cycle", "collect, retrain, and compare success before/after");
  CycleConfig cy;
  cy.session.attempts = 500;
  cy.session.epsilon = 0.2;
  WorldFlags cy_world;
  cy_world.preset = "elongated";
  std::string cy_transport = "inproc", cy_model, cy_save, cy_report, cy_dir,
              cy_files;
  int cy_poll = 3000, cy_timeout = 30000;
  bool cy_verbose = false;
  cycle_cmd->add_option("--seed", cy.session.seed, "cycle seed");
  cycle_cmd->add_option("--attempts", cy.session.attempts,
                        "collection attempts");
  cycle_cmd->add_option("--epsilon", cy.session.epsilon,
                        "exploration probability during collection");
  cycle_cmd->add_option("--transport", cy_transport, "inproc|wire|files")
      ->check(CLI::IsMember({"inproc", "wire", "files"}));
  cycle_cmd->add_option("--dir", cy_dir, "dataset directory")->required();
  cycle_cmd->add_option("--files-dir", cy_files,
                        "directory for the polled-file link (default: --dir)");
  cycle_cmd->add_option("--model", cy_model,
                        "starting model (omitted: fresh network from seed)");
  cycle_cmd->add_option("--save", cy_save, "where to store the trained model");
  cycle_cmd->add_option("--port", cy.session.port, "wire transport port");
  cycle_cmd->add_option("--poll-interval", cy_poll,
                        "file transport poll interval, ms");
  cycle_cmd->add_option("--timeout", cy_timeout, "per-step timeout, ms");
  cycle_cmd->add_option("--epochs", cy.train.epochs, "training epochs");
  cycle_cmd->add_option("--lr", cy.train.learning_rate, "learning rate");
  cycle_cmd->add_option("--batch", cy.train.batch_size, "batch size");
  cycle_cmd->add_option("--momentum", cy.train.momentum, "momentum");
  cycle_cmd->add_option("--eval-attempts", cy.eval_attempts,
                        "paired evaluation attempts");
  cycle_cmd->add_option("--eval-seed", cy.eval_seed,
                        "evaluation stream seed (0: derived)");
  cycle_cmd->add_option("--report", cy_report, "write key=value summary here");
  cycle_cmd->add_flag("--verbose", cy_verbose, "print per-attempt lines");
  add_world_flags(cycle_cmd, cy_world);
  cycle_cmd->callback([&] {
    cy.session.transport = transport_kind_from_name(cy_transport);
    cy.session.world = make_world(cy_world);
    cy.session.oracle = make_oracle(cy_world);
    cy.session.dataset_dir = cy_dir;
    cy.session.files_dir = cy_files;
    cy.session.poll_interval = std::chrono::milliseconds(cy_poll);
    cy.session.step_timeout = std::chrono::milliseconds(cy_timeout);
    cy.session.log = cy_verbose ? &std::cout : nullptr;
    cy.train.shuffle_seed = cy.session.seed;

    Network net = load_or_init(cy_model, cy.session.seed);
    CycleOutcome out = run_training_cycle(cy, std::move(net));
    std::printf("untrained: %d/%d (%.2f%%)\n", out.before.successes,
                out.before.attempts, out.before.percent());
    std::printf("trained:   %d/%d (%.2f%%)\n", out.after.successes,
                out.after.attempts, out.after.percent());
    std::printf("delta:     %+.2f points\n", out.delta_points);
    std::cout << format_stats_table(out.dataset);
    if (!cy_save.empty()) {
      save_model(out.trained, cy_save);
      std::cout << "saved " << cy_save << "\n";
    }
    std::string body = kv("untrained_percent", out.before.percent());
    body += kv("trained_percent", out.after.percent());
    body += kv("delta_points", out.delta_points);
    body += kv("dataset_total", (long long)out.dataset.total);
    body += kv("skipped", (long long)out.collection.brain.skipped);
    body += kv("collect_seconds", out.collection.seconds);
    if (!out.metrics.epoch_mean_loss.empty()) {
      body += kv("first_epoch_loss", out.metrics.epoch_mean_loss.front());
      body += kv("last_epoch_loss", out.metrics.epoch_mean_loss.back());
    }
    write_report(cy_report, body);
  });

  // --------------------------------------------------------------- stats
  auto* stats_cmd = app.add_subcommand(
      "stats", "summarize the labels recorded in a dataset directory");
  std::string st_dir, st_report;
  stats_cmd->add_option("--dir", st_dir, "dataset directory")->required();
  stats_cmd->add_option("--report", st_report, "write key=value summary here");
  stats_cmd->callback([&] {
    LoadReport loaded = load_dataset(st_dir);
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& e : loaded.errors) std::cerr << "error: " << e << "\n";
    DatasetStats s = stats(loaded.points);
    std::cout << format_stats_table(s);
    std::cout << format_stats_kv(s);
    write_report(st_report, format_stats_kv(s));
  });

  // --------------------------------------------------------- serve-robot
  auto* robot_cmd = app.add_subcommand(
      "serve-robot", "run the robot endpoint alone (wire or files link)");
  RobotConfig rob;
  WorldFlags rob_world;
  std::string rob_transport = "wire", rob_files;
  std::uint16_t rob_port = kDefaultPort;
  int rob_poll = 3000, rob_timeout = 30000;
  robot_cmd->add_option("--seed", rob.seed, "session seed (shared)");
  robot_cmd->add_option("--attempts", rob.attempts, "grasp cycles to serve");
  robot_cmd->add_option("--transport", rob_transport, "wire|files")
      ->check(CLI::IsMember({"wire", "files"}));
  robot_cmd->add_option("--port", rob_port, "port to listen on");
  robot_cmd->add_option("--files-dir", rob_files, "polled-file directory");
  robot_cmd->add_option("--poll-interval", rob_poll, "poll interval, ms");
  robot_cmd->add_option("--timeout", rob_timeout, "per-step timeout, ms");
  add_world_flags(robot_cmd, rob_world);
  robot_cmd->callback([&] {
    rob.world = make_world(rob_world);
    rob.oracle = make_oracle(rob_world);
    rob.step_timeout = std::chrono::milliseconds(rob_timeout);
    rob.log = &std::cout;
    std::unique_ptr<Transport> link;
    if (rob_transport == "files") {
      if (rob_files.empty())
        throw ConfigError("files transport needs --files-dir");
      link = file_transport_robot(rob_files,
                                  std::chrono::milliseconds(rob_poll));
    } else {
      link = wire_listen(rob_port, rob.step_timeout);
    }
    RobotReport r = run_robot(*link, rob);
    std::cout << "executed=" << r.executed << " resets=" << r.resets << "\n";
  });

  // --------------------------------------------------------- serve-brain
  auto* brain_cmd = app.add_subcommand(
      "serve-brain", "run the brain endpoint alone (wire or files link)");
  BrainConfig bra;
  WorldFlags bra_world;
  std::string bra_transport = "wire", bra_files, bra_dir, bra_model, bra_host =
      "127.0.0.1", bra_report;
  std::uint16_t bra_port = kDefaultPort;
  int bra_poll = 3000, bra_timeout = 30000;
  brain_cmd->add_option("--seed", bra.seed, "session seed (shared)");
  brain_cmd->add_option("--attempts", bra.attempts, "grasp cycles to run");
  brain_cmd->add_option("--epsilon", bra.epsilon, "exploration probability");
  brain_cmd->add_option("--transport", bra_transport, "wire|files")
      ->check(CLI::IsMember({"wire", "files"}));
  brain_cmd->add_option("--host", bra_host, "robot host to connect to");
  brain_cmd->add_option("--port", bra_port, "robot port");
  brain_cmd->add_option("--files-dir", bra_files, "polled-file directory");
  brain_cmd->add_option("--dir", bra_dir, "dataset directory")->required();
  brain_cmd->add_option("--model", bra_model,
                        "model file (omitted: fresh network from seed)");
  brain_cmd->add_option("--poll-interval", bra_poll, "poll interval, ms");
  brain_cmd->add_option("--timeout", bra_timeout, "per-step timeout, ms");
  brain_cmd->add_option("--report", bra_report, "write key=value summary here");
  add_world_flags(brain_cmd, bra_world);
  brain_cmd->callback([&] {
    bra.world = make_world(bra_world);
    bra.detector = DetectorConfig{};
    bra.step_timeout = std::chrono::milliseconds(bra_timeout);
    bra.log = &std::cout;
    DatasetWriter writer(bra_dir);
    std::unique_ptr<Transport> link;
    if (bra_transport == "files") {
      if (bra_files.empty())
        throw ConfigError("files transport needs --files-dir");
      link = file_transport_brain(bra_files,
                                  [&writer] { return writer.current_gc(); },
                                  std::chrono::milliseconds(bra_poll));
    } else {
      link = wire_connect(bra_host, bra_port, bra.step_timeout);
    }
    Network net = load_or_init(bra_model, bra.seed);
    BrainReport r = run_brain(*link, writer, bra, net);
    std::cout << format_stats_table(r.recorded);
    std::string body = format_stats_kv(r.recorded);
    body += kv("skipped", (long long)r.skipped);
    write_report(bra_report, body);
  });

  // ----------------------------------------------------------- gradcheck
  auto* grad_cmd = app.add_subcommand(
      "gradcheck", "compare analytic gradients against finite differences");
  std::uint64_t gc_seed = 1;
  int gc_seeds = 5, gc_checks = 200;
  double gc_threshold = 1e-4;
  grad_cmd->add_option("--seed", gc_seed, "first seed");
  grad_cmd->add_option("--seeds", gc_seeds, "number of seeds to try");
  grad_cmd->add_option("--checks", gc_checks, "parameters sampled per seed");
  grad_cmd->add_option("--threshold", gc_threshold,
                       "maximum acceptable relative error");
  grad_cmd->callback([&] {
    bool all_ok = true;
    for (int k = 0; k < gc_seeds; ++k) {
      std::uint64_t seed = gc_seed + static_cast<std::uint64_t>(k);
      Network net = init_network(seed);
      Rng rng = derive_rng(seed, 0, kStreamNoise);
      Image patch(net.arch.in_h, net.arch.in_w);
      for (int y = 0; y < net.arch.in_h; ++y)
        for (int x = 0; x < net.arch.in_w; ++x) patch(y, x) = rng.uniform();
      AngleClass attempted(static_cast<int>(rng.uniform_int(kNumAngleClasses)));
      bool success = rng.bernoulli(0.5);
      double worst = gradient_check(net, patch, attempted, success, seed,
                                    gc_checks);
      bool ok = worst < gc_threshold;
      all_ok = all_ok && ok;
      std::printf("seed %llu: worst relative error %.3e %s\n",
                  static_cast<unsigned long long>(seed), worst,
                  ok ? "ok" : "FAIL");
    }
    if (!all_ok) throw TrainError("gradient check exceeded the threshold");
  });

  // ---------------------------------------------------------------- demo
  auto* demo_cmd = app.add_subcommand(
      "demo", "small end-to-end loop: collect, retrain, show the improvement");
  std::uint64_t demo_seed = 7;
  int demo_attempts = 200, demo_epochs = 10, demo_eval = 150;
  std::string demo_dir = "demo_dataset";
  demo_cmd->add_option("--seed", demo_seed, "demo seed");
  demo_cmd->add_option("--attempts", demo_attempts, "collection attempts");
  demo_cmd->add_option("--epochs", demo_epochs, "training epochs");
  demo_cmd->add_option("--eval-attempts", demo_eval, "evaluation attempts");
  demo_cmd->add_option("--dir", demo_dir, "dataset directory");
  demo_cmd->callback([&] {
    CycleConfig cfg;
    cfg.session.seed = demo_seed;
    cfg.session.attempts = demo_attempts;
    cfg.session.epsilon = 0.5;
    cfg.session.world = WorldConfig::elongated();
    cfg.session.dataset_dir = demo_dir;
    cfg.train.epochs = demo_epochs;
    cfg.train.shuffle_seed = demo_seed;
    cfg.eval_attempts = demo_eval;
    std::cout << "collecting " << demo_attempts
              << " self-labeled grasps over the in-process link...\n";
    CycleOutcome out = run_training_cycle(cfg, init_network(demo_seed));
    std::cout << format_stats_table(out.dataset);
    std::printf("loss: %.4f -> %.4f over %d epochs\n",
                out.metrics.epoch_mean_loss.front(),
                out.metrics.epoch_mean_loss.back(), demo_epochs);
    std::printf("untrained policy: %d/%d (%.2f%%)\n", out.before.successes,
                out.before.attempts, out.before.percent());
    std::printf("trained policy:   %d/%d (%.2f%%)\n", out.after.successes,
                out.after.attempts, out.after.percent());
    std::printf("improvement:      %+.2f points\n", out.delta_points);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const grasp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const grasp::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const grasp::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const grasp::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
