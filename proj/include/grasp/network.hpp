#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "grasp/dataset.hpp"
#include "grasp/geometry.hpp"
#include "grasp/image.hpp"

namespace grasp {

// Fixed topology: conv3x3(1->8) relu pool2, conv3x3(8->16) relu pool2,
// dense(16*(h/4)*(w/4)->64) relu, dense(64->18). Convolutions are stride 1
// with zero padding 1, so spatial size only changes at the pools.
struct NetworkArch {
  int in_h = 32;
  int in_w = 32;
  int conv1_out = 8;
  int conv2_out = 16;
  int hidden = 64;
  int classes = kNumAngleClasses;
  static constexpr int kKernel = 3;

  int pool1_h() const { return in_h / 2; }
  int pool1_w() const { return in_w / 2; }
  int pool2_h() const { return in_h / 4; }
  int pool2_w() const { return in_w / 4; }
  int flat_dim() const { return conv2_out * pool2_h() * pool2_w(); }

  void validate() const;  // throws ConfigError
  bool operator==(const NetworkArch&) const = default;
};

// Weight layout: conv filters are (out_ch x in_ch*9) with column index
// c*9 + dy*3 + dx; dense weights are (out x in). Feature maps travel as
// (channels x pixels) with pixel index y*W + x.
struct ParamSet {
  Eigen::MatrixXd conv1_w;
  Eigen::VectorXd conv1_b;
  Eigen::MatrixXd conv2_w;
  Eigen::VectorXd conv2_b;
  Eigen::MatrixXd fc1_w;
  Eigen::VectorXd fc1_b;
  Eigen::MatrixXd fc2_w;
  Eigen::VectorXd fc2_b;
};

struct Network {
  NetworkArch arch;
  ParamSet p;
};

// Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights, zero biases,
// deterministic per seed.
Network init_network(std::uint64_t seed, const NetworkArch& arch = {});

std::size_t param_count(const NetworkArch& arch);

struct Prediction {
  Eigen::VectorXd logits;  // one per angle class
  AngleClass chosen;       // argmax, ties to the lowest index
};

Prediction forward(const Network& net, const Image& patch);

// Binary cross-entropy on the attempted class's logit only; the other logits
// receive no gradient from this sample.
double sample_loss(const Network& net, const Image& patch,
                   AngleClass attempted, bool success);

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 32;
  std::uint64_t shuffle_seed = 0;
  bool shuffle = true;  // off keeps dataset order, for reproducing runs
};

struct TrainMetrics {
  std::vector<double> epoch_mean_loss;
};

// SGD with momentum over batch-mean gradients. epochs == 0 returns the input
// untouched. Throws TrainError on an empty dataset or non-finite loss.
std::pair<Network, TrainMetrics> train(Network net,
                                       const std::vector<DataPoint>& data,
                                       const TrainConfig& cfg);

// Max relative error between analytic and central-difference gradients over
// n_checks randomly chosen parameters of a fresh seeded network.
double gradient_check(const Network& net, const Image& patch,
                      AngleClass attempted, bool success,
                      std::uint64_t pick_seed, int n_checks = 200,
                      double h = 1e-5);

// Binary container with explicit shape metadata; load rejects any mismatch
// naming the offending field.
void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

}  // namespace grasp
