#include "grasp/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "grasp/errors.hpp"
#include "grasp/rng.hpp"

namespace grasp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void NetworkArch::validate() const {
  if (in_h <= 0 || in_w <= 0) throw ConfigError("input size must be positive");
  if (in_h % 4 != 0 || in_w % 4 != 0)
    throw ConfigError("input size must be divisible by 4 for two pools");
  if (conv1_out <= 0 || conv2_out <= 0 || hidden <= 0)
    throw ConfigError("layer widths must be positive");
  if (classes != kNumAngleClasses)
    throw ConfigError("output layer must have one logit per angle class");
}

namespace {

// Patch for 3x3 kernels, zero padding 1: out(c*9 + dy*3 + dx, y*W + x) is
// input channel c at (y + dy - 1, x + dx - 1), zero outside the map.
void im2col(const MatrixXd& in, int channels, int h, int w, MatrixXd& out) {
  out.setZero(channels * 9, h * w);
  for (int c = 0; c < channels; ++c) {
    for (int dy = 0; dy < 3; ++dy) {
      for (int dx = 0; dx < 3; ++dx) {
        int row = c * 9 + dy * 3 + dx;
        for (int y = 0; y < h; ++y) {
          int sy = y + dy - 1;
          if (sy < 0 || sy >= h) continue;
          int x0 = std::max(0, 1 - dx);
          int x1 = std::min(w, w + 1 - dx);
          if (x0 >= x1) continue;
          out.block(row, y * w + x0, 1, x1 - x0) =
              in.block(c, sy * w + x0 + dx - 1, 1, x1 - x0);
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add patch gradients back onto the map.
void col2im_add(const MatrixXd& dcol, int channels, int h, int w,
                MatrixXd& din) {
  din.setZero(channels, h * w);
  for (int c = 0; c < channels; ++c) {
    for (int dy = 0; dy < 3; ++dy) {
      for (int dx = 0; dx < 3; ++dx) {
        int row = c * 9 + dy * 3 + dx;
        for (int y = 0; y < h; ++y) {
          int sy = y + dy - 1;
          if (sy < 0 || sy >= h) continue;
          int x0 = std::max(0, 1 - dx);
          int x1 = std::min(w, w + 1 - dx);
          if (x0 >= x1) continue;
          din.block(c, sy * w + x0 + dx - 1, 1, x1 - x0) +=
              dcol.block(row, y * w + x0, 1, x1 - x0);
        }
      }
    }
  }
}

// 2x2 stride-2 max; argmax keeps the winning input pixel index, scanning
// (0,0),(0,1),(1,0),(1,1) within the window and replacing only on strictly
// greater values, so ties go to the first cell scanned.
void maxpool2(const MatrixXd& in, int channels, int h, int w, MatrixXd& out,
              Eigen::ArrayXXi& argmax) {
  int oh = h / 2, ow = w / 2;
  out.resize(channels, oh * ow);
  argmax.resize(channels, oh * ow);
  for (int c = 0; c < channels; ++c) {
    for (int py = 0; py < oh; ++py) {
      for (int px = 0; px < ow; ++px) {
        int best = (2 * py) * w + 2 * px;
        double best_v = in(c, best);
        const int cand[3] = {(2 * py) * w + 2 * px + 1,
                             (2 * py + 1) * w + 2 * px,
                             (2 * py + 1) * w + 2 * px + 1};
        for (int k = 0; k < 3; ++k) {
          if (in(c, cand[k]) > best_v) {
            best = cand[k];
            best_v = in(c, best);
          }
        }
        out(c, py * ow + px) = best_v;
        argmax(c, py * ow + px) = best;
      }
    }
  }
}

struct Workspace {
  MatrixXd in;            // 1 x in_pixels
  MatrixXd col1;          // 9 x in_pixels
  MatrixXd a1, r1;        // conv1_out x in_pixels (pre/post relu)
  MatrixXd p1;            // conv1_out x pool1_pixels
  Eigen::ArrayXXi am1;
  MatrixXd col2;          // conv1_out*9 x pool1_pixels
  MatrixXd a2, r2;        // conv2_out x pool1_pixels
  MatrixXd p2;            // conv2_out x pool2_pixels
  Eigen::ArrayXXi am2;
  VectorXd flat;          // flat_dim, index c*pool2_pixels + p
  VectorXd h_pre, h;      // hidden
  VectorXd logits;        // classes
};

void forward_ws(const Network& net, const Image& patch, Workspace& ws) {
  const NetworkArch& a = net.arch;
  if (patch.rows() != a.in_h || patch.cols() != a.in_w)
    throw ShapeError("network input must be " + std::to_string(a.in_h) + "x" +
                     std::to_string(a.in_w) + ", got " +
                     std::to_string(patch.rows()) + "x" +
                     std::to_string(patch.cols()));

  int pix0 = a.in_h * a.in_w;
  int pix1 = a.pool1_h() * a.pool1_w();
  int pix2 = a.pool2_h() * a.pool2_w();

  ws.in = Eigen::Map<const Eigen::Matrix<double, 1, Eigen::Dynamic>>(
      patch.data(), pix0);  // patch is row-major, so index y*W + x

  im2col(ws.in, 1, a.in_h, a.in_w, ws.col1);
  ws.a1 = (net.p.conv1_w * ws.col1).colwise() + net.p.conv1_b;
  ws.r1 = ws.a1.cwiseMax(0.0);
  maxpool2(ws.r1, a.conv1_out, a.in_h, a.in_w, ws.p1, ws.am1);

  im2col(ws.p1, a.conv1_out, a.pool1_h(), a.pool1_w(), ws.col2);
  ws.a2 = (net.p.conv2_w * ws.col2).colwise() + net.p.conv2_b;
  ws.r2 = ws.a2.cwiseMax(0.0);
  maxpool2(ws.r2, a.conv2_out, a.pool1_h(), a.pool1_w(), ws.p2, ws.am2);

  ws.flat.resize(a.flat_dim());
  for (int c = 0; c < a.conv2_out; ++c)
    for (int p = 0; p < pix2; ++p) ws.flat(c * pix2 + p) = ws.p2(c, p);

  ws.h_pre = net.p.fc1_w * ws.flat + net.p.fc1_b;
  ws.h = ws.h_pre.cwiseMax(0.0);
  ws.logits = net.p.fc2_w * ws.h + net.p.fc2_b;
  (void)pix1;
}

double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double bce_from_logit(double z, bool success) {
  double s = success ? 1.0 : 0.0;
  return std::max(z, 0.0) - z * s + std::log1p(std::exp(-std::abs(z)));
}

ParamSet zeros_like(const NetworkArch& a) {
  ParamSet g;
  g.conv1_w = MatrixXd::Zero(a.conv1_out, 9);
  g.conv1_b = VectorXd::Zero(a.conv1_out);
  g.conv2_w = MatrixXd::Zero(a.conv2_out, a.conv1_out * 9);
  g.conv2_b = VectorXd::Zero(a.conv2_out);
  g.fc1_w = MatrixXd::Zero(a.hidden, a.flat_dim());
  g.fc1_b = VectorXd::Zero(a.hidden);
  g.fc2_w = MatrixXd::Zero(a.classes, a.hidden);
  g.fc2_b = VectorXd::Zero(a.classes);
  return g;
}

// Accumulates d(loss)/d(params) for one sample into g. Returns the loss.
double backward_accumulate(const Network& net, const Workspace& ws,
                           AngleClass attempted, bool success, ParamSet& g) {
  const NetworkArch& a = net.arch;
  int c_idx = attempted.index();
  double z = ws.logits(c_idx);
  double delta = sigmoid(z) - (success ? 1.0 : 0.0);

  g.fc2_w.row(c_idx) += delta * ws.h.transpose();
  g.fc2_b(c_idx) += delta;

  VectorXd dh = delta * net.p.fc2_w.row(c_idx).transpose();
  VectorXd dh_pre =
      (ws.h_pre.array() > 0.0).select(dh.array(), 0.0).matrix();

  g.fc1_w += dh_pre * ws.flat.transpose();
  g.fc1_b += dh_pre;

  VectorXd dflat = net.p.fc1_w.transpose() * dh_pre;

  int pix1 = a.pool1_h() * a.pool1_w();
  int pix2 = a.pool2_h() * a.pool2_w();

  MatrixXd dr2 = MatrixXd::Zero(a.conv2_out, pix1);
  for (int c = 0; c < a.conv2_out; ++c)
    for (int p = 0; p < pix2; ++p)
      dr2(c, ws.am2(c, p)) += dflat(c * pix2 + p);

  MatrixXd da2 = (ws.a2.array() > 0.0).select(dr2.array(), 0.0).matrix();
  g.conv2_w += da2 * ws.col2.transpose();
  g.conv2_b += da2.rowwise().sum();

  MatrixXd dcol2 = net.p.conv2_w.transpose() * da2;
  MatrixXd dp1;
  col2im_add(dcol2, a.conv1_out, a.pool1_h(), a.pool1_w(), dp1);

  MatrixXd dr1 = MatrixXd::Zero(a.conv1_out, a.in_h * a.in_w);
  for (int c = 0; c < a.conv1_out; ++c)
    for (int p = 0; p < pix1; ++p) dr1(c, ws.am1(c, p)) += dp1(c, p);

  MatrixXd da1 = (ws.a1.array() > 0.0).select(dr1.array(), 0.0).matrix();
  g.conv1_w += da1 * ws.col1.transpose();
  g.conv1_b += da1.rowwise().sum();
  // No gradient w.r.t. the input image is needed.

  return bce_from_logit(z, success);
}

struct Span {
  double* data;
  std::size_t size;
};

std::vector<Span> spans(ParamSet& p) {
  return {{p.conv1_w.data(), static_cast<std::size_t>(p.conv1_w.size())},
          {p.conv1_b.data(), static_cast<std::size_t>(p.conv1_b.size())},
          {p.conv2_w.data(), static_cast<std::size_t>(p.conv2_w.size())},
          {p.conv2_b.data(), static_cast<std::size_t>(p.conv2_b.size())},
          {p.fc1_w.data(), static_cast<std::size_t>(p.fc1_w.size())},
          {p.fc1_b.data(), static_cast<std::size_t>(p.fc1_b.size())},
          {p.fc2_w.data(), static_cast<std::size_t>(p.fc2_w.size())},
          {p.fc2_b.data(), static_cast<std::size_t>(p.fc2_b.size())}};
}

double* param_at(ParamSet& p, std::size_t flat) {
  for (const Span& s : spans(p)) {
    if (flat < s.size) return s.data + flat;
    flat -= s.size;
  }
  throw DomainError("parameter index out of range");
}

void fill_uniform(MatrixXd& m, double limit, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(r, c) = rng.uniform(-limit, limit);
}

}  // namespace

std::size_t param_count(const NetworkArch& a) {
  return static_cast<std::size_t>(a.conv1_out) * 9 + a.conv1_out +
         static_cast<std::size_t>(a.conv2_out) * a.conv1_out * 9 + a.conv2_out +
         static_cast<std::size_t>(a.hidden) * a.flat_dim() + a.hidden +
         static_cast<std::size_t>(a.classes) * a.hidden + a.classes;
}

Network init_network(std::uint64_t seed, const NetworkArch& arch) {
  arch.validate();
  Network net;
  net.arch = arch;
  net.p = zeros_like(arch);
  Rng rng(seed);
  fill_uniform(net.p.conv1_w, std::sqrt(6.0 / 9.0), rng);
  fill_uniform(net.p.conv2_w, std::sqrt(6.0 / (arch.conv1_out * 9.0)), rng);
  fill_uniform(net.p.fc1_w, std::sqrt(6.0 / arch.flat_dim()), rng);
  fill_uniform(net.p.fc2_w, std::sqrt(6.0 / arch.hidden), rng);
  return net;
}

Prediction forward(const Network& net, const Image& patch) {
  Workspace ws;
  forward_ws(net, patch, ws);
  Prediction out{ws.logits, AngleClass(0)};
  int best = 0;
  for (int i = 1; i < ws.logits.size(); ++i)
    if (ws.logits(i) > ws.logits(best)) best = i;
  out.chosen = AngleClass(best);
  return out;
}

double sample_loss(const Network& net, const Image& patch, AngleClass attempted,
                   bool success) {
  Workspace ws;
  forward_ws(net, patch, ws);
  return bce_from_logit(ws.logits(attempted.index()), success);
}

std::pair<Network, TrainMetrics> train(Network net,
                                       const std::vector<DataPoint>& data,
                                       const TrainConfig& cfg) {
  net.arch.validate();
  if (cfg.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (cfg.learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
  if (cfg.batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw ConfigError("momentum must lie in [0, 1)");

  TrainMetrics metrics;
  if (cfg.epochs == 0) return {std::move(net), metrics};
  if (data.empty()) throw TrainError("cannot train on an empty dataset");

  ParamSet vel = zeros_like(net.arch);
  ParamSet grad = zeros_like(net.arch);
  Workspace ws;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      Rng rng = derive_rng(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch),
                           kStreamShuffle);
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_int(i)]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      auto zero = [](ParamSet& p) {
        for (Span& s : spans(p)) std::fill(s.data, s.data + s.size, 0.0);
      };
      zero(grad);

      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const DataPoint& d = data[order[i]];
        forward_ws(net, d.patch, ws);
        batch_loss += backward_accumulate(net, ws, d.attempted, d.success, grad);
      }
      double inv_n = 1.0 / static_cast<double>(end - start);
      if (!std::isfinite(batch_loss))
        throw TrainError("non-finite loss at epoch " + std::to_string(epoch) +
                         ", batch starting at sample " + std::to_string(start));
      epoch_loss += batch_loss;

      auto gs = spans(grad);
      auto vs = spans(vel);
      auto ps = spans(net.p);
      for (std::size_t t = 0; t < gs.size(); ++t) {
        for (std::size_t k = 0; k < gs[t].size; ++k) {
          vs[t].data[k] = cfg.momentum * vs[t].data[k] -
                          cfg.learning_rate * gs[t].data[k] * inv_n;
          ps[t].data[k] += vs[t].data[k];
        }
      }
    }
    metrics.epoch_mean_loss.push_back(epoch_loss /
                                      static_cast<double>(order.size()));
  }
  return {std::move(net), metrics};
}

double gradient_check(const Network& net, const Image& patch,
                      AngleClass attempted, bool success,
                      std::uint64_t pick_seed, int n_checks, double h) {
  Network work = net;
  ParamSet grad = zeros_like(work.arch);
  Workspace ws;
  forward_ws(work, patch, ws);
  backward_accumulate(work, ws, attempted, success, grad);

  std::size_t total = param_count(work.arch);
  Rng rng = derive_rng(pick_seed, 0, kStreamGradCheck);
  double worst = 0.0;
  for (int i = 0; i < n_checks; ++i) {
    std::size_t idx = rng.uniform_int(total);
    double* slot = param_at(work.p, idx);
    double saved = *slot;
    *slot = saved + h;
    double up = sample_loss(work, patch, attempted, success);
    *slot = saved - h;
    double down = sample_loss(work, patch, attempted, success);
    *slot = saved;
    double numeric = (up - down) / (2.0 * h);
    double analytic = *param_at(grad, idx);
    double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic) / denom);
  }
  return worst;
}

namespace {

constexpr char kMagic[4] = {'G', 'F', 'N', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindConv = 1;
constexpr std::uint32_t kKindDense = 2;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in, const char* field) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw LoadError(field, "file truncated");
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

double get_f64(std::istream& in, const char* field) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw LoadError(field, "file truncated");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(u);
}

void put_matrix(std::ostream& out, const MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
}

void put_vector(std::ostream& out, const VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}

void get_matrix(std::istream& in, MatrixXd& m, const char* field) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = get_f64(in, field);
}

void get_vector(std::istream& in, VectorXd& v, const char* field) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get_f64(in, field);
}

}  // namespace

void save_model(const Network& net, const std::filesystem::path& path) {
  net.arch.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open model file for write: " + path.string());
  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(net.arch.in_h));
  put_u32(out, static_cast<std::uint32_t>(net.arch.in_w));
  put_u32(out, 4);  // layer records
  put_u32(out, kKindConv);
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(net.arch.conv1_out));
  put_u32(out, NetworkArch::kKernel);
  put_u32(out, kKindConv);
  put_u32(out, static_cast<std::uint32_t>(net.arch.conv1_out));
  put_u32(out, static_cast<std::uint32_t>(net.arch.conv2_out));
  put_u32(out, NetworkArch::kKernel);
  put_u32(out, kKindDense);
  put_u32(out, static_cast<std::uint32_t>(net.arch.flat_dim()));
  put_u32(out, static_cast<std::uint32_t>(net.arch.hidden));
  put_u32(out, kKindDense);
  put_u32(out, static_cast<std::uint32_t>(net.arch.hidden));
  put_u32(out, static_cast<std::uint32_t>(net.arch.classes));
  put_matrix(out, net.p.conv1_w);
  put_vector(out, net.p.conv1_b);
  put_matrix(out, net.p.conv2_w);
  put_vector(out, net.p.conv2_b);
  put_matrix(out, net.p.fc1_w);
  put_vector(out, net.p.fc1_b);
  put_matrix(out, net.p.fc2_w);
  put_vector(out, net.p.fc2_b);
  if (!out) throw DataError("short write to model file: " + path.string());
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file: " + path.string());

  char magic[4];
  if (!in.read(magic, 4)) throw LoadError("magic", "file truncated");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw LoadError("magic", "not a model file");
  if (std::uint32_t v = get_u32(in, "version"); v != kVersion)
    throw LoadError("version", "unsupported version " + std::to_string(v));

  NetworkArch arch;
  std::uint32_t in_h = get_u32(in, "in_h");
  std::uint32_t in_w = get_u32(in, "in_w");
  if (in_h == 0 || in_h > 4096 || in_h % 4 != 0)
    throw LoadError("in_h", "invalid input height " + std::to_string(in_h));
  if (in_w == 0 || in_w > 4096 || in_w % 4 != 0)
    throw LoadError("in_w", "invalid input width " + std::to_string(in_w));
  arch.in_h = static_cast<int>(in_h);
  arch.in_w = static_cast<int>(in_w);

  if (std::uint32_t n = get_u32(in, "layer_count"); n != 4)
    throw LoadError("layer_count", "expected 4 layers, got " +
                                       std::to_string(n));

  auto expect = [&](const char* field, std::uint32_t got, std::uint32_t want) {
    if (got != want)
      throw LoadError(field, "expected " + std::to_string(want) + ", got " +
                                 std::to_string(got));
  };

  expect("layer0.kind", get_u32(in, "layer0.kind"), kKindConv);
  expect("layer0.in_ch", get_u32(in, "layer0.in_ch"), 1);
  std::uint32_t c1 = get_u32(in, "layer0.out_ch");
  if (c1 == 0 || c1 > 1024)
    throw LoadError("layer0.out_ch", "invalid channel count");
  expect("layer0.ksize", get_u32(in, "layer0.ksize"), NetworkArch::kKernel);
  arch.conv1_out = static_cast<int>(c1);

  expect("layer1.kind", get_u32(in, "layer1.kind"), kKindConv);
  expect("layer1.in_ch", get_u32(in, "layer1.in_ch"), c1);
  std::uint32_t c2 = get_u32(in, "layer1.out_ch");
  if (c2 == 0 || c2 > 1024)
    throw LoadError("layer1.out_ch", "invalid channel count");
  expect("layer1.ksize", get_u32(in, "layer1.ksize"), NetworkArch::kKernel);
  arch.conv2_out = static_cast<int>(c2);

  expect("layer2.kind", get_u32(in, "layer2.kind"), kKindDense);
  expect("layer2.in_dim", get_u32(in, "layer2.in_dim"),
         static_cast<std::uint32_t>(arch.flat_dim()));
  std::uint32_t hid = get_u32(in, "layer2.out_dim");
  if (hid == 0 || hid > 65536)
    throw LoadError("layer2.out_dim", "invalid hidden width");
  arch.hidden = static_cast<int>(hid);

  expect("layer3.kind", get_u32(in, "layer3.kind"), kKindDense);
  expect("layer3.in_dim", get_u32(in, "layer3.in_dim"), hid);
  expect("layer3.out_dim", get_u32(in, "layer3.out_dim"),
         static_cast<std::uint32_t>(kNumAngleClasses));

  try {
    arch.validate();
  } catch (const ConfigError& e) {
    throw LoadError("arch", e.what());
  }

  Network net;
  net.arch = arch;
  net.p = ParamSet{MatrixXd(arch.conv1_out, 9), VectorXd(arch.conv1_out),
                   MatrixXd(arch.conv2_out, arch.conv1_out * 9),
                   VectorXd(arch.conv2_out),
                   MatrixXd(arch.hidden, arch.flat_dim()),
                   VectorXd(arch.hidden),
                   MatrixXd(arch.classes, arch.hidden),
                   VectorXd(arch.classes)};
  get_matrix(in, net.p.conv1_w, "params.conv1_w");
  get_vector(in, net.p.conv1_b, "params.conv1_b");
  get_matrix(in, net.p.conv2_w, "params.conv2_w");
  get_vector(in, net.p.conv2_b, "params.conv2_b");
  get_matrix(in, net.p.fc1_w, "params.fc1_w");
  get_vector(in, net.p.fc1_b, "params.fc1_b");
  get_matrix(in, net.p.fc2_w, "params.fc2_w");
  get_vector(in, net.p.fc2_b, "params.fc2_b");

  if (in.peek() != std::char_traits<char>::eof())
    throw LoadError("params", "trailing bytes after parameter block");
  return net;
}

}  // namespace grasp
