#include "grasp/perception.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "grasp/errors.hpp"

namespace grasp {

std::vector<Detection> detect(const Image& scene, const DetectorConfig& cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
    throw ConfigError("detector: threshold out of (0,1)");
  const int h = image_height(scene), w = image_width(scene);

  std::vector<int> label(static_cast<std::size_t>(h) * w, -1);
  auto idx = [w](int y, int x) { return static_cast<std::size_t>(y) * w + x; };

  std::vector<Detection> out;
  std::vector<std::pair<int, int>> stack;
  for (int sy = 0; sy < h; ++sy) {
    for (int sx = 0; sx < w; ++sx) {
      if (scene(sy, sx) <= cfg.threshold || label[idx(sy, sx)] >= 0) continue;
      int comp = static_cast<int>(out.size());
      Detection det;
      det.x_min = det.x_max = sx;
      det.y_min = det.y_max = sy;
      double mass = 0.0, mx = 0.0, my = 0.0, sum = 0.0;
      stack.clear();
      stack.emplace_back(sy, sx);
      label[idx(sy, sx)] = comp;
      while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        double v = scene(y, x);
        ++det.area;
        sum += v;
        mass += v;
        mx += v * x;
        my += v * y;
        det.x_min = std::min(det.x_min, x);
        det.x_max = std::max(det.x_max, x);
        det.y_min = std::min(det.y_min, y);
        det.y_max = std::max(det.y_max, y);
        constexpr int dy[4] = {-1, 1, 0, 0};
        constexpr int dx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          int ny = y + dy[k], nx = x + dx[k];
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          if (scene(ny, nx) <= cfg.threshold || label[idx(ny, nx)] >= 0)
            continue;
          label[idx(ny, nx)] = comp;
          stack.emplace_back(ny, nx);
        }
      }
      det.cx = mx / mass;
      det.cy = my / mass;
      det.confidence = sum / det.area;
      if (det.area >= cfg.min_area) out.push_back(det);
    }
  }

  std::sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
    if (a.area != b.area) return a.area > b.area;
    if (a.y_min != b.y_min) return a.y_min < b.y_min;
    return a.x_min < b.x_min;
  });
  return out;
}

Image crop_patch(const Image& scene, const Detection& det, int side) {
  if (side <= 0) throw ConfigError("crop: non-positive side");
  const int h = image_height(scene), w = image_width(scene);
  const int x0 = static_cast<int>(std::lround(det.cx)) - side / 2;
  const int y0 = static_cast<int>(std::lround(det.cy)) - side / 2;
  Image patch = Image::Zero(side, side);
  for (int i = 0; i < side; ++i) {
    int y = y0 + i;
    if (y < 0 || y >= h) continue;
    for (int j = 0; j < side; ++j) {
      int x = x0 + j;
      if (x < 0 || x >= w) continue;
      patch(i, j) = scene(y, x);
    }
  }
  return patch;
}

}  // namespace grasp
