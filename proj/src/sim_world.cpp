#include "grasp/sim_world.hpp"

#include <cmath>

#include "grasp/errors.hpp"

namespace grasp {

WorldConfig WorldConfig::elongated() {
  WorldConfig cfg;
  cfg.shapes = {Shape::kEllipse, Shape::kRectangle};
  cfg.aspect_min = 2.0;
  cfg.aspect_max = 4.0;
  cfg.scale_min = 3.0;
  cfg.scale_max = 6.0;
  return cfg;
}

WorldConfig WorldConfig::discs() {
  WorldConfig cfg;
  cfg.shapes = {Shape::kDisc};
  cfg.aspect_min = 1.0;
  cfg.aspect_max = 1.0;
  return cfg;
}

double bounding_radius(const SimObject& obj) {
  switch (obj.shape) {
    case Shape::kDisc:
      return obj.scale;
    case Shape::kEllipse:
      return obj.scale * obj.aspect;
    case Shape::kRectangle:
      return std::hypot(obj.scale * obj.aspect, obj.scale);
  }
  return obj.scale;
}

SimObject spawn_object(Rng& rng, const WorldConfig& cfg) {
  if (cfg.shapes.empty()) throw ConfigError("world: no shapes to sample");
  if (cfg.aspect_min < 1.0 || cfg.aspect_max < cfg.aspect_min)
    throw ConfigError("world: bad aspect range");
  if (cfg.scale_min <= 0.0 || cfg.scale_max < cfg.scale_min)
    throw ConfigError("world: bad scale range");
  if (cfg.intensity_min <= 0.0 || cfg.intensity_max > 1.0 ||
      cfg.intensity_max < cfg.intensity_min)
    throw ConfigError("world: bad intensity range");

  // Feasibility is a property of the config, not of the draw: the largest
  // shape the bounds allow must leave a non-empty centroid range, so a
  // session never dies on an unlucky sample thousands of spawns in.
  SimObject biggest;
  biggest.aspect = cfg.aspect_max;
  biggest.scale = cfg.scale_max;
  double worst = 0.0;
  for (Shape s : cfg.shapes) {
    biggest.shape = s;
    worst = std::max(worst, bounding_radius(biggest));
  }
  double lim = worst + cfg.margin;
  if (lim > cfg.width - 1.0 - lim || lim > cfg.height - 1.0 - lim)
    throw ConfigError("world: configured shapes cannot fit inside the scene");

  SimObject obj;
  obj.shape = cfg.shapes[rng.uniform_int(cfg.shapes.size())];
  obj.orientation = rng.uniform(0.0, 180.0);
  obj.aspect = obj.shape == Shape::kDisc
                   ? 1.0
                   : rng.uniform(cfg.aspect_min, cfg.aspect_max);
  obj.scale = rng.uniform(cfg.scale_min, cfg.scale_max);
  obj.intensity = rng.uniform(cfg.intensity_min, cfg.intensity_max);

  double r = bounding_radius(obj) + cfg.margin;
  obj.cx = rng.uniform(r, cfg.width - 1.0 - r);
  obj.cy = rng.uniform(r, cfg.height - 1.0 - r);
  return obj;
}

namespace {

inline bool inside(const SimObject& obj, double x, double y, double cos_t,
                   double sin_t) {
  double dx = x - obj.cx;
  double dy = y - obj.cy;
  double u = dx * cos_t + dy * sin_t;   // along major axis
  double v = -dx * sin_t + dy * cos_t;  // along minor axis
  double a = obj.scale * obj.aspect;
  double b = obj.scale;
  switch (obj.shape) {
    case Shape::kEllipse: {
      double eu = u / a, ev = v / b;
      return eu * eu + ev * ev <= 1.0;
    }
    case Shape::kRectangle:
      return std::fabs(u) <= a && std::fabs(v) <= b;
    case Shape::kDisc:
      return dx * dx + dy * dy <= b * b;
  }
  return false;
}

}  // namespace

Image render(const SimObject& obj, int width, int height, Rng* noise_rng,
             double noise_sigma) {
  if (width <= 0 || height <= 0) throw RenderError("non-positive scene size");
  double r = bounding_radius(obj);
  if (obj.cx - r < 0.0 || obj.cx + r > width - 1.0 || obj.cy - r < 0.0 ||
      obj.cy + r > height - 1.0)
    throw RenderError("object extends outside the scene bounds");

  double theta = obj.orientation * (3.14159265358979323846 / 180.0);
  double cos_t = std::cos(theta), sin_t = std::sin(theta);
  Image im = Image::Zero(height, width);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (inside(obj, x, y, cos_t, sin_t)) im(y, x) = obj.intensity;

  if (noise_rng != nullptr && noise_sigma > 0.0) {
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        double v = im(y, x) + noise_sigma * noise_rng->normal();
        im(y, x) = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      }
  }
  return im;
}

double optimal_grasp_angle(const SimObject& obj) {
  return std::fmod(obj.orientation + 90.0, 180.0);
}

bool grasp_oracle(const SimObject& obj, double gripper_deg,
                  const OracleConfig& cfg, Rng& rng) {
  if (!(gripper_deg >= 0.0 && gripper_deg <= 180.0))
    throw DomainError("gripper angle out of [0,180]: " +
                      std::to_string(gripper_deg));
  if (!(cfg.tolerance_deg > 0.0 && cfg.tolerance_deg <= 90.0))
    throw ConfigError("oracle: tolerance out of (0,90]");
  if (!(cfg.flip_prob >= 0.0 && cfg.flip_prob < 0.5))
    throw ConfigError("oracle: flip_prob out of [0,0.5)");

  bool base =
      obj.aspect <= cfg.round_aspect ||
      angular_distance_180(gripper_deg, optimal_grasp_angle(obj)) <=
          cfg.tolerance_deg;
  if (cfg.flip_prob > 0.0 && rng.bernoulli(cfg.flip_prob)) return !base;
  return base;
}

}  // namespace grasp
