#pragma once

#include <cstdint>
#include <vector>

#include "grasp/geometry.hpp"
#include "grasp/image.hpp"
#include "grasp/rng.hpp"

namespace grasp {

enum class Shape { kEllipse, kRectangle, kDisc };

// Parametric 2D object standing in for the things placed in front of the
// robot. `orientation` is the major-axis direction in degrees, measured in
// image coordinates (x right, y down), periodic with 180. `scale` is the
// minor semi-axis in pixels; the major semi-axis is scale * aspect.
struct SimObject {
  Shape shape = Shape::kEllipse;
  double orientation = 0.0;  // [0, 180)
  double aspect = 1.0;       // >= 1; disc implies 1
  double scale = 5.0;        // pixels
  double cx = 32.0, cy = 32.0;
  double intensity = 1.0;    // (0, 1]
};

// Sampling bounds for spawn_object and the scene size used by render.
struct WorldConfig {
  int width = 64, height = 64;
  std::vector<Shape> shapes = {Shape::kEllipse, Shape::kRectangle,
                               Shape::kDisc};
  double aspect_min = 1.0, aspect_max = 5.0;
  double scale_min = 3.5, scale_max = 5.5;
  double intensity_min = 0.4, intensity_max = 1.0;
  double margin = 1.0;       // extra clearance between object and border
  double noise_sigma = 0.0;  // additive Gaussian, clamped to [0,1]

  // Elongated-only preset: every spawn is clearly graspable at one
  // orientation band and never "round" under the default oracle.
  static WorldConfig elongated();
  // Disc-only preset: graspable at any angle.
  static WorldConfig discs();
};

// Success adjudication rule replacing physical grasp feedback.
struct OracleConfig {
  double tolerance_deg = 15.0;  // (0, 90]
  double round_aspect = 1.2;    // aspect at or below this succeeds anywhere
  double flip_prob = 0.0;       // [0, 0.5): label noise
};

// Radius of the circle that bounds the object after rotation.
double bounding_radius(const SimObject& obj);

// Draws object parameters uniformly inside the configured bounds; the
// centroid range shrinks by the bounding radius so the render always fits.
SimObject spawn_object(Rng& rng, const WorldConfig& cfg);

// Analytic point-in-shape rasterization at pixel centers (integer
// coordinates). Optional additive noise; all pixels clamped to [0, 1].
Image render(const SimObject& obj, int width, int height, Rng* noise_rng,
             double noise_sigma);
inline Image render(const SimObject& obj, int width, int height) {
  return render(obj, width, height, nullptr, 0.0);
}
inline Image render(const SimObject& obj, const WorldConfig& cfg,
                    Rng* noise_rng = nullptr) {
  return render(obj, cfg.width, cfg.height, noise_rng, cfg.noise_sigma);
}

// Jaws close across the minor axis: (orientation + 90) mod 180. For discs
// the value is a convention; callers treat discs as graspable anywhere.
double optimal_grasp_angle(const SimObject& obj);

// Success bit for a gripper at `gripper_deg` in [0, 180]. Deterministic when
// flip_prob is 0 (the rng is not consumed in that case).
bool grasp_oracle(const SimObject& obj, double gripper_deg,
                  const OracleConfig& cfg, Rng& rng);

}  // namespace grasp
