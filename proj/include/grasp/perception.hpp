#pragma once

#include <string>
#include <vector>

#include "grasp/image.hpp"

namespace grasp {

// One detected object: label, confidence, position, extent.
struct Detection {
  std::string label = "object";
  double confidence = 0.0;  // mean intensity of the component, in [0,1]
  double cx = 0.0, cy = 0.0;  // intensity-weighted centroid
  int x_min = 0, y_min = 0, x_max = 0, y_max = 0;  // tight bbox, inclusive
  int area = 0;  // pixels in the component
};

struct DetectorConfig {
  double threshold = 0.1;  // pixels strictly above this are foreground
  int min_area = 4;        // components below this are dropped
};

// 4-connected components of pixels above threshold, sorted by area
// descending; equal areas order by (y_min, x_min) ascending.
std::vector<Detection> detect(const Image& scene, const DetectorConfig& cfg);
inline std::vector<Detection> detect(const Image& scene,
                                     double threshold = 0.1) {
  DetectorConfig cfg;
  cfg.threshold = threshold;
  return detect(scene, cfg);
}

// Square side x side window centered on the detection centroid (rounded to
// the nearest pixel), zero-padded where it overhangs the scene.
Image crop_patch(const Image& scene, const Detection& det, int side = 32);

}  // namespace grasp
