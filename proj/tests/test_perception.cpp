#include <cmath>

#include "doctest.h"
#include "grasp/errors.hpp"
#include "grasp/perception.hpp"
#include "grasp/sim_world.hpp"

using namespace grasp;

namespace {

Image blank(int w = 64, int h = 64) { return Image::Zero(h, w); }

void paint_disc(Image& im, double cx, double cy, double r, double v) {
  for (int y = 0; y < image_height(im); ++y)
    for (int x = 0; x < image_width(im); ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) im(y, x) = v;
}

}  // namespace

TEST_CASE("empty scene yields no detections") {
  CHECK(detect(blank(), 0.1).empty());
}

TEST_CASE("uniform scene below threshold yields no detections") {
  Image im = blank();
  im.setConstant(0.1);  // exactly at threshold is background
  CHECK(detect(im, 0.1).empty());
  im.setConstant(0.100001);
  CHECK(detect(im, 0.1).size() == 1);
}

TEST_CASE("detector validates its threshold") {
  CHECK_THROWS_AS(detect(blank(), 0.0), ConfigError);
  CHECK_THROWS_AS(detect(blank(), 1.0), ConfigError);
  CHECK_THROWS_AS(detect(blank(), -0.5), ConfigError);
}

TEST_CASE("single object is found near its true centroid") {
  SimObject obj;
  obj.shape = Shape::kEllipse;
  obj.orientation = 70.0;
  obj.aspect = 3.0;
  obj.scale = 4.0;
  obj.cx = 25.0;
  obj.cy = 38.0;
  obj.intensity = 0.8;
  Image im = render(obj, 64, 64);

  auto dets = detect(im, 0.1);
  REQUIRE(dets.size() == 1);
  const Detection& d = dets[0];
  CHECK(d.label == "object");
  CHECK(std::fabs(d.cx - 25.0) < 2.0);
  CHECK(std::fabs(d.cy - 38.0) < 2.0);
  CHECK(d.confidence == doctest::Approx(0.8));  // flat intensity component
  CHECK(d.x_min <= 25);
  CHECK(d.x_max >= 25);
  CHECK(d.y_min <= 38);
  CHECK(d.y_max >= 38);
  CHECK(d.area > 0);
}

TEST_CASE("two separated discs become two detections, largest first") {
  Image im = blank();
  paint_disc(im, 15.0, 15.0, 4.0, 0.5);
  paint_disc(im, 45.0, 45.0, 8.0, 0.9);

  auto dets = detect(im, 0.1);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].area > dets[1].area);
  CHECK(std::fabs(dets[0].cx - 45.0) < 1.0);
  CHECK(std::fabs(dets[0].cy - 45.0) < 1.0);
  CHECK(std::fabs(dets[1].cx - 15.0) < 1.0);
  CHECK(std::fabs(dets[1].cy - 15.0) < 1.0);
  CHECK(dets[0].confidence == doctest::Approx(0.9));
  CHECK(dets[1].confidence == doctest::Approx(0.5));
}

TEST_CASE("equal areas break ties by top-left position") {
  Image im = blank();
  // two 3x3 squares, same area; the (y_min, x_min) smaller one comes first
  for (int y = 40; y < 43; ++y)
    for (int x = 8; x < 11; ++x) im(y, x) = 0.6;
  for (int y = 10; y < 13; ++y)
    for (int x = 50; x < 53; ++x) im(y, x) = 0.6;

  auto dets = detect(im, 0.1);
  REQUIRE(dets.size() == 2);
  CHECK(dets[0].y_min == 10);
  CHECK(dets[0].x_min == 50);
  CHECK(dets[1].y_min == 40);
  CHECK(dets[1].x_min == 8);

  // same y_min: x_min decides
  Image im2 = blank();
  for (int y = 10; y < 13; ++y)
    for (int x = 30; x < 33; ++x) im2(y, x) = 0.6;
  for (int y = 10; y < 13; ++y)
    for (int x = 5; x < 8; ++x) im2(y, x) = 0.6;
  auto dets2 = detect(im2, 0.1);
  REQUIRE(dets2.size() == 2);
  CHECK(dets2[0].x_min == 5);
  CHECK(dets2[1].x_min == 30);
}

TEST_CASE("min_area drops specks at the boundary") {
  Image im = blank();
  im(5, 5) = 0.9;
  im(5, 6) = 0.9;
  im(6, 5) = 0.9;  // 3 pixels

  DetectorConfig cfg;
  cfg.min_area = 4;
  CHECK(detect(im, cfg).empty());

  im(6, 6) = 0.9;  // now 4
  auto dets = detect(im, cfg);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].area == 4);

  cfg.min_area = 1;
  im(6, 6) = 0.0;
  CHECK(detect(im, cfg).size() == 1);
}

TEST_CASE("connectivity is 4-way, not diagonal") {
  Image im = blank();
  // two 2x2 blocks touching only at a corner
  im(10, 10) = im(10, 11) = im(11, 10) = im(11, 11) = 0.9;
  im(12, 12) = im(12, 13) = im(13, 12) = im(13, 13) = 0.9;

  DetectorConfig cfg;
  cfg.min_area = 1;
  auto dets = detect(im, cfg);
  CHECK(dets.size() == 2);

  im(11, 12) = 0.9;  // bridge them
  dets = detect(im, cfg);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].area == 9);
}

TEST_CASE("bbox is tight and area never exceeds it") {
  SimObject obj;
  obj.shape = Shape::kRectangle;
  obj.orientation = 0.0;
  obj.aspect = 2.0;
  obj.scale = 3.0;
  obj.cx = 32.0;
  obj.cy = 32.0;
  Image im = render(obj, 64, 64);

  auto dets = detect(im, 0.1);
  REQUIRE(dets.size() == 1);
  const Detection& d = dets[0];
  // an axis-aligned 12x6 half-extent rectangle covers [26,38] x [29,35]
  CHECK(d.x_min == 26);
  CHECK(d.x_max == 38);
  CHECK(d.y_min == 29);
  CHECK(d.y_max == 35);
  CHECK(d.area == 13 * 7);
  CHECK(d.area <= (d.x_max - d.x_min + 1) * (d.y_max - d.y_min + 1));
}

TEST_CASE("detection count and areas match the thresholded pixel count") {
  SimObject obj;
  obj.shape = Shape::kEllipse;
  obj.orientation = 33.0;
  obj.aspect = 2.5;
  obj.scale = 5.0;
  Image im = render(obj, 64, 64);

  int above = 0;
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x) above += im(y, x) > 0.1 ? 1 : 0;

  DetectorConfig cfg;
  cfg.min_area = 1;
  auto dets = detect(im, cfg);
  int total = 0;
  for (const auto& d : dets) total += d.area;
  CHECK(total == above);
}

TEST_CASE("confidence is the component mean intensity") {
  Image im = blank();
  im(20, 20) = 0.4;
  im(20, 21) = 0.6;
  im(21, 20) = 0.8;
  im(21, 21) = 1.0;
  auto dets = detect(im, 0.1);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].confidence == doctest::Approx(0.7));
  // centroid leans toward the brighter pixels
  CHECK(dets[0].cx == doctest::Approx((0.4 * 20 + 0.6 * 21 + 0.8 * 20 + 1.0 * 21) / 2.8));
  CHECK(dets[0].cy == doctest::Approx((0.4 * 20 + 0.6 * 20 + 0.8 * 21 + 1.0 * 21) / 2.8));
}

TEST_CASE("crop centers the detection in the patch") {
  Image im = blank();
  paint_disc(im, 30.0, 26.0, 5.0, 0.9);
  auto dets = detect(im, 0.1);
  REQUIRE(dets.size() == 1);

  Image patch = crop_patch(im, dets[0], 32);
  CHECK(image_width(patch) == 32);
  CHECK(image_height(patch) == 32);
  // patch(y, x) = scene(y0 + y, x0 + x) with x0 = round(cx) - 16
  int x0 = static_cast<int>(std::lround(dets[0].cx)) - 16;
  int y0 = static_cast<int>(std::lround(dets[0].cy)) - 16;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) CHECK(patch(y, x) == im(y0 + y, x0 + x));
  CHECK(patch.sum() == doctest::Approx(im.sum()));
}

TEST_CASE("crop pads with zeros at the scene edge") {
  Image im = blank();
  paint_disc(im, 4.0, 4.0, 3.5, 0.8);
  DetectorConfig cfg;
  auto dets = detect(im, cfg);
  REQUIRE(dets.size() == 1);

  Image patch = crop_patch(im, dets[0], 32);
  CHECK(image_width(patch) == 32);
  CHECK(image_height(patch) == 32);
  int x0 = static_cast<int>(std::lround(dets[0].cx)) - 16;
  int y0 = static_cast<int>(std::lround(dets[0].cy)) - 16;
  CHECK(x0 < 0);
  CHECK(y0 < 0);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) {
      int sx = x0 + x, sy = y0 + y;
      double want = (sx >= 0 && sx < 64 && sy >= 0 && sy < 64) ? im(sy, sx)
                                                               : 0.0;
      CHECK(patch(y, x) == want);
    }
  CHECK(patch.sum() == doctest::Approx(im.sum()));
}

TEST_CASE("crop can exceed the scene and still be well formed") {
  Image im = blank(16, 16);
  im(8, 8) = 0.9;
  im(8, 9) = 0.9;
  im(9, 8) = 0.9;
  im(9, 9) = 0.9;
  auto dets = detect(im, 0.1);
  REQUIRE(dets.size() == 1);
  Image patch = crop_patch(im, dets[0], 32);
  CHECK(image_width(patch) == 32);
  CHECK(image_height(patch) == 32);
  CHECK(patch.sum() == doctest::Approx(im.sum()));
}

TEST_CASE("crop rejects a non-positive side") {
  Image im = blank();
  Detection d;
  CHECK_THROWS_AS(crop_patch(im, d, 0), ConfigError);
  CHECK_THROWS_AS(crop_patch(im, d, -4), ConfigError);
}
