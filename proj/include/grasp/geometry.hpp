#pragma once

#include <cmath>
#include <string>

#include "grasp/errors.hpp"

namespace grasp {

inline constexpr int kNumAngleClasses = 18;
inline constexpr double kClassSpacingDeg = 10.0;
inline constexpr double kMotorLimit = 0.25;
inline constexpr double kGripConstant = 0.5;

// One of the 18 discrete grasp angles: class c means 10*c degrees.
class AngleClass {
 public:
  explicit AngleClass(int index) : index_(index) {
    if (index < 0 || index >= kNumAngleClasses)
      throw DomainError("angle class index out of [0,17]: " +
                        std::to_string(index));
  }
  int index() const { return index_; }

  friend bool operator==(AngleClass a, AngleClass b) {
    return a.index_ == b.index_;
  }
  friend bool operator!=(AngleClass a, AngleClass b) { return !(a == b); }

 private:
  int index_;
};

// Normalized motor command, dimensionless, within [-0.25, +0.25].
class MotorRotation {
 public:
  explicit MotorRotation(double value) : value_(value) {
    if (!(std::fabs(value) <= kMotorLimit))
      throw DomainError("motor rotation out of [-0.25,0.25]: " +
                        std::to_string(value));
  }
  double value() const { return value_; }

 private:
  double value_;
};

// The two-line command the robot consumes: a constant grip value of 0.5
// followed by the rotation.
struct GripperCommand {
  double grip = kGripConstant;
  MotorRotation rotation;

  explicit GripperCommand(MotorRotation r) : rotation(r) {}
};

inline double class_to_degrees(AngleClass c) {
  return kClassSpacingDeg * c.index();
}

// Degrees to motor units: ((deg - 90) / 90) * 0.25.
inline MotorRotation degrees_to_motor(double deg) {
  if (!(deg >= 0.0 && deg <= 180.0))
    throw DomainError("degrees out of [0,180]: " + std::to_string(deg));
  return MotorRotation(((deg - 90.0) / 90.0) * 0.25);
}

// Inverse of degrees_to_motor; exact for the 18 class angles.
inline double motor_to_degrees(MotorRotation m) {
  return (m.value() / 0.25) * 90.0 + 90.0;
}

// Distance on the 180-degree-periodic grasp circle, in [0, 90]. A two-jaw
// gripper at theta and theta+180 is the same grasp.
inline double angular_distance_180(double a, double b) {
  double d = std::fmod(std::fabs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

// Nearest class on the periodic circle; midpoints round to the higher class
// and 175..180 wraps to class 0.
inline AngleClass nearest_class(double deg) {
  double wrapped = std::fmod(deg, 180.0);
  if (wrapped < 0.0) wrapped += 180.0;
  int idx = static_cast<int>(std::lround(wrapped / kClassSpacingDeg)) %
            kNumAngleClasses;
  return AngleClass(idx);
}

}  // namespace grasp
