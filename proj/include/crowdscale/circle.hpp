#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "crowdscale/vec2.hpp"

namespace crowdscale {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wrap an angle into [-pi, pi).
inline double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

/// Uniform grid of n headings on the circle, theta_i = i * 2pi/n.
/// Integrals over the circle use the rectangle rule, which is spectrally
/// accurate for smooth periodic integrands.
class AngleGrid {
 public:
  AngleGrid() = default;
  explicit AngleGrid(int n) : n_(n) {}

  int size() const { return n_; }
  double step() const { return kTwoPi / n_; }
  double angle(int i) const { return i * step(); }
  Vec2 unit(int i) const { return unit_from_angle(angle(i)); }
  int wrap(int i) const { return ((i % n_) + n_) % n_; }

  double integrate(std::span<const double> values) const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * step();
  }

  /// First moment: integral of values(theta) * u(theta).
  Vec2 first_moment(std::span<const double> values) const {
    Vec2 m;
    for (int i = 0; i < n_; ++i) m += values[i] * unit(i);
    return step() * m;
  }

 private:
  int n_ = 0;
};

}  // namespace crowdscale
