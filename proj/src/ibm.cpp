#include "crowdscale/ibm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "crowdscale/circle.hpp"
#include "crowdscale/errors.hpp"
#include "crowdscale/geometry.hpp"
#include "crowdscale/rng.hpp"

namespace crowdscale {

namespace {

Vec2 offset(const IbmParams& p, Vec2 from, Vec2 to) {
  return p.box ? p.box->offset(from, to) : to - from;
}

Vec2 advance(const IbmParams& p, Vec2 x, Vec2 v) {
  const Vec2 y = x + v;
  return p.box ? p.box->wrap(y) : y;
}

}  // namespace

double dti_discrete(std::size_t i, Vec2 w, const Crowd& crowd, const IbmParams& p) {
  const double cap = p.c * p.dt;
  const Vec2 xi = crowd[i].x;
  const Vec2 ui = crowd[i].heading();
  double best = cap;
  for (std::size_t j = 0; j < crowd.size(); ++j) {
    if (j == i) continue;
    const Vec2 dx = offset(p, xi, crowd[j].x);
    const double r = norm(dx);
    if (r == 0.0 || dot(dx, ui) < p.kappa * r) continue;
    // Per-pair DTI along w; the relative velocity is taken in units of c.
    const double t = closing_time(dx, crowd[j].heading() - w, p.cut.radius);
    best = std::min(best, std::min(t, cap));
  }
  return best;
}

std::vector<double> test_angles(double theta, const IbmParams& p) {
  const int n = p.n_test;
  std::vector<double> out(n);
  if (p.kappa <= -1.0) {
    for (int m = 0; m < n; ++m) out[m] = theta + kTwoPi * m / n;
    return out;
  }
  const double half = std::acos(std::clamp(p.kappa, -1.0, 1.0));
  for (int m = 0; m < n; ++m) out[m] = theta + half * (-1.0 + 2.0 * m / (n - 1));
  return out;
}

Crowd step_discrete(const Crowd& crowd, const IbmParams& p) {
  if (p.n_test < 3) throw std::invalid_argument("step_discrete: need at least 3 test directions");
  Crowd moved = crowd;
  for (auto& s : moved) s.x = advance(p, s.x, p.c * p.dt * s.heading());
  Crowd out = moved;
  const double reach = p.c * p.dt;
  const long n = static_cast<long>(crowd.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    const double theta = crowd[i].theta;
    const std::vector<double> angles = test_angles(theta, p);
    double best_cost = std::numeric_limits<double>::infinity();
    double best_turn = std::numeric_limits<double>::infinity();
    double best_angle = theta;
    for (double ang : angles) {
      const Vec2 w = unit_from_angle(ang);
      const double dist = dti_discrete(static_cast<std::size_t>(i), w, moved, p);
      const double cost = norm2(dist * w - reach * crowd[i].a);
      const double turn = std::abs(wrap_angle(ang - theta));
      // Ties: smallest turn, then the earliest test index.
      if (cost < best_cost || (cost == best_cost && turn < best_turn)) {
        best_cost = cost;
        best_turn = turn;
        best_angle = ang;
      }
    }
    out[i].theta = wrap_angle(best_angle);
  }
  return out;
}

double interaction_radius(std::size_t i, const Crowd& crowd, const IbmParams& p) {
  const double r0 = p.local_radius();
  const double cap = p.box ? p.box->diameter() : kInf;
  int count = 0;
  for (std::size_t j = 0; j < crowd.size(); ++j) {
    if (j != i && norm2(offset(p, crowd[i].x, crowd[j].x)) <= r0 * r0) ++count;
  }
  if (count == 0) return cap;
  const double density = count / (std::numbers::pi * r0 * r0);
  return std::min(p.big_c / std::sqrt(density), cap);
}

namespace {

double harmonic_dti_with_radius(std::size_t i, Vec2 w, const Crowd& crowd, const IbmParams& p, double delta) {
  const Vec2 xi = crowd[i].x;
  const Vec2 ui = crowd[i].heading();
  double sum = 0.0;
  int members = 0;
  for (std::size_t j = 0; j < crowd.size(); ++j) {
    if (j == i) continue;
    const Vec2 dx = offset(p, xi, crowd[j].x);
    if (!offset_in_cone(dx, ui, p.kappa, delta)) continue;
    ++members;
    sum += elementary_dti_inverse(dx, crowd[j].heading() - w, p.cut);
  }
  const double mean = members > 0 ? sum / members : 0.0;
  return 1.0 / std::max(mean, 1.0 / p.cut.big_l);
}

double potential_with_radius(std::size_t i, double w_angle, const Crowd& crowd, const IbmParams& p, double delta) {
  const Vec2 w = unit_from_angle(w_angle);
  const double dist = harmonic_dti_with_radius(i, w, crowd, p, delta);
  return 0.5 * p.k * norm2(dist * w - p.cut.big_l * crowd[i].a);
}

double force_with_radius(std::size_t i, const Crowd& crowd, const IbmParams& p, double delta) {
  const double h = p.fd_step;
  const double th = crowd[i].theta;
  return -(potential_with_radius(i, th + h, crowd, p, delta) - potential_with_radius(i, th - h, crowd, p, delta)) /
         (2.0 * h);
}

}  // namespace

double harmonic_dti(std::size_t i, Vec2 w, const Crowd& crowd, const IbmParams& p) {
  return harmonic_dti_with_radius(i, w, crowd, p, interaction_radius(i, crowd, p));
}

double pedestrian_potential(std::size_t i, double w_angle, const Crowd& crowd, const IbmParams& p) {
  return potential_with_radius(i, w_angle, crowd, p, interaction_radius(i, crowd, p));
}

double pedestrian_force(std::size_t i, const Crowd& crowd, const IbmParams& p) {
  return force_with_radius(i, crowd, p, interaction_radius(i, crowd, p));
}

Crowd step_continuous(const Crowd& crowd, const IbmParams& p, std::span<const double> noise) {
  if (noise.size() != crowd.size()) throw std::invalid_argument("step_continuous: one increment per pedestrian");
  const long n = static_cast<long>(crowd.size());
  std::vector<double> force(crowd.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) force[i] = pedestrian_force(static_cast<std::size_t>(i), crowd, p);

  for (long i = 0; i < n; ++i) {
    if (std::abs(force[i]) * p.dt >= std::numbers::pi / 4.0) {
      std::ostringstream msg;
      msg << "step_continuous: |F| dt = " << std::abs(force[i]) * p.dt << " >= pi/4 for pedestrian " << i
          << "; reduce dt";
      throw CflError(msg.str());
    }
  }
  Crowd out = crowd;
  const double amp = std::sqrt(2.0 * p.d * p.dt);
  for (long i = 0; i < n; ++i) {
    out[i].x = advance(p, crowd[i].x, p.c * p.dt * crowd[i].heading());
    out[i].theta = wrap_angle(crowd[i].theta + force[i] * p.dt + amp * noise[i]);
  }
  return out;
}

std::vector<double> noise_for_step(std::size_t count, std::uint64_t seed, std::uint64_t step) {
  const CounterRng rng(seed);
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = rng.normal(i, step);
  return out;
}

Crowd step_continuous(const Crowd& crowd, const IbmParams& p, std::uint64_t seed, std::uint64_t step) {
  const std::vector<double> noise = noise_for_step(crowd.size(), seed, step);
  return step_continuous(crowd, p, noise);
}

}  // namespace crowdscale
