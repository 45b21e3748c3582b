#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "crowdscale/grid.hpp"
#include "crowdscale/params.hpp"
#include "crowdscale/vec2.hpp"

namespace crowdscale {

/// Particle phase point. The heading is stored as an angle so |u| = 1 holds
/// identically.
struct PedestrianState {
  Vec2 x;
  double theta = 0.0;
  Vec2 a{1.0, 0.0};

  Vec2 heading() const { return unit_from_angle(theta); }
};

using Crowd = std::vector<PedestrianState>;

struct IbmParams {
  double c = 1.0;
  double dt = 0.05;
  double kappa = 0.0;
  CutoffParams cut;
  double k = 1.0 / 16.0;
  double d = 0.1;
  double big_c = 5.0;
  int n_test = 64;
  /// Radius of the local density estimate; 0 selects 2 L.
  double density_radius = 0.0;
  double fd_step = 2.0 * std::numbers::pi / 256.0;
  std::optional<PeriodicBox> box;

  double local_radius() const { return density_radius > 0.0 ? density_radius : 2.0 * cut.big_l; }
};

/// Time-discrete model: minimum over visible partners of the per-pair DTI
/// along test direction w, each capped by c dt; c dt when nobody qualifies.
double dti_discrete(std::size_t i, Vec2 w, const Crowd& crowd, const IbmParams& p);

/// Test directions spanning the vision cone about `theta`, boundaries included.
std::vector<double> test_angles(double theta, const IbmParams& p);

/// One synchronous step of the time-discrete model: positions advance along
/// the old headings, then each heading moves to the test direction that best
/// reconciles the available distance with the target.
Crowd step_discrete(const Crowd& crowd, const IbmParams& p);

/// Interaction radius of pedestrian i from the count of others within the
/// density radius; the domain diameter (or +inf) when nobody is around.
double interaction_radius(std::size_t i, const Crowd& crowd, const IbmParams& p);

/// Harmonic average of the elementary DTI over the interaction region,
/// bounded to [ell, L].
double harmonic_dti(std::size_t i, Vec2 w, const Crowd& crowd, const IbmParams& p);

/// k/2 |D(w) w - L a|^2 for pedestrian i.
double pedestrian_potential(std::size_t i, double w_angle, const Crowd& crowd, const IbmParams& p);

/// Angular force -dPhi/dtheta at the current heading (central difference).
double pedestrian_force(std::size_t i, const Crowd& crowd, const IbmParams& p);

/// One step of the time-continuous stochastic model with explicit standard
/// normal increments, one per pedestrian. Throws CflError when
/// |F| dt >= pi/4 for some pedestrian.
///
/// In angle coordinates the noise projected on the tangent of the circle is
/// additive (its intensity does not depend on theta), so the Ito and
/// Stratonovich readings coincide and Euler-Maruyama on theta realises the
/// Stratonovich equation exactly in law.
Crowd step_continuous(const Crowd& crowd, const IbmParams& p, std::span<const double> noise);

/// Same, drawing increments from the counter-based stream (seed, id, step).
Crowd step_continuous(const Crowd& crowd, const IbmParams& p, std::uint64_t seed, std::uint64_t step);

/// Standard normal increments used by step_continuous for a given step.
std::vector<double> noise_for_step(std::size_t count, std::uint64_t seed, std::uint64_t step);

}  // namespace crowdscale
