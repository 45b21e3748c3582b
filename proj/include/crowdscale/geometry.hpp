#pragma once

#include <limits>

#include "crowdscale/params.hpp"
#include "crowdscale/vec2.hpp"

namespace crowdscale {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct EncounterInput {
  Vec2 x_i, v_i, x_j, v_j;
  double radius = 0.0;
};

/// tti and dti are +inf when the pair is receding or passes farther than the
/// threshold; md is the closest-approach distance in every case.
struct EncounterResult {
  double tti = kInf;
  double dti = kInf;
  double md = 0.0;
};

/// Closest approach of two walkers moving at constant velocity.
/// Throws std::domain_error when the threshold is not positive.
EncounterResult binary_encounter(const EncounterInput& in);

/// Time until closest approach for offset `xi` (partner minus self) and
/// relative velocity `rel` (partner minus self), or +inf when the pair is not
/// closing or misses by more than `radius`. Zero relative velocity never
/// interacts.
double closing_time(Vec2 xi, Vec2 rel, double radius);

/// Inverse DTI of one encounter: min(|rel|^2 / |xi.rel|, 1/ell) for a closing
/// pair within the threshold, 0 otherwise (0 encodes an infinite DTI).
double elementary_dti_inverse(Vec2 xi, Vec2 rel, const CutoffParams& cut);

/// Whether `other` lies in the sector of radius `delta` and cosine threshold
/// `kappa` about `heading`. The apex itself is excluded.
bool in_vision_cone(Vec2 center, Vec2 heading, Vec2 other, double kappa, double delta);

/// Same test for an offset vector already relative to the apex.
bool offset_in_cone(Vec2 offset, Vec2 heading, double kappa, double delta);

}  // namespace crowdscale
