#include "crowdscale/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crowdscale {

namespace {

// Perpendicular miss distance |xi x rel| / |rel|; more accurate than
// sqrt(|xi|^2 - (xi.rel/|rel|)^2) when the two terms nearly cancel.
double miss_distance(Vec2 xi, Vec2 rel, double rel_norm) {
  return std::abs(cross(xi, rel)) / rel_norm;
}

}  // namespace

EncounterResult binary_encounter(const EncounterInput& in) {
  if (!(in.radius > 0.0)) throw std::domain_error("binary_encounter: threshold must be positive");
  const Vec2 dx = in.x_j - in.x_i;
  const Vec2 dv = in.v_j - in.v_i;
  const double dv2 = norm2(dv);
  EncounterResult r;
  if (dv2 == 0.0) {
    r.md = norm(dx);
    return r;
  }
  const double closing = dot(dx, dv);
  r.md = miss_distance(dx, dv, std::sqrt(dv2));
  if (closing < 0.0 && r.md <= in.radius) {
    r.tti = -closing / dv2;
    r.dti = r.tti * norm(in.v_i);
  }
  return r;
}

double closing_time(Vec2 xi, Vec2 rel, double radius) {
  const double rel2 = norm2(rel);
  if (rel2 == 0.0) return kInf;
  const double closing = dot(xi, rel);
  if (!(closing < 0.0)) return kInf;
  if (miss_distance(xi, rel, std::sqrt(rel2)) > radius) return kInf;
  return -closing / rel2;
}

double elementary_dti_inverse(Vec2 xi, Vec2 rel, const CutoffParams& cut) {
  const double t = closing_time(xi, rel, cut.radius);
  if (t == kInf) return 0.0;
  return std::min(1.0 / t, 1.0 / cut.ell);
}

bool offset_in_cone(Vec2 offset, Vec2 heading, double kappa, double delta) {
  const double r2 = norm2(offset);
  if (r2 == 0.0 || r2 > delta * delta) return false;
  return dot(offset, heading) >= kappa * std::sqrt(r2);
}

bool in_vision_cone(Vec2 center, Vec2 heading, Vec2 other, double kappa, double delta) {
  return offset_in_cone(other - center, heading, kappa, delta);
}

}  // namespace crowdscale
