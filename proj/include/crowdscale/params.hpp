#pragma once

namespace crowdscale {

/// Distance thresholds shared by every interaction model.
struct CutoffParams {
  double ell = 0.4;    ///< lower cut-off on a single encounter distance
  double big_l = 4.0;  ///< free-walk distance, upper bound of the averaged DTI
  double radius = 0.4; ///< minimal-distance threshold (body diameter)
};

/// Behavioural parameters common to the kinetic and fluid levels.
struct ModelParams {
  double c = 1.0;            ///< walking speed
  double kappa = 0.0;        ///< cosine of the vision-cone half angle
  double k = 1.0 / 16.0;     ///< potential stiffness; k L^2 is a rate (1/s)
  double d = 0.1;            ///< angular diffusion (1/s)
  double big_c = 5.0;        ///< interaction radius = big_c / sqrt(density)
  CutoffParams cut;

  /// Concentration of the free-walking equilibrium, k L^2 / d.
  double free_beta() const { return k * cut.big_l * cut.big_l / d; }
};

}  // namespace crowdscale
