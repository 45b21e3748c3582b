#pragma once

#include <span>
#include <utility>
#include <vector>

#include "crowdscale/circle.hpp"
#include "crowdscale/vec2.hpp"

namespace crowdscale {

/// Modified Bessel function I_k(x) for k in {0, 1, 2}, x in [0, 700].
double bessel_i(int k, double x);

/// Exponentially scaled I_k(x) * exp(-x); finite for every x >= 0.
double bessel_i_scaled(int k, double x);

/// Mean resultant length I_1(beta) / I_0(beta) of a von Mises-Fisher law.
double order_parameter(double beta);

/// Inverse of order_parameter on [0, 1). Throws std::domain_error for u >= 1.
double beta_of_speed(double u_norm);

struct GammaCoefficients {
  double parallel = 0.0;
  double perp = 0.0;
};

/// Second-moment coefficients of the VMF law with |U| = u_norm in (0, 1).
GammaCoefficients gamma_coefficients(double u_norm);

/// I_2(beta) / I_0(beta) as a function of the order parameter; lies in [0, 1).
double second_harmonic_ratio(double u_norm);

struct VmfParams {
  double beta = 0.0;
  Vec2 omega{1.0, 0.0};
};

/// exp(beta u.omega) / (2 pi I_0(beta)).
double vmf_density(Vec2 u, const VmfParams& p);

/// VMF density sampled on an angle grid.
std::vector<double> vmf_samples(const AngleGrid& grid, const VmfParams& p);

/// Local equilibrium exp(-Phi_D / d) / Z_D for one target direction.
struct LteProfile {
  AngleGrid grid;
  std::vector<double> values;     ///< normalized density per grid angle
  std::vector<double> potential;  ///< Phi_D(u, a) / d per grid angle
};

/// Builds the local equilibrium from a DTI profile sampled on `grid`.
/// Throws std::domain_error on non-finite DTI samples.
LteProfile lte_from_dti(std::span<const double> dti, const AngleGrid& grid, Vec2 target,
                        double k, double big_l, double d_noise);
/// Same, with the grid unit vectors precomputed.
LteProfile lte_from_dti(std::span<const double> dti, const AngleGrid& grid, std::span<const Vec2> units,
                        Vec2 target, double k, double big_l, double d_noise);

/// Fast tabulated I_2/I_0 divided by |U|^2, smooth on [0, 1]. Used by the
/// solvers to build the VMF flux tensor without a root find per cell.
class HarmonicRatioTable {
 public:
  static const HarmonicRatioTable& instance();
  /// (I_2/I_0) / |U|^2 at the given order parameter, with the |U| -> 0 limit 1/2.
  double scaled(double u_norm) const;

 private:
  HarmonicRatioTable();
  std::vector<double> nodes_;
  double step_ = 0.0;
};

}  // namespace crowdscale
