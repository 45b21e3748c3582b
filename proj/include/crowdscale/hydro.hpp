#pragma once

#include <memory>
#include <span>
#include <vector>

#include "crowdscale/circle.hpp"
#include "crowdscale/geometry.hpp"
#include "crowdscale/grid.hpp"
#include "crowdscale/kernels.hpp"
#include "crowdscale/kinetic.hpp"
#include "crowdscale/params.hpp"

namespace crowdscale {

/// Equilibrium DTI profile D(u) on a heading grid, with the record of the
/// iteration that produced it.
struct DtiProfile {
  AngleGrid grid;
  std::vector<double> values;     ///< D(u_i), within [ell, L]
  int iterations = 0;
  double residual = 0.0;          ///< max_u |G(D) - D| at the returned D
  std::vector<double> residual_history;
  bool screened = false;          ///< set when the low-density screen returned D = L
};

/// Default model parameters with the full vision disk (kappa = -1).
inline ModelParams full_disk_model() {
  ModelParams m;
  m.kappa = -1.0;
  return m;
}

struct HydroParams {
  ModelParams model = full_disk_model();
  int n_theta = 128;
  double omega = 0.5;           ///< initial damping of the fixed-point iteration
  double tolerance = 1e-8;      ///< on max |G(D) - D|, relative to L
  int max_iterations = 500;
  double diameter = kInf;       ///< clamp for the interaction radius (domain diameter)
  bool warm_start = true;       ///< start from the previous profile of the cell
  std::shared_ptr<const IsoKernelFamily> kernel;
};

/// Right-hand side G of the self-consistency equation: builds the local
/// equilibrium of every bin from D, averages the isotropic kernel against
/// the density-weighted mixture, floors at 1/L and inverts.
std::vector<double> dti_map(std::span<const double> dti, std::span<const double> rho, const TargetBins& bins,
                            const HydroParams& p);

/// Damped fixed-point solve D = G(D) started from D = L (or `warm`). The
/// step weight starts at `omega`, halves whenever the residual grows and
/// otherwise grows by 1.25 up to 1. When the density is so low
/// that no kernel value exceeds 1/L, D = L is returned directly. Only the
/// full-disk (kappa = -1) model is supported. Throws FixedPointError with
/// the residual history after max_iterations.
DtiProfile fixed_point_dti(std::span<const double> rho, const TargetBins& bins, const HydroParams& p,
                           const DtiProfile* warm = nullptr);

/// Mean velocity of the local equilibrium of target direction a.
Vec2 equilibrium_velocity(const DtiProfile& profile, const ModelParams& p, Vec2 a);

/// Per-cell densities with cached profiles and velocities.
struct HydroState {
  Grid2D grid;
  TargetBins bins;
  std::vector<double> rho;             ///< [bin][cell]
  std::vector<Vec2> velocity;          ///< [bin][cell], from the last solve
  std::vector<DtiProfile> profiles;    ///< [cell]
  std::vector<std::vector<double>> solved_for;  ///< [cell] densities of the cached profile

  HydroState() = default;
  HydroState(Grid2D g, TargetBins b);

  int n_bins() const { return bins.size(); }
  int n_cells() const { return grid.cells(); }
  std::size_t index(int b, int cell) const { return static_cast<std::size_t>(b) * n_cells() + cell; }
  std::vector<double> mass_per_bin() const;
};

/// Solves the fixed point of every cell whose densities changed since the
/// cached solve and refreshes the equilibrium velocities.
void update_velocities(HydroState& s, const HydroParams& p);

/// Forward Euler step of the continuity equation with the equilibrium
/// velocities, conservative upwind fluxes. Throws CflError when
/// c dt / min(dx, dy) > 0.9; fixed-point failures are rethrown with the cell.
void step_hydro(HydroState& s, const HydroParams& p, double dt);

}  // namespace crowdscale
