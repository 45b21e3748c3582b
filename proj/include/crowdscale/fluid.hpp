#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "crowdscale/circle.hpp"
#include "crowdscale/grid.hpp"
#include "crowdscale/kinetic.hpp"
#include "crowdscale/params.hpp"

namespace crowdscale {

/// Density and mean velocity per target bin on a periodic cell grid, stored
/// as [bin][cell]. The monokinetic closure keeps |U| = 1; the VMF closure
/// keeps |U| < 1.
class FluidField {
 public:
  FluidField() = default;
  FluidField(Grid2D grid, TargetBins bins);

  const Grid2D& grid() const { return grid_; }
  const TargetBins& bins() const { return bins_; }
  int n_bins() const { return bins_.size(); }
  int n_cells() const { return grid_.cells(); }
  std::size_t index(int b, int cell) const { return static_cast<std::size_t>(b) * n_cells() + cell; }

  double& rho(int b, int cell) { return rho_[index(b, cell)]; }
  double rho(int b, int cell) const { return rho_[index(b, cell)]; }
  Vec2& velocity(int b, int cell) { return vel_[index(b, cell)]; }
  Vec2 velocity(int b, int cell) const { return vel_[index(b, cell)]; }
  std::span<double> rho_bin(int b) { return {rho_.data() + index(b, 0), static_cast<std::size_t>(n_cells())}; }
  std::span<const double> rho_bin(int b) const {
    return {rho_.data() + index(b, 0), static_cast<std::size_t>(n_cells())};
  }
  std::span<Vec2> velocity_bin(int b) { return {vel_.data() + index(b, 0), static_cast<std::size_t>(n_cells())}; }
  std::span<const Vec2> velocity_bin(int b) const {
    return {vel_.data() + index(b, 0), static_cast<std::size_t>(n_cells())};
  }
  const std::vector<double>& rho_data() const { return rho_; }
  const std::vector<Vec2>& velocity_data() const { return vel_; }

  /// Sum of rho * cell area per bin.
  std::vector<double> mass_per_bin() const;
  /// Weighted total density N per cell.
  std::vector<double> total_density() const;

 private:
  Grid2D grid_;
  TargetBins bins_;
  std::vector<double> rho_;
  std::vector<Vec2> vel_;
};

struct FluidParams {
  ModelParams model;
  InteractionMode mode = InteractionMode::free;
  double fd_step = 2.0 * std::numbers::pi / 256.0;
  int n_quad = 128;        ///< heading quadrature for the VMF averages
  double rho_max = 1e3;    ///< monokinetic caustic ceiling (1/m^2)
  double vacuum = 1e-12;   ///< cells below this density are masked from forces
  KernelSet kernels;

  KineticParams kinetic() const { return {model, mode, fd_step, kernels}; }
};

/// Conservative first-order upwind update of rho by the flux c rho U,
/// dimension split (x sweep, then y sweep) so each sweep is positivity
/// preserving under c dt / dx <= 1.
void upwind_continuity(const Grid2D& grid, std::span<double> rho, std::span<const Vec2> velocity, double c,
                       double dt);

// ------------------------------------------------------------ monokinetic

/// Averaged DTI of bin `bin` at `cell` along w, with every group moving at
/// its local mean velocity.
double mono_dti(const FluidField& f, int cell, int bin, Vec2 w, const FluidParams& p);

/// Mean-field force on each group, [bin][cell]. Central difference of the
/// averaged potential about the group velocity; the result is along U^perp,
/// so F.U = 0. Masked cells get zero.
std::vector<Vec2> mono_force(const FluidField& f, const FluidParams& p);

struct FluidDiagnostics {
  int clamp_count = 0;   ///< VMF cells whose |U| hit 1 - 1e-9
  int radius_clamped = 0;
};

/// Upwind continuity for rho and upwind advective update of U, both with the
/// old velocity, then U += dt F and renormalization to |U| = 1. Vacuum cells
/// keep their velocity. Throws CflError when c dt / min(dx, dy) > 0.9 and
/// CausticError once any density exceeds rho_max; the field is left
/// untouched when throwing.
void step_mono(FluidField& f, const FluidParams& p, double dt, FluidDiagnostics* diag = nullptr);

// -------------------------------------------------------------------- VMF

/// Symmetric 2x2 tensor.
struct SymTensor2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
  double trace() const { return xx + yy; }
};

/// Second-moment flux rho (gamma_par U U + gamma_perp U^perp U^perp).
/// Throws std::domain_error unless 0 < |U| < 1.
SymTensor2 vmf_flux_tensor(double rho, Vec2 u);

/// The same tensor from the tabulated harmonic ratio; defined on the closed
/// range 0 <= |U| <= 1 with the isotropic limit rho/2 I at U = 0.
SymTensor2 vmf_flux_tensor_fast(double rho, Vec2 u);

/// Mean of the elementary force F_theta(u) u^perp against the VMF law
/// (beta, omega), from samples of the potential Phi(w) on `grid`. The
/// by-parts form beta <Phi> omega - <Phi (1 + beta u.omega) u> needs no
/// derivative; the direct form differentiates Phi spectrally.
Vec2 vmf_average_force(std::span<const double> phi, const AngleGrid& grid, double beta, Vec2 omega,
                       bool by_parts);
/// Same, with the grid unit vectors precomputed.
Vec2 vmf_average_force(std::span<const double> phi, const AngleGrid& grid, std::span<const Vec2> units, double beta,
                       Vec2 omega, bool by_parts);

/// Mean-field force of every group, [bin][cell]. free: k L^2 (a - Sigma a /
/// rho), exact. local_iso: by-parts form with the VMF-averaged isotropic
/// kernel. local and nonlocal: direct quadrature over headings of the
/// elementary force, with the partner heading density a sum of sampled VMF
/// laws.
std::vector<Vec2> vmf_force(const FluidField& f, const FluidParams& p, FluidDiagnostics* diag = nullptr);

/// Spectral-derivative counterpart of vmf_force for the free and local_iso
/// modes, used to check the by-parts identity.
std::vector<Vec2> vmf_force_direct(const FluidField& f, const FluidParams& p);

/// Rusanov update of (rho, rho U) with wave speed c, dimension split; the
/// numerical flux is a kinetic flux, so |U| <= 1 survives the transport.
/// The source rho F - d rho U is integrated exactly for frozen F. Afterwards
/// |U| is clamped to 1 - 1e-9 (counted in diag). Throws CflError when
/// c dt / min(dx, dy) > 0.9 and SolverError on a negative density.
void step_vmf(FluidField& f, const FluidParams& p, double dt, FluidDiagnostics* diag = nullptr);

}  // namespace crowdscale
