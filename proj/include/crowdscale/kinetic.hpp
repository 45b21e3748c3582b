#pragma once

#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "crowdscale/circle.hpp"
#include "crowdscale/grid.hpp"
#include "crowdscale/kernels.hpp"
#include "crowdscale/params.hpp"

namespace crowdscale {

/// Discrete target directions. Each bin is a Dirac mass in the target
/// variable; the weight multiplies its contribution to the total density.
struct TargetBins {
  std::vector<double> angles;
  std::vector<double> weights;

  TargetBins() = default;
  explicit TargetBins(std::vector<double> a) : angles(std::move(a)), weights(angles.size(), 1.0) {}
  TargetBins(std::vector<double> a, std::vector<double> w) : angles(std::move(a)), weights(std::move(w)) {}

  int size() const { return static_cast<int>(angles.size()); }
  Vec2 dir(int b) const { return unit_from_angle(angles[b]); }
};

enum class InteractionMode {
  free,       ///< no interactions: D = L everywhere
  nonlocal,   ///< spatial average over the vision sector
  local,      ///< sector kernel contraction at the same cell
  local_iso,  ///< full-disk kernel contraction at the same cell
};

InteractionMode parse_interaction_mode(const std::string& name);
std::string to_string(InteractionMode mode);

/// Kernel tables needed by the local interaction modes.
struct KernelSet {
  std::shared_ptr<const SectorKernelFamily> sector;
  std::shared_ptr<const IsoKernelFamily> iso;
  std::shared_ptr<const VmfKernelFamily> vmf_iso;
};

/// Distribution f(x, theta, a) on cells x headings x target bins, stored as
/// [bin][cell][theta] so every angular fiber is contiguous.
class KineticField {
 public:
  KineticField() = default;
  KineticField(Grid2D grid, AngleGrid angles, TargetBins bins);

  const Grid2D& grid() const { return grid_; }
  const AngleGrid& angles() const { return angles_; }
  const TargetBins& bins() const { return bins_; }
  int n_theta() const { return angles_.size(); }
  int n_cells() const { return grid_.cells(); }
  int n_bins() const { return bins_.size(); }

  std::size_t offset(int b, int cell) const {
    return (static_cast<std::size_t>(b) * n_cells() + cell) * n_theta();
  }
  double& at(int b, int cell, int i) { return data_[offset(b, cell) + i]; }
  double at(int b, int cell, int i) const { return data_[offset(b, cell) + i]; }
  std::span<double> fiber(int b, int cell) { return {data_.data() + offset(b, cell), static_cast<std::size_t>(n_theta())}; }
  std::span<const double> fiber(int b, int cell) const {
    return {data_.data() + offset(b, cell), static_cast<std::size_t>(n_theta())};
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  /// Total mass of each bin: sum of f * cell area * dtheta.
  std::vector<double> mass_per_bin() const;

 private:
  Grid2D grid_;
  AngleGrid angles_;
  TargetBins bins_;
  std::vector<double> data_;
};

/// Density and mean velocity per bin and cell, plus the total density.
struct Moments {
  int n_bins = 0;
  int n_cells = 0;
  std::vector<double> rho;          ///< [bin][cell]
  std::vector<Vec2> velocity;       ///< [bin][cell]; zero where masked
  std::vector<std::uint8_t> empty;  ///< [bin][cell]; 1 where rho = 0
  std::vector<double> total;        ///< [cell]; weighted sum over bins

  double rho_at(int b, int c) const { return rho[static_cast<std::size_t>(b) * n_cells + c]; }
  Vec2 velocity_at(int b, int c) const { return velocity[static_cast<std::size_t>(b) * n_cells + c]; }
};

Moments moments(const KineticField& f);

struct KineticParams {
  ModelParams model;
  InteractionMode mode = InteractionMode::free;
  double fd_step = 2.0 * std::numbers::pi / 256.0;
  KernelSet kernels;
};

/// Angular force F_theta(x, theta, a). When `uniform` is set, only one cell
/// is stored and applies everywhere.
struct ForceField {
  int n_bins = 0;
  int n_cells = 0;
  int n_theta = 0;
  bool uniform = false;
  std::vector<double> values;  ///< [bin][cell or 0][theta]
  int radius_clamped = 0;      ///< cells whose interaction radius hit the domain diameter

  std::span<const double> fiber(int b, int cell) const {
    const int c = uniform ? 0 : cell;
    return {values.data() + (static_cast<std::size_t>(b) * (uniform ? 1 : n_cells) + c) * n_theta,
            static_cast<std::size_t>(n_theta)};
  }
};

/// Interaction radius C N^{-1/2}, clamped to the domain diameter (also used
/// when the density vanishes). Sets *clamped when the clamp is active.
double interaction_radius(double total_density, double big_c, double diameter, bool* clamped = nullptr);

/// Averaged DTI from the spatial sector average for a pedestrian at `cell`
/// heading along u and testing direction w.
double nonlocal_dti(const KineticField& f, int cell, Vec2 u, Vec2 w, const ModelParams& p);

/// D(x, u_i, w) for every cell and grid heading u_i, as [cell][theta].
std::vector<double> nonlocal_dti_field(const KineticField& f, Vec2 w, const ModelParams& p);

/// Heading density g(cell, v) = sum_b w_b f(b, cell, v), as [cell][theta];
/// its theta integral is the total density N.
std::vector<double> heading_density(const KineticField& f);

/// DTI at the probe directions theta_i +- h for every cell and grid heading
/// theta_i, as [cell][theta].
struct ProbeDti {
  std::vector<double> plus;
  std::vector<double> minus;
  int radius_clamped = 0;
};

/// Probe DTIs of every mode from a heading density on `angles`; the same
/// routine serves the kinetic solver and the VMF closure (whose g is a sum of
/// sampled VMF laws).
ProbeDti probe_dti(const Grid2D& grid, const AngleGrid& angles, std::span<const double> g, const KineticParams& p);

/// Relative velocities v_m - w(+-h) in the heading frame, shared by every
/// cell and heading of a local probe.
struct ProbeStencil {
  AngleGrid angles;
  double h = 0.0;
  std::vector<Vec2> rel_plus, rel_minus;
  std::vector<double> s_plus, s_minus;
};
ProbeStencil make_probe_stencil(const AngleGrid& angles, double h);

/// Kernel contraction at one cell for the local modes. `total` is the total
/// density; vacuum gives D = L.
void local_probe_dti(const KernelSet& kernels, InteractionMode mode, double delta, std::span<const double> g,
                     double total, const ProbeStencil& stencil, const ModelParams& p, std::span<double> d_plus,
                     std::span<double> d_minus);

/// Central difference -(Phi(theta + h) - Phi(theta - h)) / 2h of the
/// potential Phi(w) = k/2 |D(w) w - L a|^2 from the two probe DTIs.
double probe_force(double d_plus, double d_minus, double theta, double h, Vec2 target, const ModelParams& p);
/// Same, with the probe headings w(theta +- h) precomputed.
double probe_force(double d_plus, double d_minus, Vec2 w_plus, Vec2 w_minus, double h, Vec2 target,
                   const ModelParams& p);

ForceField force_field(const KineticField& f, const KineticParams& p);

struct KineticDiagnostics {
  int radius_clamped = 0;
};

/// One Strang-split step: x(dt/2) y(dt/2) theta(dt) y(dt/2) x(dt/2). The
/// spatial sweeps are conservative first-order upwind; the angular step is an
/// implicit exponentially fitted (Scharfetter-Gummel) drift-diffusion solve,
/// an M-matrix with unit column sums, so it preserves mass and positivity for
/// any dt. Throws CflError when c dt / min(dx, dy) > 0.9.
void step_kinetic(KineticField& f, const KineticParams& p, double dt, KineticDiagnostics* diag = nullptr);

/// Individual sub-steps, exposed for testing and benchmarking.
void transport_x(KineticField& f, double c, double dt);
void transport_y(KineticField& f, double c, double dt);
void angular_step(KineticField& f, const ForceField& force, double d, double dt);

/// Periodic tridiagonal system with sub-diagonal a, diagonal b and
/// super-diagonal c (a[0] couples row 0 to the last unknown, c[n-1] the last
/// row to unknown 0). Factored once, solved many times.
class CyclicTridiagonal {
 public:
  CyclicTridiagonal() = default;
  CyclicTridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c);
  void solve(std::span<double> rhs) const;

 private:
  int n_ = 0;
  std::vector<double> cp_, inv_den_, a_, z_;
  double gamma_ = 0.0, corr_den_ = 0.0, last_coupling_ = 0.0, first_coupling_ = 0.0;
  void thomas(std::span<double> x) const;
};

/// Exponential fitting weight x / (e^x - 1), with B(0) = 1.
double bernoulli_weight(double x);

/// Row coefficients of the implicit angular operator for one fiber.
void angular_coefficients(std::span<const double> force, double d, double dt, double dtheta,
                          std::vector<double>& a, std::vector<double>& b, std::vector<double>& c);

}  // namespace crowdscale
