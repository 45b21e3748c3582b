#pragma once

// Serial, deliberately plain versions of the hot kinetic kernels. They share
// no code with the OpenMP paths (no row buffers, no rotation-invariant kernel
// vectors, dense elimination instead of the cyclic Thomas solve), so tests
// can check the fast paths against them and the benchmark can time both.

#include <span>
#include <vector>

#include "crowdscale/kinetic.hpp"

namespace crowdscale::reference {

void transport_x(KineticField& f, double c, double dt);
void transport_y(KineticField& f, double c, double dt);

/// Implicit angular step solved by dense Gaussian elimination with partial
/// pivoting. O(n_theta^3) per fiber: only for small grids.
void angular_step(KineticField& f, const ForceField& force, double d, double dt);

/// Local-mode probe DTIs, evaluating the kernel at every (heading, partner)
/// pair in the lab frame.
ProbeDti probe_dti(const Grid2D& grid, const AngleGrid& angles, std::span<const double> g, const KineticParams& p);

/// Force field built on the reference probe DTIs.
ForceField force_field(const KineticField& f, const KineticParams& p);

/// Full Strang step built from the reference pieces (no CFL check).
void step_kinetic(KineticField& f, const KineticParams& p, double dt);

/// Dense solve of M x = rhs, M row-major n x n. Throws std::runtime_error on
/// a singular matrix.
std::vector<double> dense_solve(std::vector<double> m, std::vector<double> rhs);

}  // namespace crowdscale::reference
