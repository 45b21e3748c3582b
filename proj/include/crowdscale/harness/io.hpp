#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "crowdscale/grid.hpp"
#include "crowdscale/vec2.hpp"

namespace crowdscale::harness {

/// Shortest round-trip decimal form; identical bytes on every platform.
std::string format_double(double v);

/// Comma-separated table with a header row. Quoting is not supported; the
/// writers never emit commas inside fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  ///< throws std::out_of_range
};

CsvTable read_csv(const std::filesystem::path& path);

/// Moment field per target bin on a cell grid, the common currency of the
/// snapshot files: rho and U per [bin][cell], with masked (empty) cells.
struct MomentField {
  double t = 0.0;
  Grid2D grid;
  int n_bins = 0;
  std::vector<double> rho;
  std::vector<Vec2> velocity;
  std::vector<unsigned char> mask;  ///< 1 where the estimator saw no mass

  MomentField() = default;
  MomentField(double time, Grid2D g, int bins)
      : t(time), grid(g), n_bins(bins), rho(static_cast<std::size_t>(bins) * g.cells(), 0.0),
        velocity(rho.size()), mask(rho.size(), 0) {}
  std::size_t index(int b, int cell) const { return static_cast<std::size_t>(b) * grid.cells() + cell; }
};

inline constexpr const char* kSnapshotHeader = "t,x,y,a_bin,rho,Ux,Uy";

/// Appends one snapshot (all bins and cells) in the `t,x,y,a_bin,rho,Ux,Uy`
/// layout, cells in index order within each bin.
void write_snapshot(std::ostream& out, const MomentField& m);

/// Reads a snapshot file back into one field per time stamp. The grid is
/// reconstructed from the cell centers; `lx`/`ly` follow from the spacing.
std::vector<MomentField> read_snapshots(const std::filesystem::path& path);

}  // namespace crowdscale::harness
