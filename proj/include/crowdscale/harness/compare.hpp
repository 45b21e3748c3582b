#pragma once

#include <filesystem>
#include <limits>
#include <ostream>
#include <vector>

#include "crowdscale/harness/io.hpp"
#include "crowdscale/ibm.hpp"

namespace crowdscale::harness {

/// How walkers are histogrammed: the cell grid, the target directions that
/// define the bins, and the time window. With `pool` set, every time stamp
/// in the window (and every run) is merged into one field stamped t_max.
struct BinningSpec {
  Grid2D grid;
  std::vector<double> target_angles;
  double t_min = -std::numeric_limits<double>::infinity();
  double t_max = std::numeric_limits<double>::infinity();
  bool pool = false;
};

/// Empirical density (walkers per unit area per sample) and mean heading
/// per cell and target bin. Runs are merged per time stamp; empty cells
/// are masked. Throws std::invalid_argument when no file is given.
std::vector<MomentField> ibm_ensemble_moments(const std::vector<std::filesystem::path>& files,
                                              const BinningSpec& spec);

/// The same estimator for an in-memory crowd snapshot.
MomentField crowd_moments(const Crowd& crowd, double t, const BinningSpec& spec);

struct ComparisonRow {
  double t = 0.0;
  double t_other = 0.0;   ///< time stamp used from the second run
  bool resampled = false; ///< nearest-time match instead of an exact one
  int bin = 0;
  double l1_rho = 0.0;
  double linf_rho = 0.0;
  double l1_momentum = 0.0;
  double linf_momentum = 0.0;
};

/// Mass ledger entry of one run: first and last mass per bin.
struct MassLedger {
  std::vector<double> first;
  std::vector<double> last;
  double max_relative_drift() const;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  /// |sum rho U| / sum rho per time of each run, over all bins.
  std::vector<std::vector<double>> order_parameters;
  std::vector<MassLedger> ledgers;

  double max_l1_rho() const;
  void write_csv(std::ostream& out) const;
  void write_summary(std::ostream& out) const;
};

/// Distances between the first run and each other run. Times are matched
/// exactly or, failing that, by the nearest stamp (flagged). Throws
/// std::invalid_argument on fewer than two runs or mismatched grids or bins.
ComparisonReport compare(const std::vector<std::vector<MomentField>>& runs);

}  // namespace crowdscale::harness
