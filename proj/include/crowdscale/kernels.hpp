#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crowdscale/params.hpp"
#include "crowdscale/vec2.hpp"

namespace crowdscale {

/// Average of the elementary inverse DTI over the vision sector of radius
/// `delta`, for heading u and relative velocity r = v - w, expressed through
/// mu = u.r/|r| and s = |r|. Evaluated semi-analytically: the integral along
/// r is closed form, the transverse integral uses Gauss-Legendre panels
/// split at every kink of the integrand. Requires kappa < 1.
double local_kernel_direct(double kappa, double delta, const CutoffParams& cut, double mu,
                           double s);

/// Full-disk specialisation (kappa = -1), a function of s = |v - w| only.
double iso_kernel_direct(double delta, const CutoffParams& cut, double s);

/// Tabulated local kernel on mu in [-1, 1] x s in [0, 2], row-major in mu.
class KernelTable {
 public:
  KernelTable() = default;
  KernelTable(double kappa, double delta, CutoffParams cut, int n_mu, int n_s,
              std::vector<double> values);

  double kappa() const { return kappa_; }
  double delta() const { return delta_; }
  const CutoffParams& cut() const { return cut_; }
  int n_mu() const { return n_mu_; }
  int n_s() const { return n_s_; }
  double mu_at(int i) const { return -1.0 + 2.0 * i / (n_mu_ - 1); }
  double s_at(int j) const { return 2.0 * j / (n_s_ - 1); }
  double node(int i, int j) const { return values_[static_cast<size_t>(i) * n_s_ + j]; }
  const std::vector<double>& values() const { return values_; }

  /// Bilinear interpolation clamped to [0, 1/ell]; throws std::out_of_range
  /// for s outside [0, 2].
  double eval(double mu, double s) const;
  /// Evaluation from a heading and a relative velocity vector.
  double eval(Vec2 heading, Vec2 rel) const;

 private:
  double kappa_ = 0.0;
  double delta_ = 1.0;
  CutoffParams cut_;
  int n_mu_ = 0;
  int n_s_ = 0;
  std::vector<double> values_;
};

/// Tabulated full-disk kernel on s in [0, 2].
class IsoKernelTable {
 public:
  IsoKernelTable() = default;
  IsoKernelTable(double delta, CutoffParams cut, std::vector<double> values);

  double delta() const { return delta_; }
  const CutoffParams& cut() const { return cut_; }
  int n_s() const { return static_cast<int>(values_.size()); }
  double s_at(int j) const { return 2.0 * j / (n_s() - 1); }
  const std::vector<double>& values() const { return values_; }

  double eval(double s) const;
  double eval(Vec2 rel) const;

 private:
  double delta_ = 1.0;
  CutoffParams cut_;
  std::vector<double> values_;
};

KernelTable build_kernel_table(double kappa, double delta, const CutoffParams& cut, int resolution);
IsoKernelTable build_iso_kernel(double delta, const CutoffParams& cut, int resolution);

/// VMF-averaged kernel. The isotropic variant is tabulated on
/// (psi = angle between w and the mean direction, in [0, pi]) x beta; the
/// sector variant on (angle of w from u in [0, pi]) x (angle of the mean
/// direction from u in [-pi, pi]) x beta.
class VmfKernelTable {
 public:
  VmfKernelTable() = default;
  VmfKernelTable(bool isotropic, double kappa, double delta, CutoffParams cut, int n_w, int n_omega,
                 std::vector<double> betas, std::vector<double> values);

  bool isotropic() const { return isotropic_; }
  double kappa() const { return kappa_; }
  double delta() const { return delta_; }
  const CutoffParams& cut() const { return cut_; }
  const std::vector<double>& betas() const { return betas_; }
  int n_w() const { return n_w_; }
  int n_omega() const { return n_omega_; }
  double w_angle_at(int i) const;
  double omega_angle_at(int j) const;
  double node(int i, int j, int b) const {
    return values_[(static_cast<size_t>(i) * n_omega_ + j) * betas_.size() + b];
  }

  /// Isotropic lookup by relative angle and concentration.
  /// Position of a concentration on the beta grid, reusable across lookups.
  struct BetaBracket {
    int lo = 0;
    double t = 0.0;
  };
  BetaBracket beta_bracket(double beta) const;

  double eval_iso(double psi, double beta) const { return eval_iso(psi, beta_bracket(beta)); }
  double eval_iso(double psi, const BetaBracket& b) const;
  double eval(double psi, double beta) const { return eval_iso(psi, beta); }
  double eval(double psi, const BetaBracket& b) const { return eval_iso(psi, b); }
  /// Sector lookup by the two relative angles and concentration.
  double eval_sector(double psi_w, double psi_omega, double beta) const;
  /// Lookup from vectors; |mean| < 1 is converted to a concentration.
  double eval(Vec2 heading, Vec2 w, Vec2 mean) const;

 private:
  double interp_beta(size_t base_index, double beta, int* lo, double* t) const;
  bool isotropic_ = true;
  double kappa_ = -1.0;
  double delta_ = 1.0;
  CutoffParams cut_;
  int n_w_ = 0;
  int n_omega_ = 1;
  std::vector<double> betas_;
  std::vector<double> values_;
};

/// Default concentration grid: 0 followed by geometric nodes up to beta_max.
std::vector<double> default_beta_grid(double beta_max = 400.0, int count = 48);

/// Tabulates the VMF average of the base kernel. The base supplies the
/// geometric parameters; base values at the quadrature nodes are evaluated
/// directly so no interpolation error from the base grid enters the average.
VmfKernelTable build_vmf_kernel(const IsoKernelTable& base, const std::vector<double>& betas,
                                int n_psi = 129);
VmfKernelTable build_vmf_kernel(const KernelTable& base, const std::vector<double>& betas,
                                int n_w = 33, int n_omega = 64);

/// Kernel tables over log-spaced interaction radii. Values are interpolated
/// as delta^2 * K linearly in log(delta), which is exact in the large-radius
/// regime; delta is clamped to the covered range.
template <class Table>
class KernelFamily {
 public:
  KernelFamily() = default;
  KernelFamily(std::vector<double> deltas, std::vector<Table> tables)
      : deltas_(std::move(deltas)), tables_(std::move(tables)) {}

  const std::vector<double>& deltas() const { return deltas_; }
  const std::vector<Table>& tables() const { return tables_; }
  double min_delta() const { return deltas_.front(); }
  double max_delta() const { return deltas_.back(); }

  /// Bracketing index and weight of the upper table for a given radius.
  struct Bracket {
    int lo = 0;
    double weight = 0.0;
    double delta = 0.0;
  };
  Bracket bracket(double delta) const {
    Bracket b;
    b.delta = std::clamp(delta, deltas_.front(), deltas_.back());
    const auto it = std::upper_bound(deltas_.begin(), deltas_.end(), b.delta);
    b.lo = static_cast<int>(it - deltas_.begin()) - 1;
    if (b.lo >= static_cast<int>(deltas_.size()) - 1) {
      b.lo = static_cast<int>(deltas_.size()) - 1;
      return b;
    }
    b.weight = std::log(b.delta / deltas_[b.lo]) / std::log(deltas_[b.lo + 1] / deltas_[b.lo]);
    return b;
  }

  template <class... Args>
  double eval(double delta, Args&&... args) const {
    return eval(bracket(delta), args...);
  }

  /// Evaluation with a precomputed bracket, for many lookups at one radius.
  template <class... Args>
  double eval(const Bracket& b, Args&&... args) const {
    const double d0 = deltas_[b.lo];
    const double v0 = d0 * d0 * tables_[b.lo].eval(args...);
    if (b.weight == 0.0) return v0 / (b.delta * b.delta);
    const double d1 = deltas_[b.lo + 1];
    const double v1 = d1 * d1 * tables_[b.lo + 1].eval(args...);
    return ((1.0 - b.weight) * v0 + b.weight * v1) / (b.delta * b.delta);
  }

 private:
  std::vector<double> deltas_;
  std::vector<Table> tables_;
};

using IsoKernelFamily = KernelFamily<IsoKernelTable>;
using SectorKernelFamily = KernelFamily<KernelTable>;
using VmfKernelFamily = KernelFamily<VmfKernelTable>;

std::vector<double> log_spaced(double lo, double hi, int count);

IsoKernelFamily build_iso_family(const CutoffParams& cut, double delta_min, double delta_max,
                                 int count = 24, int resolution = 257);
SectorKernelFamily build_sector_family(double kappa, const CutoffParams& cut, double delta_min,
                                       double delta_max, int count = 16, int resolution = 65);
VmfKernelFamily build_vmf_iso_family(const IsoKernelFamily& base, const std::vector<double>& betas,
                                     int n_psi = 65);

/// Contents of a table file: magic "KTAB1", then kappa, delta, ell, L, R as
/// little-endian f64, n_mu and n_s as little-endian u64, then n_mu * n_s
/// row-major f64 values. An isotropic table is stored with kappa = -1, n_mu = 1.
struct KtabData {
  double kappa = -1.0;
  double delta = 1.0;
  CutoffParams cut;
  std::uint64_t n_mu = 1;
  std::uint64_t n_s = 0;
  std::vector<double> values;
};

KtabData to_ktab(const KernelTable& table);
KtabData to_ktab(const IsoKernelTable& table);
KernelTable kernel_table_from(const KtabData& data);
IsoKernelTable iso_table_from(const KtabData& data);

void write_ktab(const std::filesystem::path& path, const KtabData& data);
KtabData read_ktab(const std::filesystem::path& path);
/// Text manifest carrying the same metadata as the binary header.
void write_ktab_manifest(const std::filesystem::path& manifest_path, const KtabData& data,
                         const std::string& name);
KtabData read_ktab_manifest(const std::filesystem::path& manifest_path);

/// Cache directory for table files: CROWDSCALE_TABLE_DIR or "./tables".
std::filesystem::path table_cache_dir();

}  // namespace crowdscale
