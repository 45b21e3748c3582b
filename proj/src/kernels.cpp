#include "crowdscale/kernels.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "crowdscale/circle.hpp"
#include "crowdscale/quadrature.hpp"
#include "crowdscale/specialmath.hpp"

namespace crowdscale {

namespace {

constexpr int kPanelNodes = 12;

// Integral of min(s / tau, 1/ell) over tau in [0, tau].
double inner_primitive(double tau, double s, double ell) {
  const double knee = ell * s;
  if (tau <= knee) return tau / ell;
  return s + s * std::log(tau / knee);
}

// Work in the frame where r = v - w points along +x. A point of the sector is
// xi = (t, p): t along r, p across it. Only t < 0 (closing) and |p| <= R
// (miss distance) contribute, with integrand min(s/|t|, 1/ell).
struct SectorFrame {
  double kappa;
  double delta;
  double s;
  double ell;
  double radius;
  Vec2 heading;            // u in frame coordinates
  std::array<Vec2, 2> rays;  // sector boundary rays
  bool full;               // kappa = -1: the whole disk
};

double chord_integral(const SectorFrame& f, double p) {
  const double t2 = f.delta * f.delta - p * p;
  if (t2 <= 0.0) return 0.0;
  const double reach = std::sqrt(t2);
  if (f.full) return inner_primitive(reach, f.s, f.ell);

  std::array<double, 4> cuts{};
  int n = 0;
  cuts[n++] = -reach;
  for (const Vec2& e : f.rays) {
    if (e.y == 0.0) continue;
    const double lambda = p / e.y;
    if (lambda <= 0.0) continue;
    const double t = lambda * e.x;
    if (t > -reach && t < 0.0) cuts[n++] = t;
  }
  cuts[n++] = 0.0;
  std::sort(cuts.begin(), cuts.begin() + n);

  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    const double ta = cuts[i];
    const double tb = cuts[i + 1];
    if (tb <= ta) continue;
    const double tm = 0.5 * (ta + tb);
    const double along = tm * f.heading.x + p * f.heading.y;
    if (along >= f.kappa * std::hypot(tm, p)) {
      sum += inner_primitive(-ta, f.s, f.ell) - inner_primitive(-tb, f.s, f.ell);
    }
  }
  return sum;
}

double sector_integral(const SectorFrame& f) {
  const double span = std::min(f.radius, f.delta);
  const double phi_max = std::asin(std::min(1.0, span / f.delta));
  std::vector<double> breaks{-phi_max, 0.0, phi_max};
  auto add_p = [&](double p) {
    if (std::abs(p) < span) breaks.push_back(std::asin(p / f.delta));
  };
  const double knee = f.ell * f.s;
  if (knee < f.delta) {
    const double pk = std::sqrt(f.delta * f.delta - knee * knee);
    add_p(pk);
    add_p(-pk);
  }
  if (!f.full) {
    for (const Vec2& e : f.rays) {
      add_p(f.delta * e.y);
      if (e.x < 0.0) {
        const double lambda = -knee / e.x;
        if (lambda <= f.delta) add_p(lambda * e.y);
      }
    }
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const QuadratureRule& g = gauss_legendre(kPanelNodes);
  double total = 0.0;
  for (size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (b <= a) continue;
    const double half = 0.5 * (b - a);
    for (int panel = 0; panel < 2; ++panel) {
      const double lo = a + panel * half;
      for (int q = 0; q < kPanelNodes; ++q) {
        const double phi = lo + 0.5 * half * (g.nodes[q] + 1.0);
        const double p = f.delta * std::sin(phi);
        total += 0.5 * half * g.weights[q] * chord_integral(f, p) * f.delta * std::cos(phi);
      }
    }
  }
  return total;
}

void check_kernel_args(double kappa, double delta, const CutoffParams& cut) {
  if (!(delta > 0.0)) throw std::domain_error("kernel: interaction radius must be positive");
  if (!(kappa >= -1.0 && kappa < 1.0)) throw std::domain_error("kernel: kappa must lie in [-1, 1)");
  if (!(cut.ell > 0.0 && cut.radius > 0.0)) throw std::domain_error("kernel: ell and R must be positive");
}

}  // namespace

double local_kernel_direct(double kappa, double delta, const CutoffParams& cut, double mu, double s) {
  check_kernel_args(kappa, delta, cut);
  if (s <= 0.0) return 0.0;
  mu = std::clamp(mu, -1.0, 1.0);
  // kappa = -1 deliberately goes through the general sector path; the
  // dedicated full-disk path below serves as its cross-check.
  SectorFrame f{kappa, delta, s, cut.ell, cut.radius, {mu, std::sqrt(1.0 - mu * mu)}, {}, false};
  const double half_angle = std::acos(kappa);
  f.rays = {rotate(f.heading, half_angle), rotate(f.heading, -half_angle)};
  return std::min(sector_integral(f) / (half_angle * delta * delta), 1.0 / cut.ell);
}

double iso_kernel_direct(double delta, const CutoffParams& cut, double s) {
  check_kernel_args(-1.0, delta, cut);
  if (s <= 0.0) return 0.0;
  SectorFrame f{-1.0, delta, s, cut.ell, cut.radius, {1.0, 0.0}, {}, true};
  return std::min(sector_integral(f) / (std::numbers::pi * delta * delta), 1.0 / cut.ell);
}

// ---------------------------------------------------------------- tables

KernelTable::KernelTable(double kappa, double delta, CutoffParams cut, int n_mu, int n_s,
                         std::vector<double> values)
    : kappa_(kappa), delta_(delta), cut_(cut), n_mu_(n_mu), n_s_(n_s), values_(std::move(values)) {
  if (n_mu_ < 2 || n_s_ < 2 || values_.size() != static_cast<size_t>(n_mu_) * n_s_) {
    throw std::invalid_argument("KernelTable: inconsistent grid");
  }
}

double KernelTable::eval(double mu, double s) const {
  if (!(s >= -1e-12 && s <= 2.0 + 1e-9)) throw std::out_of_range("kernel table: s outside [0, 2]");
  const double x = (std::clamp(mu, -1.0, 1.0) + 1.0) * 0.5 * (n_mu_ - 1);
  const double y = std::clamp(s, 0.0, 2.0) * 0.5 * (n_s_ - 1);
  const int i = std::min(static_cast<int>(x), n_mu_ - 2);
  const int j = std::min(static_cast<int>(y), n_s_ - 2);
  const double tx = x - i;
  const double ty = y - j;
  const double v = (1 - tx) * ((1 - ty) * node(i, j) + ty * node(i, j + 1)) +
                   tx * ((1 - ty) * node(i + 1, j) + ty * node(i + 1, j + 1));
  return std::clamp(v, 0.0, 1.0 / cut_.ell);
}

double KernelTable::eval(Vec2 heading, Vec2 rel) const {
  const double s = norm(rel);
  if (s == 0.0) return 0.0;
  return eval(dot(heading, rel) / s, s);
}

IsoKernelTable::IsoKernelTable(double delta, CutoffParams cut, std::vector<double> values)
    : delta_(delta), cut_(cut), values_(std::move(values)) {
  if (values_.size() < 2) throw std::invalid_argument("IsoKernelTable: need at least two nodes");
}

double IsoKernelTable::eval(double s) const {
  if (!(s >= -1e-12 && s <= 2.0 + 1e-9)) throw std::out_of_range("kernel table: s outside [0, 2]");
  const double y = std::clamp(s, 0.0, 2.0) * 0.5 * (n_s() - 1);
  const int j = std::min(static_cast<int>(y), n_s() - 2);
  const double t = y - j;
  return std::clamp((1 - t) * values_[j] + t * values_[j + 1], 0.0, 1.0 / cut_.ell);
}

double IsoKernelTable::eval(Vec2 rel) const { return eval(norm(rel)); }

KernelTable build_kernel_table(double kappa, double delta, const CutoffParams& cut, int resolution) {
  if (resolution < 2) throw std::invalid_argument("build_kernel_table: resolution must be >= 2");
  check_kernel_args(kappa, delta, cut);
  const int n = resolution;
  std::vector<double> values(static_cast<size_t>(n) * n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n; ++i) {
    const double mu = -1.0 + 2.0 * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      values[static_cast<size_t>(i) * n + j] = local_kernel_direct(kappa, delta, cut, mu, 2.0 * j / (n - 1));
    }
  }
  return KernelTable(kappa, delta, cut, n, n, std::move(values));
}

IsoKernelTable build_iso_kernel(double delta, const CutoffParams& cut, int resolution) {
  if (resolution < 2) throw std::invalid_argument("build_iso_kernel: resolution must be >= 2");
  check_kernel_args(-1.0, delta, cut);
  std::vector<double> values(resolution);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < resolution; ++j) {
    values[j] = iso_kernel_direct(delta, cut, 2.0 * j / (resolution - 1));
  }
  return IsoKernelTable(delta, cut, std::move(values));
}

// ------------------------------------------------------------ VMF tables

VmfKernelTable::VmfKernelTable(bool isotropic, double kappa, double delta, CutoffParams cut, int n_w,
                               int n_omega, std::vector<double> betas, std::vector<double> values)
    : isotropic_(isotropic),
      kappa_(kappa),
      delta_(delta),
      cut_(cut),
      n_w_(n_w),
      n_omega_(n_omega),
      betas_(std::move(betas)),
      values_(std::move(values)) {
  if (n_w_ < 2 || n_omega_ < 1 || betas_.empty() ||
      values_.size() != static_cast<size_t>(n_w_) * n_omega_ * betas_.size()) {
    throw std::invalid_argument("VmfKernelTable: inconsistent grid");
  }
}

double VmfKernelTable::w_angle_at(int i) const { return std::numbers::pi * i / (n_w_ - 1); }

double VmfKernelTable::omega_angle_at(int j) const {
  return -std::numbers::pi + 2.0 * std::numbers::pi * j / (n_omega_ - 1);
}

double VmfKernelTable::interp_beta(size_t, double beta, int* lo, double* t) const {
  const int nb = static_cast<int>(betas_.size());
  if (nb == 1 || beta <= betas_.front()) {
    *lo = 0;
    *t = 0.0;
    return 0.0;
  }
  if (beta >= betas_.back()) {
    *lo = nb - 2;
    *t = 1.0;
    return 0.0;
  }
  const auto it = std::upper_bound(betas_.begin(), betas_.end(), beta);
  *lo = static_cast<int>(it - betas_.begin()) - 1;
  *t = (beta - betas_[*lo]) / (betas_[*lo + 1] - betas_[*lo]);
  return 0.0;
}

VmfKernelTable::BetaBracket VmfKernelTable::beta_bracket(double beta) const {
  BetaBracket b;
  interp_beta(0, beta, &b.lo, &b.t);
  return b;
}

double VmfKernelTable::eval_iso(double psi, const BetaBracket& bb) const {
  psi = std::abs(std::abs(psi) <= std::numbers::pi ? psi : wrap_angle(psi));
  const double x = psi / std::numbers::pi * (n_w_ - 1);
  const int i = std::min(static_cast<int>(x), n_w_ - 2);
  const double tx = x - i;
  const int b = bb.lo;
  const double tb = bb.t;
  const int b1 = std::min(b + 1, static_cast<int>(betas_.size()) - 1);
  const double v0 = (1 - tb) * node(i, 0, b) + tb * node(i, 0, b1);
  const double v1 = (1 - tb) * node(i + 1, 0, b) + tb * node(i + 1, 0, b1);
  return std::clamp((1 - tx) * v0 + tx * v1, 0.0, 1.0 / cut_.ell);
}

double VmfKernelTable::eval_sector(double psi_w, double psi_omega, double beta) const {
  psi_w = wrap_angle(psi_w);
  psi_omega = wrap_angle(psi_omega);
  if (psi_w < 0.0) {  // mirror symmetry across the heading
    psi_w = -psi_w;
    psi_omega = -psi_omega;
  }
  const double x = psi_w / std::numbers::pi * (n_w_ - 1);
  const int i = std::min(static_cast<int>(x), n_w_ - 2);
  const double tx = x - i;
  const double y = (psi_omega + std::numbers::pi) / (2.0 * std::numbers::pi) * (n_omega_ - 1);
  const int j = std::clamp(static_cast<int>(y), 0, n_omega_ - 2);
  const double ty = std::clamp(y - j, 0.0, 1.0);
  int b = 0;
  double tb = 0.0;
  interp_beta(0, beta, &b, &tb);
  const int b1 = std::min(b + 1, static_cast<int>(betas_.size()) - 1);
  auto at = [&](int ii, int jj) { return (1 - tb) * node(ii, jj, b) + tb * node(ii, jj, b1); };
  const double v = (1 - tx) * ((1 - ty) * at(i, j) + ty * at(i, j + 1)) +
                   tx * ((1 - ty) * at(i + 1, j) + ty * at(i + 1, j + 1));
  return std::clamp(v, 0.0, 1.0 / cut_.ell);
}

double VmfKernelTable::eval(Vec2 heading, Vec2 w, Vec2 mean) const {
  const double m = norm(mean);
  const double beta = m >= 1.0 ? betas_.back() : beta_of_speed(m);
  const double mean_angle = m > 0.0 ? angle_of(mean) : 0.0;
  if (isotropic_) return eval_iso(angle_of(w) - mean_angle, beta);
  const double hu = angle_of(heading);
  return eval_sector(angle_of(w) - hu, mean_angle - hu, beta);
}

std::vector<double> default_beta_grid(double beta_max, int count) {
  std::vector<double> out{0.0};
  const double lo = 0.05;
  for (int i = 0; i < count - 1; ++i) {
    out.push_back(lo * std::pow(beta_max / lo, static_cast<double>(i) / (count - 2)));
  }
  return out;
}

namespace {

// Quadrature over the offset phi = angle(v) - angle(w) on (0, pi], refined
// toward phi = 0 where the kernel behaves like s log s.
QuadratureRule half_circle_rule() {
  QuadratureRule r = graded_gauss(std::numbers::pi / 8.0, 16, 0.3, kPanelNodes);
  const QuadratureRule outer = composite_gauss(std::numbers::pi / 8.0, std::numbers::pi, 8, kPanelNodes);
  r.nodes.insert(r.nodes.end(), outer.nodes.begin(), outer.nodes.end());
  r.weights.insert(r.weights.end(), outer.weights.begin(), outer.weights.end());
  return r;
}

// Same over the full turn (0, 2 pi), refined at both ends.
QuadratureRule full_circle_rule() {
  const QuadratureRule half = half_circle_rule();
  QuadratureRule r = half;
  for (size_t q = 0; q < half.nodes.size(); ++q) {
    r.nodes.push_back(2.0 * std::numbers::pi - half.nodes[q]);
    r.weights.push_back(half.weights[q]);
  }
  return r;
}

double vmf_norm(double beta) { return 1.0 / (2.0 * std::numbers::pi * bessel_i_scaled(0, beta)); }

}  // namespace

VmfKernelTable build_vmf_kernel(const IsoKernelTable& base, const std::vector<double>& betas, int n_psi) {
  if (n_psi < 2) throw std::invalid_argument("build_vmf_kernel: need at least two angle nodes");
  const QuadratureRule rule = half_circle_rule();
  const int nq = static_cast<int>(rule.nodes.size());
  std::vector<double> kq(nq);
  for (int q = 0; q < nq; ++q) {
    kq[q] = iso_kernel_direct(base.delta(), base.cut(), 2.0 * std::sin(0.5 * rule.nodes[q]));
  }
  const int nb = static_cast<int>(betas.size());
  std::vector<double> values(static_cast<size_t>(n_psi) * nb);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_psi; ++i) {
    const double psi = std::numbers::pi * i / (n_psi - 1);
    for (int b = 0; b < nb; ++b) {
      const double beta = betas[b];
      double sum = 0.0;
      for (int q = 0; q < nq; ++q) {
        const double phi = rule.nodes[q];
        sum += rule.weights[q] * kq[q] *
               (std::exp(beta * (std::cos(psi + phi) - 1.0)) + std::exp(beta * (std::cos(psi - phi) - 1.0)));
      }
      values[static_cast<size_t>(i) * nb + b] = sum * vmf_norm(beta);
    }
  }
  return VmfKernelTable(true, -1.0, base.delta(), base.cut(), n_psi, 1, betas, std::move(values));
}

VmfKernelTable build_vmf_kernel(const KernelTable& base, const std::vector<double>& betas, int n_w,
                                int n_omega) {
  if (n_w < 2 || n_omega < 2) throw std::invalid_argument("build_vmf_kernel: need at least two nodes per angle");
  const QuadratureRule rule = full_circle_rule();
  const int nq = static_cast<int>(rule.nodes.size());
  const int nb = static_cast<int>(betas.size());
  std::vector<double> values(static_cast<size_t>(n_w) * n_omega * nb);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n_w; ++i) {
    const double psi_w = std::numbers::pi * i / (n_w - 1);
    std::vector<double> kq(nq);
    for (int q = 0; q < nq; ++q) {
      const double phi = rule.nodes[q];
      kq[q] = local_kernel_direct(base.kappa(), base.delta(), base.cut(), -std::sin(psi_w + 0.5 * phi),
                                  2.0 * std::sin(0.5 * phi));
    }
    for (int j = 0; j < n_omega; ++j) {
      const double psi_o = -std::numbers::pi + 2.0 * std::numbers::pi * j / (n_omega - 1);
      for (int b = 0; b < nb; ++b) {
        const double beta = betas[b];
        double sum = 0.0;
        for (int q = 0; q < nq; ++q) {
          sum += rule.weights[q] * kq[q] * std::exp(beta * (std::cos(psi_w + rule.nodes[q] - psi_o) - 1.0));
        }
        values[(static_cast<size_t>(i) * n_omega + j) * nb + b] = sum * vmf_norm(beta);
      }
    }
  }
  return VmfKernelTable(false, base.kappa(), base.delta(), base.cut(), n_w, n_omega, betas, std::move(values));
}

// -------------------------------------------------------------- families

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0 && hi >= lo) || count < 1) throw std::invalid_argument("log_spaced: bad range");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  }
  return out;
}

IsoKernelFamily build_iso_family(const CutoffParams& cut, double delta_min, double delta_max, int count,
                                 int resolution) {
  std::vector<double> deltas = log_spaced(delta_min, delta_max, count);
  std::vector<IsoKernelTable> tables;
  tables.reserve(deltas.size());
  for (double d : deltas) tables.push_back(build_iso_kernel(d, cut, resolution));
  return {std::move(deltas), std::move(tables)};
}

SectorKernelFamily build_sector_family(double kappa, const CutoffParams& cut, double delta_min,
                                       double delta_max, int count, int resolution) {
  std::vector<double> deltas = log_spaced(delta_min, delta_max, count);
  std::vector<KernelTable> tables;
  tables.reserve(deltas.size());
  for (double d : deltas) tables.push_back(build_kernel_table(kappa, d, cut, resolution));
  return {std::move(deltas), std::move(tables)};
}

VmfKernelFamily build_vmf_iso_family(const IsoKernelFamily& base, const std::vector<double>& betas,
                                     int n_psi) {
  std::vector<VmfKernelTable> tables;
  tables.reserve(base.tables().size());
  for (const auto& t : base.tables()) tables.push_back(build_vmf_kernel(t, betas, n_psi));
  return {base.deltas(), std::move(tables)};
}

// --------------------------------------------------------- serialization

static_assert(std::endian::native == std::endian::little, "table files assume a little-endian host");

namespace {

constexpr char kMagic[5] = {'K', 'T', 'A', 'B', '1'};

template <class T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("read_ktab: truncated file");
  return v;
}

}  // namespace

KtabData to_ktab(const KernelTable& t) {
  return {t.kappa(), t.delta(), t.cut(), static_cast<std::uint64_t>(t.n_mu()),
          static_cast<std::uint64_t>(t.n_s()), t.values()};
}

KtabData to_ktab(const IsoKernelTable& t) {
  return {-1.0, t.delta(), t.cut(), 1, static_cast<std::uint64_t>(t.n_s()), t.values()};
}

KernelTable kernel_table_from(const KtabData& d) {
  return KernelTable(d.kappa, d.delta, d.cut, static_cast<int>(d.n_mu), static_cast<int>(d.n_s), d.values);
}

IsoKernelTable iso_table_from(const KtabData& d) {
  if (d.n_mu != 1) throw std::invalid_argument("iso_table_from: file holds a sector table");
  return IsoKernelTable(d.delta, d.cut, d.values);
}

void write_ktab(const std::filesystem::path& path, const KtabData& d) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_ktab: cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  put(out, d.kappa);
  put(out, d.delta);
  put(out, d.cut.ell);
  put(out, d.cut.big_l);
  put(out, d.cut.radius);
  put(out, d.n_mu);
  put(out, d.n_s);
  out.write(reinterpret_cast<const char*>(d.values.data()),
            static_cast<std::streamsize>(d.values.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write_ktab: write failed for " + path.string());
}

KtabData read_ktab(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_ktab: cannot open " + path.string());
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kMagic, 5) != 0) throw std::runtime_error("read_ktab: bad magic");
  KtabData d;
  d.kappa = get<double>(in);
  d.delta = get<double>(in);
  d.cut.ell = get<double>(in);
  d.cut.big_l = get<double>(in);
  d.cut.radius = get<double>(in);
  d.n_mu = get<std::uint64_t>(in);
  d.n_s = get<std::uint64_t>(in);
  if (d.n_mu == 0 || d.n_s == 0 || d.n_mu * d.n_s > (1ull << 32)) throw std::runtime_error("read_ktab: bad grid size");
  d.values.resize(d.n_mu * d.n_s);
  in.read(reinterpret_cast<char*>(d.values.data()), static_cast<std::streamsize>(d.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("read_ktab: truncated values");
  return d;
}

void write_ktab_manifest(const std::filesystem::path& manifest_path, const KtabData& d, const std::string& name) {
  nlohmann::ordered_json j;
  j["format"] = "KTAB1";
  j["name"] = name;
  j["kappa"] = d.kappa;
  j["delta"] = d.delta;
  j["ell"] = d.cut.ell;
  j["big_l"] = d.cut.big_l;
  j["radius"] = d.cut.radius;
  j["n_mu"] = d.n_mu;
  j["n_s"] = d.n_s;
  j["mu_range"] = {-1.0, 1.0};
  j["s_range"] = {0.0, 2.0};
  j["layout"] = "row-major, mu outer, s inner, little-endian f64";
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_ktab_manifest: cannot open " + manifest_path.string());
  out << j.dump(2) << '\n';
}

KtabData read_ktab_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("read_ktab_manifest: cannot open " + manifest_path.string());
  const auto j = nlohmann::json::parse(in);
  KtabData d;
  d.kappa = j.at("kappa").get<double>();
  d.delta = j.at("delta").get<double>();
  d.cut.ell = j.at("ell").get<double>();
  d.cut.big_l = j.at("big_l").get<double>();
  d.cut.radius = j.at("radius").get<double>();
  d.n_mu = j.at("n_mu").get<std::uint64_t>();
  d.n_s = j.at("n_s").get<std::uint64_t>();
  return d;
}

std::filesystem::path table_cache_dir() {
  if (const char* env = std::getenv("CROWDSCALE_TABLE_DIR"); env != nullptr && *env != '\0') return env;
  return "tables";
}

}  // namespace crowdscale
