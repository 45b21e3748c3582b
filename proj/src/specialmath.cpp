#include "crowdscale/specialmath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace crowdscale {

namespace {

// Below this argument the all-positive power series is used; above it the
// asymptotic expansion reaches its optimal truncation well under 1e-16.
constexpr double kSeriesLimit = 30.0;
constexpr double kOverflowLimit = 700.0;

double series_scaled(int k, double x) {
  const double half = 0.5 * x;
  double term = 1.0;
  for (int j = 1; j <= k; ++j) term *= half / j;
  double sum = term;
  const double q = half * half;
  for (int m = 1; m < 500; ++m) {
    term *= q / (static_cast<double>(m) * (m + k));
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return sum * std::exp(-x);
}

double asymptotic_scaled(int k, double x) {
  const double mu = 4.0 * k * k;
  double term = 1.0;
  double sum = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int m = 1; m < 200; ++m) {
    const double odd = 2.0 * m - 1.0;
    term *= -(mu - odd * odd) / (8.0 * m * x);
    const double mag = std::abs(term);
    if (mag > prev) break;  // past the optimal truncation point
    sum += term;
    prev = mag;
    if (mag < 1e-17 * std::abs(sum)) break;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

void check_order(int k) {
  if (k < 0 || k > 2) throw std::domain_error("bessel_i: order must be 0, 1 or 2");
}

}  // namespace

double bessel_i_scaled(int k, double x) {
  check_order(k);
  if (!(x >= 0.0)) throw std::domain_error("bessel_i: argument must be non-negative");
  if (x == 0.0) return k == 0 ? 1.0 : 0.0;
  return x <= kSeriesLimit ? series_scaled(k, x) : asymptotic_scaled(k, x);
}

double bessel_i(int k, double x) {
  check_order(k);
  if (x > kOverflowLimit) throw std::overflow_error("bessel_i: argument above 700 overflows");
  return bessel_i_scaled(k, x) * std::exp(x);
}

double order_parameter(double beta) {
  if (!(beta >= 0.0)) throw std::domain_error("order_parameter: beta must be non-negative");
  if (beta == 0.0) return 0.0;
  return bessel_i_scaled(1, beta) / bessel_i_scaled(0, beta);
}

double beta_of_speed(double u_norm) {
  if (!(u_norm >= 0.0)) throw std::domain_error("beta_of_speed: speed must be non-negative");
  if (u_norm >= 1.0) throw std::domain_error("order parameter must be < 1");
  if (u_norm == 0.0) return 0.0;
  // Piecewise starting guess, then Newton on A(beta) = u with
  // A' = 1 - A / beta - A^2, safeguarded by the bracket A is monotone on.
  const double u = u_norm;
  double x = u < 0.53 ? 2.0 * u + u * u * u + 5.0 * std::pow(u, 5) / 6.0
             : u < 0.85 ? -0.4 + 1.39 * u + 0.43 / (1.0 - u)
                        : 1.0 / (u * u * u - 4.0 * u * u + 3.0 * u);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200; ++it) {
    const double a = order_parameter(x);
    const double f = a - u;
    if (f == 0.0) return x;
    if (f < 0.0) lo = std::max(lo, x);
    else hi = std::min(hi, x);
    const double slope = 1.0 - a / x - a * a;
    double next = x - f / slope;
    if (!(next > lo && next < hi) || !(slope > 0.0)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : 2.0 * x;
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x) return next;
    x = next;
  }
  return x;
}

double second_harmonic_ratio(double u_norm) {
  const double beta = beta_of_speed(u_norm);
  if (beta == 0.0) return 0.0;
  return bessel_i_scaled(2, beta) / bessel_i_scaled(0, beta);
}

GammaCoefficients gamma_coefficients(double u_norm) {
  if (!(u_norm > 0.0)) throw std::domain_error("gamma_coefficients: |U| = 0 has no defined direction");
  const double g = second_harmonic_ratio(u_norm);
  const double inv = 1.0 / (2.0 * u_norm * u_norm);
  return {(1.0 + g) * inv, (1.0 - g) * inv};
}

double vmf_density(Vec2 u, const VmfParams& p) {
  return std::exp(p.beta * (dot(u, p.omega) - 1.0)) /
         (2.0 * std::numbers::pi * bessel_i_scaled(0, p.beta));
}

std::vector<double> vmf_samples(const AngleGrid& grid, const VmfParams& p) {
  std::vector<double> out(grid.size());
  const double norm = 1.0 / (2.0 * std::numbers::pi * bessel_i_scaled(0, p.beta));
  for (int i = 0; i < grid.size(); ++i) {
    out[i] = std::exp(p.beta * (dot(grid.unit(i), p.omega) - 1.0)) * norm;
  }
  return out;
}

LteProfile lte_from_dti(std::span<const double> dti, const AngleGrid& grid, Vec2 target, double k,
                        double big_l, double d_noise) {
  std::vector<Vec2> units(grid.size());
  for (int i = 0; i < grid.size(); ++i) units[i] = grid.unit(i);
  return lte_from_dti(dti, grid, units, target, k, big_l, d_noise);
}

LteProfile lte_from_dti(std::span<const double> dti, const AngleGrid& grid, std::span<const Vec2> units,
                        Vec2 target, double k, double big_l, double d_noise) {
  if (static_cast<int>(dti.size()) != grid.size() || static_cast<int>(units.size()) != grid.size()) {
    throw std::invalid_argument("lte_from_dti: profile size does not match the angle grid");
  }
  LteProfile out{grid, std::vector<double>(grid.size()), std::vector<double>(grid.size())};
  double pmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(dti[i])) throw std::domain_error("lte_from_dti: non-finite DTI sample");
    const Vec2 r = dti[i] * units[i] - big_l * target;
    out.potential[i] = 0.5 * k * norm2(r) / d_noise;
    pmin = std::min(pmin, out.potential[i]);
  }
  double z = 0.0;
  for (int i = 0; i < grid.size(); ++i) {
    out.values[i] = std::exp(-(out.potential[i] - pmin));
    z += out.values[i];
  }
  z *= grid.step();
  for (double& v : out.values) v /= z;
  return out;
}

HarmonicRatioTable::HarmonicRatioTable() {
  constexpr int n = 4096;
  step_ = 1.0 / n;
  nodes_.resize(n + 1);
  nodes_[0] = 0.5;
  for (int i = 1; i < n; ++i) {
    const double u = i * step_;
    nodes_[i] = second_harmonic_ratio(u) / (u * u);
  }
  nodes_[n] = 1.0;
}

const HarmonicRatioTable& HarmonicRatioTable::instance() {
  static const HarmonicRatioTable table;
  return table;
}

double HarmonicRatioTable::scaled(double u_norm) const {
  const int n = static_cast<int>(nodes_.size()) - 1;
  const double pos = std::clamp(u_norm, 0.0, 1.0) / step_;
  const int i = std::min(static_cast<int>(pos), n - 1);
  const double t = pos - i;
  // Catmull-Rom on the interior, linear in the first and last interval.
  if (i == 0 || i == n - 1) return nodes_[i] + t * (nodes_[i + 1] - nodes_[i]);
  const double p0 = nodes_[i - 1], p1 = nodes_[i], p2 = nodes_[i + 1], p3 = nodes_[i + 2];
  return p1 + 0.5 * t * (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + t * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace crowdscale
