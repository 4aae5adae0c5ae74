#include "crofton/zonoid.hpp"

#include "crofton/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace crofton {

namespace {
double legendre(int n, double t) {
  if (n == 0) return 1.0;
  double p0 = 1.0;
  double p1 = t;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}
}  // namespace

MultiplierTable::MultiplierTable(int band_limit) {
  if (band_limit < 0) throw std::invalid_argument("MultiplierTable: band limit must be >= 0");
  values_.assign(static_cast<std::size_t>(band_limit) + 1, 0.0);
  for (int n = 0; n <= band_limit; n += 2) {
    // t P_n(t) on [0, 1] is a polynomial of degree n + 1; the rule is exact.
    const GaussLegendre gl = gauss_legendre(n / 2 + 2, 0.0, 1.0);
    double half = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) half += gl.weights[i] * gl.nodes[i] * legendre(n, gl.nodes[i]);
    values_[static_cast<std::size_t>(n)] = 4.0 * std::numbers::pi * half;
  }
}

const MultiplierTable& multipliers(int band_limit) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const MultiplierTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[band_limit];
  if (!slot) slot = std::make_unique<const MultiplierTable>(band_limit);
  return *slot;
}

OddPartTooLarge::OddPartTooLarge(double odd_energy, double tolerance)
    : std::runtime_error("odd part too large: odd energy fraction " + std::to_string(odd_energy) +
                         " exceeds tolerance " + std::to_string(tolerance)),
      odd_energy_(odd_energy) {}

DegreeCapExceeded::DegreeCapExceeded(int requested, int effective)
    : std::runtime_error("multipliers underflow before band limit " + std::to_string(requested) +
                         "; effective band limit " + std::to_string(effective)),
      effective_(effective) {}

Eigen::VectorXd zonoid_invert_coefficients(const Eigen::VectorXd& metric_coeffs, int band_limit,
                                           double odd_tolerance) {
  const int available = band_limit_of(metric_coeffs);
  if (band_limit > available) {
    throw std::invalid_argument("zonoid_invert: band limit exceeds that of the metric samples");
  }
  const double odd = odd_energy_fraction(metric_coeffs);
  if (odd > odd_tolerance) throw OddPartTooLarge(odd, odd_tolerance);

  const MultiplierTable& lambda = multipliers(band_limit);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(harmonic_count(band_limit));
  for (int n = 0; n <= band_limit; n += 2) {
    if (std::abs(lambda[n]) < 1e-10 * lambda[0]) throw DegreeCapExceeded(band_limit, n - 2);
    for (int m = -n; m <= n; ++m) {
      const int k = harmonic_index(n, m);
      out[k] = metric_coeffs[k] / lambda[n];
    }
  }
  return out;
}

SphericalFunction zonoid_invert(const SphericalFunction& metric, int band_limit, double odd_tolerance) {
  Eigen::VectorXd coeffs = zonoid_invert_coefficients(metric.coefficients(), band_limit, odd_tolerance);
  return SphericalFunction::from_coefficients(metric.shared_quadrature(), std::move(coeffs), Parity::Even);
}

}  // namespace crofton
