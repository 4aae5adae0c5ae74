#pragma once

// Real, fully orthonormal spherical harmonics and band-limited functions on
// the sphere.
//
// Convention: for degree n and order m,
//   Y_{n,0}  = Pbar_n^0(cos theta)
//   Y_{n,m}  = sqrt(2) Pbar_n^m(cos theta) cos(m lon),   m > 0
//   Y_{n,-m} = sqrt(2) Pbar_n^m(cos theta) sin(m lon),   m > 0
// where Pbar are the associated Legendre functions normalized so that
// the integral of Y_{n,m}^2 over the sphere is 1, without the Condon-Shortley
// phase. Coefficients are stored at index n^2 + n + m.

#include "crofton/quadrature.hpp"
#include "crofton/sphere.hpp"

#include <Eigen/Core>

#include <memory>
#include <optional>
#include <span>

namespace crofton {

constexpr int harmonic_count(int band_limit) { return (band_limit + 1) * (band_limit + 1); }
constexpr int harmonic_index(int degree, int order) { return degree * degree + degree + order; }

/// Writes Y_k(dir) for all k < harmonic_count(band_limit) into `out`.
/// `dir` need not be normalized exactly; it is used as given.
void evaluate_harmonics(int band_limit, const Vec3& dir, std::span<double> out);
Eigen::VectorXd evaluate_harmonics(int band_limit, const Vec3& dir);

/// Sum of coeffs[k] Y_k(dir). The band limit is inferred from coeffs.size().
double synthesize_at(const Eigen::VectorXd& coeffs, const Vec3& dir);

int band_limit_of(const Eigen::VectorXd& coeffs);

enum class Parity { Even, Odd, General };

/// Function on S^2 stored as values at the nodes of a quadrature together
/// with its harmonic coefficients up to the quadrature band limit.
///
/// Values that are not band-limited alias: analysis returns the coefficients
/// of the quadrature projection, which differs from the true expansion by
/// the content above degree L folded back into lower degrees.
class SphericalFunction {
 public:
  static SphericalFunction from_values(std::shared_ptr<const SphericalQuadrature> quad,
                                       Eigen::VectorXd values,
                                       std::optional<Parity> parity = std::nullopt);
  static SphericalFunction from_coefficients(std::shared_ptr<const SphericalQuadrature> quad,
                                             Eigen::VectorXd coeffs,
                                             std::optional<Parity> parity = std::nullopt);

  const SphericalQuadrature& quadrature() const { return *quad_; }
  const std::shared_ptr<const SphericalQuadrature>& shared_quadrature() const { return quad_; }
  int band_limit() const { return quad_->band_limit(); }
  const Eigen::VectorXd& values() const { return values_; }
  const Eigen::VectorXd& coefficients() const { return coeffs_; }
  Parity parity() const { return parity_; }

  /// Band-limited interpolation at an arbitrary direction.
  double operator()(const Vec3& dir) const { return synthesize_at(coeffs_, dir); }
  double integral() const { return quad_->integrate(values_); }

  /// Odd-degree coefficient energy divided by total energy (0 for zero input).
  double odd_energy_fraction() const;

 private:
  SphericalFunction() = default;

  std::shared_ptr<const SphericalQuadrature> quad_;
  Eigen::VectorXd values_;
  Eigen::VectorXd coeffs_;
  Parity parity_ = Parity::General;
};

Eigen::VectorXd sh_analyze(const SphericalQuadrature& quad, const Eigen::VectorXd& values);
Eigen::VectorXd sh_analyze(const SphericalFunction& f);
Eigen::VectorXd sh_synthesize(const SphericalQuadrature& quad, const Eigen::VectorXd& coeffs);

/// Fraction of coefficient energy carried by odd degrees.
double odd_energy_fraction(const Eigen::VectorXd& coeffs);

}  // namespace crofton
