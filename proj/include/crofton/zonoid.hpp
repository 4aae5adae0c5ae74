#pragma once

// Inversion of the cosine transform on a single sphere. The kernel
// |<Omega, xi>| is zonal, so by Funk-Hecke it acts on degree-n harmonics as
// multiplication by
//   lambda_n = 2 pi * integral_{-1}^{1} |t| P_n(t) dt,
// which vanishes for odd n. Inversion divides even coefficients by lambda_n.

#include "crofton/harmonics.hpp"

#include <stdexcept>
#include <vector>

namespace crofton {

class MultiplierTable {
 public:
  explicit MultiplierTable(int band_limit);

  int band_limit() const { return static_cast<int>(values_.size()) - 1; }
  double operator[](int degree) const { return values_.at(static_cast<std::size_t>(degree)); }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// Multiplier table for degrees 0..band_limit, cached per band limit.
const MultiplierTable& multipliers(int band_limit);

/// Input carries an odd component above tolerance; it cannot be a cosine
/// transform image.
class OddPartTooLarge : public std::runtime_error {
 public:
  OddPartTooLarge(double odd_energy, double tolerance);
  double odd_energy() const { return odd_energy_; }

 private:
  double odd_energy_;
};

/// A multiplier below 1e-10 * lambda_0 would be divided by before the
/// requested band limit.
class DegreeCapExceeded : public std::runtime_error {
 public:
  DegreeCapExceeded(int requested, int effective);
  int effective_band_limit() const { return effective_; }

 private:
  int effective_;
};

inline constexpr double kDefaultOddTolerance = 1e-6;

/// Even solution h of H = C h truncated at `band_limit` (which must not exceed
/// the band limit of H's quadrature). Odd input content is discarded after the
/// tolerance check; odd output coefficients are exactly zero.
SphericalFunction zonoid_invert(const SphericalFunction& metric, int band_limit,
                                double odd_tolerance = kDefaultOddTolerance);

/// Coefficient-level inversion used by the reconstruction pipeline.
Eigen::VectorXd zonoid_invert_coefficients(const Eigen::VectorXd& metric_coeffs, int band_limit,
                                           double odd_tolerance = kDefaultOddTolerance);

}  // namespace crofton
