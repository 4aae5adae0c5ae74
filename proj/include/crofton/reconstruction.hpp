#pragma once

// Reconstruction of a plane density from a metric.
//
// For every point x the metric H(x, .) is inverted as a cosine transform,
// giving h(x, .). Its sine-square transform is the flag density rho. A plane
// density value h(e) is then recovered from the bundle of flags <x, e>:
//
//   h(e) = c_norm * [ M(x) + (1/2pi) int d^2M/dx_phi^2 dphi
//                     - (2/pi) int (rho''_PhiPhi + 2 rho''_Phiy + rho''_yy) dphi ]
//
// where M is the bundle mass, y is the flag's x2 axis and Phi the positive
// rotation about the flag's line. Because y turns with the flag, the two
// mixed derivatives d_y(rho'_Phi) and d_Phi(rho'_y) differ by rho'_n; the
// mixed term uses their mean, rho''_Phiy = d_y(rho'_Phi) - rho'_n / 2.
// With c_norm = 1/(2pi) a constant density c is reproduced exactly.

#include "crofton/harmonics.hpp"
#include "crofton/sphere.hpp"
#include "crofton/transforms.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace crofton {

inline constexpr double kCalibratedNormalization = 1.0 / (2.0 * std::numbers::pi);
inline constexpr double kPrintedNormalization = 1.0;

struct ReconstructionConfig {
  int band_limit = 12;
  double delta = 1e-2;  // spatial finite-difference step
  int n_phi = 64;       // trapezoid nodes over a bundle
  double c_norm = kCalibratedNormalization;
  std::vector<double> alpha_sequence{0.2, 0.1, 0.05};
  bool richardson = false;  // extrapolate spatial differences over delta and delta/2
  int disc_radial_nodes = 4;
  int disc_angular_nodes = 16;
  int disc_boundary_nodes = 32;
  double phi_offset = 0.0;  // rotation of the bundle reference direction
  double odd_tolerance = 1e-6;
  double oracle_tolerance = 1e-2;  // relative

  /// Throws ConfigFieldError naming the offending field.
  void validate() const;
};

class ConfigFieldError : public std::invalid_argument {
 public:
  ConfigFieldError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Spatial step is too small relative to the field's length scale.
class StepDegeneration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integrals of the flag kernel against each harmonic for one flag
/// orientation, and their first two derivatives under positive rotation
/// about the line. rho(f) = coeffs . value for any h_x with those coeffs.
struct FlagMoments {
  Eigen::VectorXd value;
  Eigen::VectorXd d_phi;
  Eigen::VectorXd d_phi_phi;
};

/// Moments of the flag kernel. The location of `orientation` is ignored.
/// Rotational derivatives are exact for band-limited h_x: rho(Phi) is a
/// trigonometric polynomial of period pi, sampled at 2*floor(L/2)+1 angles.
FlagMoments flag_moments(const Flag& orientation, int band_limit, bool with_derivatives = true);

/// Flag density built from per-point zonoid solutions of a metric field.
/// Solutions are cached by location quantized to 1e-12 length scales and are
/// computed at the quantized location, so results do not depend on the order
/// in which points are requested. Safe for concurrent use.
class FlagDensityField {
 public:
  FlagDensityField(MetricField metric, ReconstructionConfig config);

  const ReconstructionConfig& config() const { return config_; }
  const MetricField& metric() const { return metric_; }

  /// Harmonic coefficients of h(x, .), even degrees up to the band limit.
  std::shared_ptr<const Eigen::VectorXd> solution(const Vec3& x) const;
  SphericalFunction restriction(const Vec3& x) const;
  double bundle_mass(const Vec3& x) const;
  double rho(const Flag& f) const;

  std::size_t cache_size() const;

 private:
  struct Cache;

  MetricField metric_;
  ReconstructionConfig config_;
  std::shared_ptr<const SphericalQuadrature> quad_;
  std::shared_ptr<Cache> cache_;
};

/// Bundle mass from zonoid coefficients: half the integral of h(x, .).
double bundle_mass_from_coefficients(const Eigen::VectorXd& coeffs);

double flag_density_at(const FlagDensityField& field, const Flag& f);

struct RotationalDerivs {
  double first = 0.0;   // rho'_Phi
  double second = 0.0;  // rho''_PhiPhi
};

RotationalDerivs rho_rotational_derivs(const FlagDensityField& field, const Flag& f);

struct SpatialDerivs {
  double dy = 0.0;      // rho'_y
  double dyy = 0.0;     // rho''_yy
  double dphi_y = 0.0;  // symmetric mixed derivative d_y(rho'_Phi) - rho'_n / 2
  double dn = 0.0;      // rho'_n, along the positive normal
  double dy_of_dphi = 0.0;  // d_y(rho'_Phi) at fixed orientation
};

/// Central differences over x +- delta y (and x +- delta n for rho'_n).
/// Throws StepDegeneration when delta < 1e-6 * length scale.
SpatialDerivs rho_spatial_derivs(const FlagDensityField& field, const Flag& f, double delta);

/// Direction of the line with angle phi in the bundle of plane `normal`,
/// measured from frame_of_normal(normal).e1 rotated by `offset`.
Vec3 bundle_line(const Direction& normal, double phi, double offset = 0.0);

/// Second derivative of M along bundle_line(e.normal, phi) at x.
double bundle_mass_derivs(const FlagDensityField& field, const Vec3& x, const PlaneCoords& e, double phi,
                          double delta);

struct ReconstructionResult {
  double value = 0.0;    // c_norm * bracket
  double bracket = 0.0;  // the bracketed expression
  double mass = 0.0;     // M(x)
  double mass_term = 0.0;  // (1/2pi) int M'' dphi
  double flag_term = 0.0;  // int (rho''_PhiPhi + 2 rho''_Phiy + rho''_yy) dphi
  Vec3 base_point = Vec3::Zero();
  PlaneCoords plane;
};

/// Reconstruction at the foot of the perpendicular from the origin.
ReconstructionResult reconstruct_plane(const FlagDensityField& field, const PlaneCoords& e);
/// Reconstruction at an explicit base point on e. Throws if x is not on e.
ReconstructionResult reconstruct_plane(const FlagDensityField& field, const PlaneCoords& e, const Vec3& x);

/// Right side of the disc identity for the disc of angular radius alpha
/// centred at x on the unit sphere tangent to e at x (outer normal = e's
/// normal). Equals 2pi times the integral of h over the tangent planes of
/// the disc.
double disc_identity_rhs(const FlagDensityField& field, const Vec3& x, const Direction& normal, double alpha);

/// Left side of the disc identity from a known density: 2pi times the
/// integral of h over the tangent planes of the same disc.
double disc_identity_lhs(const DensityField& h, const Vec3& x, const Direction& normal, double alpha,
                         int radial_nodes, int angular_nodes);

struct DiscOracleResult {
  double value = 0.0;            // extrapolated to alpha -> 0
  std::vector<double> per_alpha;  // mean conditional measure for each alpha
  double spread = 0.0;            // |full extrapolant - extrapolant without largest alpha|
  bool converged = false;
};

/// Mean conditional measure over tangent discs, extrapolated in alpha^2
/// (Neville) to alpha = 0.
DiscOracleResult disc_limit_oracle(const FlagDensityField& field, const PlaneCoords& e, const Vec3& x);

/// lhs: d rho / d alpha at alpha = 0 along the tangent flags of a disc on the
/// unit sphere tangent at x (central difference with `step`); rhs: rho'_Phi +
/// rho'_y of the bundle flag with line bundle_line(normal, phi) rotated so
/// that the disc lies on its left.
IdentitySides lemma_radial_check(const FlagDensityField& field, const Vec3& x, const Direction& normal,
                                 double phi, double step);

/// lhs: M''_alpha_alpha along the meridian of the tangent sphere; rhs: second
/// derivative of M along the bundle direction minus dM/dn. Both by
/// differences with `step`.
IdentitySides curvature_correction_check(const FlagDensityField& field, const Vec3& x,
                                         const Direction& normal, double phi, double step);

}  // namespace crofton
