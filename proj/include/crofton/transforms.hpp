#pragma once

// Forward integral operators on the space of planes: restriction of a plane
// density to a bundle, the cosine transform, the sine-square (flag) transform,
// bundle mass and the two ways of measuring the planes that hit a ball.
//
// Plane measure convention: a plane is (p, xi) with p real and xi in S^2;
// (p, xi) and (-p, -xi) are the same plane, so integrals over p in R and all
// of S^2 are halved.

#include "crofton/harmonics.hpp"
#include "crofton/quadrature.hpp"
#include "crofton/sphere.hpp"

#include <functional>
#include <memory>

namespace crofton {

struct PlaneCoords {
  double p = 0.0;
  Direction normal;

  /// Representative with p >= 0. At p == 0 the normal is chosen with its
  /// first nonzero component (z, then y, then x) positive.
  PlaneCoords canonical() const;
  /// Foot of the perpendicular from the origin.
  Vec3 foot() const { return p * normal.vec(); }
  /// Plane through `x` with the given normal.
  static PlaneCoords through(const Vec3& x, const Direction& normal) { return {x.dot(normal.vec()), normal}; }
};

/// Plane density h(p, xi); may be negative (signed measure).
struct DensityField {
  std::function<double(double p, const Vec3& xi)> value;
  /// Optional analytic derivative dh/dp.
  std::function<double(double p, const Vec3& xi)> dp;
  /// Length over which the density varies appreciably.
  double length_scale = 1.0;

  double operator()(double p, const Vec3& xi) const { return value(p, xi); }
  double operator()(const PlaneCoords& e) const { return value(e.p, e.normal.vec()); }
};

/// Metric H(x, Omega).
struct MetricField {
  std::function<double(const Vec3& x, const Vec3& direction)> value;
  double length_scale = 1.0;

  double operator()(const Vec3& x, const Vec3& direction) const { return value(x, direction); }
};

using SphereIntegrand = std::function<double(const Vec3&)>;

/// xi -> h(plane through x with normal xi), sampled on `quad`.
SphericalFunction restrict_density(const DensityField& h, const Vec3& x,
                                   std::shared_ptr<const SphericalQuadrature> quad);

/// Integral of |<Omega, xi>| h_x(xi) over S^2. The rule is rotated so that
/// Omega is its pole and split at the equator, where the kernel has its crease.
double cosine_transform(const SphericalFunction& h_x, const Direction& omega);
double cosine_transform(const SphereIntegrand& h_x, const Direction& omega, int nodes_per_half);

/// sin^2 of the angle between the line g of a flag with normal omega and the
/// trace of the plane with normal xi: <g, xi>^2 / (1 - <omega, xi>^2).
/// Returns 0 when 1 - <omega, xi>^2 < 1e-12.
double flag_kernel(const Vec3& xi, const Vec3& omega, const Vec3& line);

/// Half the integral of flag_kernel * h_x over S^2. Integrated in the flag's
/// own polar frame, where the kernel is cos^2 of the azimuth and smooth.
double sine_square_transform(const SphericalFunction& h_x, const Direction& normal, const Direction& line);
double sine_square_transform(const SphereIntegrand& h_x, const Direction& normal, const Direction& line,
                             int t_nodes);

/// Half the integral of h_x over S^2.
double bundle_mass(const SphericalFunction& h_x);

struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  double difference() const { return lhs - rhs; }
};

/// (1 / 2pi) * integral over Phi of flag_kernel for the flags with line
/// Omega, by an n-point trapezoid rule. Equals |<Omega, xi>| exactly.
double kernel_bundle_average(const Vec3& xi, const Direction& line, int n_phi);

/// lhs: (1 / 2pi) * integral of rho(x, Omega, Phi) dPhi by trapezoid over
/// n_phi nodes; rhs: cosine_transform(h_x, Omega) / 2. Requires n_phi >= 8.
IdentitySides flag_average_identity(const SphericalFunction& h_x, const Direction& line, int n_phi);

/// Measure of the planes meeting the ball B(center, radius): for every normal
/// the p-interval of length 2R is integrated with `p_nodes` Gauss-Legendre
/// points; normals use a sphere rule of the given band limit.
double plane_measure_ball(const DensityField& h, const Vec3& center, double radius, int band_limit = 32,
                          int p_nodes = 32);

using FlagFunction = std::function<double(const Flag&)>;

/// (2pi)^{-1} * integral over the sphere boundary of (rho(f2) + rho(f1)) / R
/// where f1, f2 are tangent flags with orthogonal lines (frame_of_normal of
/// the outer normal) and the outer normal as positive normal.
double flag_measure_ball(const FlagFunction& rho, const Vec3& center, double radius, int band_limit = 24);

}  // namespace crofton
