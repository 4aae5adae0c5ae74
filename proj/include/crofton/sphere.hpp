#pragma once

// Spherical geometry primitives: unit directions, latitude/longitude
// coordinates, reference frames on great circles and directed flags.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>

namespace crofton {

using Vec3 = Eigen::Vector3d;

/// Unit vector on S^2. Construction normalizes the input.
class Direction {
 public:
  Direction() : v_(0.0, 0.0, 1.0) {}
  explicit Direction(const Vec3& v);
  Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  double dot(const Direction& other) const { return v_.dot(other.v_); }
  double dot(const Vec3& other) const { return v_.dot(other); }
  Direction operator-() const { return Direction(-v_, kUnchecked); }

 private:
  struct Unchecked {};
  static constexpr Unchecked kUnchecked{};
  Direction(const Vec3& v, Unchecked) : v_(v) {}

  Vec3 v_;
};

/// Latitude in [-pi/2, pi/2], longitude in [-pi, pi).
struct SphereCoords {
  double latitude = 0.0;
  double longitude = 0.0;

  Direction to_direction() const;
  static SphereCoords from_direction(const Direction& d);
};

/// Unit tangent vectors pointing east and north at a point of the sphere.
Vec3 local_east(const SphereCoords& c);
Vec3 local_north(const SphereCoords& c);

/// Orthonormal pair spanning the plane orthogonal to a normal.
struct TangentFrame {
  Vec3 e1;
  Vec3 e2;
};

/// Frame used to measure in-plane angles. e1 is the projection of the z axis
/// (x axis when |<normal, z>| > 1 - 1e-6) and e2 = normal x e1, so that
/// (e1, e2, normal) is always right-handed.
TangentFrame frame_of_normal(const Direction& normal);

/// Angle of a vector lying in the plane orthogonal to `normal`, measured in
/// frame_of_normal(normal). Result in [0, 2*pi).
double angle_in_frame(const Direction& normal, const Vec3& v);

/// Axes attached to a flag: x1 along the line, x3 along the positive normal
/// and x2 = x1 x x3 (pointing into the right half of the plane). The triple
/// is left-handed: x1 x x2 = -x3.
struct FlagFrame {
  Vec3 x1;
  Vec3 x2;
  Vec3 x3;
};

/// Directed flag (x, g, e): a point, a directed line through it and an
/// oriented plane containing the line.
///
/// The two parametrizations are
///   (x, line, Phi):  normal = cos(Phi) a1 + sin(Phi) a2, (a1, a2) = frame_of_normal(line)
///   (x, normal, phi): line  = cos(phi) e1 + sin(phi) e2, (e1, e2) = frame_of_normal(normal)
/// Increasing Phi is a right-hand rotation of the plane about the line, which
/// appears clockwise when looking along the line.
class Flag {
 public:
  /// Throws std::invalid_argument if |<line, normal>| > 1e-9.
  Flag(const Vec3& location, const Direction& line, const Direction& normal);

  static Flag from_line(const Vec3& location, const Direction& line, double plane_angle);
  static Flag from_normal(const Vec3& location, const Direction& normal, double line_angle);

  const Vec3& location() const { return location_; }
  const Direction& line() const { return line_; }
  const Direction& normal() const { return normal_; }

  /// Phi: angle of the normal in frame_of_normal(line).
  double plane_angle() const;
  /// phi: angle of the line in frame_of_normal(normal).
  double line_angle() const;

  FlagFrame frame() const;
  /// The x2 axis, line x normal.
  Vec3 y_axis() const { return line_.vec().cross(normal_.vec()); }

  /// Positive rotation by `angle` around the line.
  Flag rotated(double angle) const;
  Flag translated(const Vec3& offset) const;

 private:
  Vec3 location_;
  Direction line_;
  Direction normal_;
};

/// Thrown when a formula is evaluated at a coordinate pole.
class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rates of change of the flag's coordinates under positive rotation about
/// its line. The normal is given in latitude/longitude; the line angle phi is
/// measured from local east toward local north.
struct PhiRates {
  double line_angle;  // d phi / d Phi
  double latitude;    // d lat / d Phi
  double longitude;   // d lon / d Phi
};

/// Closed-form rotation rates:
///   phi' = -tan(lat) sin(phi),  lat' = -cos(phi),  lon' = sin(phi) / cos(lat).
/// Throws PoleError when |cos(lat)| < 1e-8.
PhiRates phi_rotation_derivatives(const SphereCoords& normal, double line_angle);

/// Rodrigues rotation of v about a unit axis.
Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

}  // namespace crofton
