#include "crofton/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crofton {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAxisFallback = 1.0 - 1e-6;

double wrap_positive(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}
}  // namespace

Direction::Direction(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("Direction: vector must be finite and nonzero");
  }
  v_ = v / n;
}

Direction SphereCoords::to_direction() const {
  const double cl = std::cos(latitude);
  return Direction(cl * std::cos(longitude), cl * std::sin(longitude), std::sin(latitude));
}

SphereCoords SphereCoords::from_direction(const Direction& d) {
  SphereCoords c;
  c.latitude = std::asin(std::clamp(d.z(), -1.0, 1.0));
  c.longitude = std::atan2(d.y(), d.x());
  if (c.longitude >= std::numbers::pi) c.longitude -= kTwoPi;
  return c;
}

Vec3 local_east(const SphereCoords& c) {
  return Vec3(-std::sin(c.longitude), std::cos(c.longitude), 0.0);
}

Vec3 local_north(const SphereCoords& c) {
  const double sl = std::sin(c.latitude);
  return Vec3(-sl * std::cos(c.longitude), -sl * std::sin(c.longitude), std::cos(c.latitude));
}

TangentFrame frame_of_normal(const Direction& normal) {
  const Vec3& w = normal.vec();
  Vec3 axis = Vec3::UnitZ();
  if (std::abs(w.dot(axis)) > kAxisFallback) axis = Vec3::UnitX();
  Vec3 e1 = axis - axis.dot(w) * w;
  e1.normalize();
  return {e1, w.cross(e1)};
}

double angle_in_frame(const Direction& normal, const Vec3& v) {
  const TangentFrame f = frame_of_normal(normal);
  return wrap_positive(std::atan2(v.dot(f.e2), v.dot(f.e1)));
}

Flag::Flag(const Vec3& location, const Direction& line, const Direction& normal)
    : location_(location), line_(line), normal_(normal) {
  const double c = line.dot(normal);
  if (std::abs(c) > 1e-9) {
    throw std::invalid_argument("Flag: line must lie in the plane (|<line, normal>| > 1e-9)");
  }
  // Remove the residual so that the frame is orthonormal to rounding.
  normal_ = Direction(normal.vec() - c * line.vec());
}

Flag Flag::from_line(const Vec3& location, const Direction& line, double plane_angle) {
  const TangentFrame f = frame_of_normal(line);
  const Direction normal(std::cos(plane_angle) * f.e1 + std::sin(plane_angle) * f.e2);
  return Flag(location, line, normal);
}

Flag Flag::from_normal(const Vec3& location, const Direction& normal, double line_angle) {
  const TangentFrame f = frame_of_normal(normal);
  const Direction line(std::cos(line_angle) * f.e1 + std::sin(line_angle) * f.e2);
  return Flag(location, line, normal);
}

double Flag::plane_angle() const { return angle_in_frame(line_, normal_.vec()); }

double Flag::line_angle() const { return angle_in_frame(normal_, line_.vec()); }

FlagFrame Flag::frame() const { return {line_.vec(), y_axis(), normal_.vec()}; }

Flag Flag::rotated(double angle) const {
  const Vec3 n = std::cos(angle) * normal_.vec() + std::sin(angle) * y_axis();
  return Flag(location_, line_, Direction(n));
}

Flag Flag::translated(const Vec3& offset) const {
  return Flag(location_ + offset, line_, normal_);
}

PhiRates phi_rotation_derivatives(const SphereCoords& normal, double line_angle) {
  const double cl = std::cos(normal.latitude);
  if (std::abs(cl) < 1e-8) {
    throw PoleError("phi_rotation_derivatives: normal is at a coordinate pole");
  }
  const double s = std::sin(line_angle);
  return {-std::tan(normal.latitude) * s, -std::cos(line_angle), s / cl};
}

Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return c * v + s * axis.cross(v) + (1.0 - c) * axis.dot(v) * axis;
}

double wrap_angle(double a) {
  double r = wrap_positive(a);
  if (r > std::numbers::pi) r -= kTwoPi;
  return r;
}

}  // namespace crofton
