#include "crofton/transforms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace crofton {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_in_plane(const Direction& normal, const Direction& line) {
  if (std::abs(normal.dot(line)) > 1e-9) {
    throw std::invalid_argument("flag line must be orthogonal to the plane normal");
  }
}

double flag_frame_integral(const SphereIntegrand& h, const Direction& normal, const Direction& line,
                           const PolarRule& rule) {
  require_in_plane(normal, line);
  const Vec3& g = line.vec();
  const Vec3& w = normal.vec();
  const Vec3 y = g.cross(w);
  double sum = 0.0;
  for (const PolarNode& n : rule.nodes()) {
    sum += n.weight * n.cos_psi * n.cos_psi * h(PolarRule::direction(n, g, y, w));
  }
  return 0.5 * sum;
}

double split_cosine_integral(const SphereIntegrand& h, const Direction& omega, const PolarRule& rule) {
  const TangentFrame f = frame_of_normal(omega);
  double sum = 0.0;
  for (const PolarNode& n : rule.nodes()) {
    sum += n.weight * std::abs(n.t) * h(PolarRule::direction(n, f.e1, f.e2, omega.vec()));
  }
  return sum;
}
}  // namespace

PlaneCoords PlaneCoords::canonical() const {
  if (p > 0.0) return *this;
  if (p < 0.0) return {-p, -normal};
  const Vec3& v = normal.vec();
  const double lead = v.z() != 0.0 ? v.z() : (v.y() != 0.0 ? v.y() : v.x());
  return lead < 0.0 ? PlaneCoords{0.0, -normal} : PlaneCoords{0.0, normal};
}

SphericalFunction restrict_density(const DensityField& h, const Vec3& x,
                                   std::shared_ptr<const SphericalQuadrature> quad) {
  Eigen::VectorXd values(static_cast<Eigen::Index>(quad->size()));
  const auto nodes = quad->nodes();
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    values[static_cast<Eigen::Index>(j)] = h(x.dot(nodes[j]), nodes[j]);
  }
  return SphericalFunction::from_values(std::move(quad), std::move(values));
}

double cosine_transform(const SphericalFunction& h_x, const Direction& omega) {
  const int n = h_x.band_limit() / 2 + 2;
  const PolarRule rule = PolarRule::split(n, 2 * n);
  return split_cosine_integral([&](const Vec3& xi) { return h_x(xi); }, omega, rule);
}

double cosine_transform(const SphereIntegrand& h_x, const Direction& omega, int nodes_per_half) {
  const PolarRule rule = PolarRule::split(nodes_per_half, 2 * nodes_per_half);
  return split_cosine_integral(h_x, omega, rule);
}

double flag_kernel(const Vec3& xi, const Vec3& omega, const Vec3& line) {
  const double b = omega.dot(xi);
  const double denom = 1.0 - b * b;
  if (denom < 1e-12) return 0.0;
  const double a = line.dot(xi);
  return a * a / denom;
}

double sine_square_transform(const SphericalFunction& h_x, const Direction& normal, const Direction& line) {
  const int n = h_x.band_limit() / 2 + 2;
  const PolarRule rule = PolarRule::full(n, h_x.band_limit() + 4);
  return flag_frame_integral([&](const Vec3& xi) { return h_x(xi); }, normal, line, rule);
}

double sine_square_transform(const SphereIntegrand& h_x, const Direction& normal, const Direction& line,
                             int t_nodes) {
  const PolarRule rule = PolarRule::full(t_nodes, 2 * t_nodes);
  return flag_frame_integral(h_x, normal, line, rule);
}

double bundle_mass(const SphericalFunction& h_x) { return 0.5 * h_x.integral(); }

double kernel_bundle_average(const Vec3& xi, const Direction& line, int n_phi) {
  const TangentFrame f = frame_of_normal(line);
  double sum = 0.0;
  for (int k = 0; k < n_phi; ++k) {
    const double phi = kTwoPi * k / n_phi;
    const Vec3 omega = std::cos(phi) * f.e1 + std::sin(phi) * f.e2;
    sum += flag_kernel(xi, omega, line.vec());
  }
  return sum / n_phi;
}

IdentitySides flag_average_identity(const SphericalFunction& h_x, const Direction& line, int n_phi) {
  if (n_phi < 8) throw std::invalid_argument("flag_average_identity: n_phi must be >= 8");
  const TangentFrame f = frame_of_normal(line);
  double sum = 0.0;
  for (int k = 0; k < n_phi; ++k) {
    const double phi = kTwoPi * k / n_phi;
    const Direction omega(std::cos(phi) * f.e1 + std::sin(phi) * f.e2);
    sum += sine_square_transform(h_x, omega, line);
  }
  return {sum / n_phi, 0.5 * cosine_transform(h_x, line)};
}

double plane_measure_ball(const DensityField& h, const Vec3& center, double radius, int band_limit,
                          int p_nodes) {
  if (!(radius > 0.0)) throw std::invalid_argument("plane_measure_ball: radius must be positive");
  const auto quad = shared_quadrature(band_limit);
  const GaussLegendre gl = gauss_legendre(p_nodes, -radius, radius);
  const auto nodes = quad->nodes();
  const auto weights = quad->weights();
  double total = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double c = center.dot(nodes[j]);
    double inner = 0.0;
    for (int i = 0; i < p_nodes; ++i) inner += gl.weights[i] * h(c + gl.nodes[i], nodes[j]);
    total += weights[j] * inner;
  }
  return 0.5 * total;
}

double flag_measure_ball(const FlagFunction& rho, const Vec3& center, double radius, int band_limit) {
  if (!(radius > 0.0)) throw std::invalid_argument("flag_measure_ball: radius must be positive");
  const auto quad = shared_quadrature(band_limit);
  const auto nodes = quad->nodes();
  const auto weights = quad->weights();
  double total = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const Direction outer(nodes[j]);
    const Vec3 s = center + radius * outer.vec();
    const TangentFrame f = frame_of_normal(outer);
    const Flag f1(s, Direction(f.e1), outer);
    const Flag f2(s, Direction(f.e2), outer);
    // Umbilic surface: k1 = k2 = 1/R, area element R^2 dxi.
    total += weights[j] * radius * (rho(f1) + rho(f2));
  }
  return total / kTwoPi;
}

}  // namespace crofton
