#pragma once

// Quadrature rules on [a, b] and on the sphere.

#include "crofton/sphere.hpp"

#include <Eigen/Core>

#include <memory>
#include <span>
#include <vector>

namespace crofton {

struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b]; exact for polynomials of
/// degree 2n - 1. Nodes ascend.
GaussLegendre gauss_legendre(int n, double a = -1.0, double b = 1.0);

/// Product rule: Gauss-Legendre in cos(colatitude) times a uniform
/// trapezoid in longitude. With band limit L it uses L + 1 latitude rings and
/// 2L + 2 longitudes, which integrates products Y_{n,m} Y_{n',m'} with
/// n, n' <= L exactly. Nodes are ring-major with rings in ascending
/// cos(colatitude) and longitudes starting at 0.
class SphericalQuadrature {
 public:
  static SphericalQuadrature build(int band_limit);

  int band_limit() const { return band_limit_; }
  int latitude_count() const { return latitude_count_; }
  int longitude_count() const { return longitude_count_; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const Vec3> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  /// Weighted sum in node order.
  double integrate(std::span<const double> values) const;
  double integrate(const Eigen::VectorXd& values) const;

  /// Node-by-harmonic matrix B(j, k) = Y_k(node_j), built on first use.
  const Eigen::MatrixXd& harmonic_basis() const;

 private:
  struct Basis;

  int band_limit_ = 0;
  int latitude_count_ = 0;
  int longitude_count_ = 0;
  std::vector<Vec3> nodes_;
  std::vector<double> weights_;
  std::shared_ptr<Basis> basis_;
};

SphericalQuadrature build_quadrature(int band_limit);

/// Shared, immutable quadrature for a band limit (process-wide cache).
std::shared_ptr<const SphericalQuadrature> shared_quadrature(int band_limit);

/// Node of a product rule written in a local polar frame (a, b, c):
///   xi = sqrt(1 - t^2) (cos(psi) a + sin(psi) b) + t c.
struct PolarNode {
  double t;
  double cos_psi;
  double sin_psi;
  double weight;
};

/// Product rule in a local polar frame. `full` uses Gauss-Legendre on
/// t in [-1, 1]; `split` uses separate rules on [-1, 0] and [0, 1], which
/// is exact for integrands |t| p(t) with p polynomial.
class PolarRule {
 public:
  static PolarRule full(int t_nodes, int psi_nodes);
  static PolarRule split(int t_nodes_per_half, int psi_nodes);

  std::span<const PolarNode> nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

  static Vec3 direction(const PolarNode& n, const Vec3& a, const Vec3& b, const Vec3& c);

 private:
  std::vector<PolarNode> nodes_;
};

}  // namespace crofton
