#include "crofton/quadrature.hpp"

#include "crofton/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace crofton {

GaussLegendre gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x is the i-th largest root; store ascending.
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.nodes[i] = mid - half * x;
    rule.weights[n - 1 - i] = half * w;
    rule.weights[i] = half * w;
  }
  return rule;
}

struct SphericalQuadrature::Basis {
  std::once_flag once;
  Eigen::MatrixXd matrix;
};

SphericalQuadrature SphericalQuadrature::build(int band_limit) {
  if (band_limit < 0) throw std::invalid_argument("build_quadrature: band limit must be >= 0");
  SphericalQuadrature q;
  q.band_limit_ = band_limit;
  q.latitude_count_ = band_limit + 1;
  q.longitude_count_ = 2 * band_limit + 2;
  const GaussLegendre gl = gauss_legendre(q.latitude_count_);
  const double dlon = 2.0 * std::numbers::pi / q.longitude_count_;
  q.nodes_.reserve(static_cast<std::size_t>(q.latitude_count_) * q.longitude_count_);
  q.weights_.reserve(q.nodes_.capacity());
  for (int i = 0; i < q.latitude_count_; ++i) {
    const double t = gl.nodes[i];
    const double s = std::sqrt(1.0 - t * t);
    for (int k = 0; k < q.longitude_count_; ++k) {
      const double lon = k * dlon;
      q.nodes_.emplace_back(s * std::cos(lon), s * std::sin(lon), t);
      q.weights_.push_back(gl.weights[i] * dlon);
    }
  }
  q.basis_ = std::make_shared<Basis>();
  return q;
}

SphericalQuadrature build_quadrature(int band_limit) { return SphericalQuadrature::build(band_limit); }

double SphericalQuadrature::integrate(std::span<const double> values) const {
  if (values.size() != weights_.size()) {
    throw std::invalid_argument("SphericalQuadrature::integrate: size mismatch");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) sum += weights_[j] * values[j];
  return sum;
}

double SphericalQuadrature::integrate(const Eigen::VectorXd& values) const {
  return integrate(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

const Eigen::MatrixXd& SphericalQuadrature::harmonic_basis() const {
  std::call_once(basis_->once, [this] {
    const int k = harmonic_count(band_limit_);
    Eigen::MatrixXd& m = basis_->matrix;
    m.resize(static_cast<Eigen::Index>(nodes_.size()), k);
    std::vector<double> row(static_cast<std::size_t>(k));
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      evaluate_harmonics(band_limit_, nodes_[j], row);
      for (int c = 0; c < k; ++c) m(static_cast<Eigen::Index>(j), c) = row[static_cast<std::size_t>(c)];
    }
  });
  return basis_->matrix;
}

std::shared_ptr<const SphericalQuadrature> shared_quadrature(int band_limit) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const SphericalQuadrature>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[band_limit];
  if (!slot) slot = std::make_shared<const SphericalQuadrature>(build_quadrature(band_limit));
  return slot;
}

PolarRule PolarRule::full(int t_nodes, int psi_nodes) {
  if (psi_nodes < 1) throw std::invalid_argument("PolarRule: psi_nodes must be positive");
  PolarRule rule;
  const GaussLegendre gl = gauss_legendre(t_nodes);
  const double dpsi = 2.0 * std::numbers::pi / psi_nodes;
  rule.nodes_.reserve(static_cast<std::size_t>(t_nodes) * psi_nodes);
  for (int i = 0; i < t_nodes; ++i) {
    for (int k = 0; k < psi_nodes; ++k) {
      const double psi = k * dpsi;
      rule.nodes_.push_back({gl.nodes[i], std::cos(psi), std::sin(psi), gl.weights[i] * dpsi});
    }
  }
  return rule;
}

PolarRule PolarRule::split(int t_nodes_per_half, int psi_nodes) {
  if (psi_nodes < 1) throw std::invalid_argument("PolarRule: psi_nodes must be positive");
  PolarRule rule;
  const GaussLegendre lower = gauss_legendre(t_nodes_per_half, -1.0, 0.0);
  const GaussLegendre upper = gauss_legendre(t_nodes_per_half, 0.0, 1.0);
  const double dpsi = 2.0 * std::numbers::pi / psi_nodes;
  rule.nodes_.reserve(2 * static_cast<std::size_t>(t_nodes_per_half) * psi_nodes);
  for (const GaussLegendre* gl : {&lower, &upper}) {
    for (std::size_t i = 0; i < gl->nodes.size(); ++i) {
      for (int k = 0; k < psi_nodes; ++k) {
        const double psi = k * dpsi;
        rule.nodes_.push_back({gl->nodes[i], std::cos(psi), std::sin(psi), gl->weights[i] * dpsi});
      }
    }
  }
  return rule;
}

Vec3 PolarRule::direction(const PolarNode& n, const Vec3& a, const Vec3& b, const Vec3& c) {
  const double s = std::sqrt(std::max(0.0, 1.0 - n.t * n.t));
  return s * (n.cos_psi * a + n.sin_psi * b) + n.t * c;
}

}  // namespace crofton
