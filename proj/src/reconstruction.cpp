#include "crofton/reconstruction.hpp"

#include "crofton/quadrature.hpp"
#include "crofton/zonoid.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace crofton {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigFieldError(field, what);
}

// Half the flag-kernel moment of every harmonic for orientation (g, w).
Eigen::VectorXd kernel_moments(const Vec3& g, const Vec3& w, int band_limit, const PolarRule& rule) {
  const Vec3 y = g.cross(w);
  const int count = harmonic_count(band_limit);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(count);
  thread_local Eigen::VectorXd basis;
  basis.resize(count);
  for (const PolarNode& n : rule.nodes()) {
    evaluate_harmonics(band_limit, PolarRule::direction(n, g, y, w),
                       std::span<double>(basis.data(), static_cast<std::size_t>(count)));
    out.noalias() += (0.5 * n.weight * n.cos_psi * n.cos_psi) * basis;
  }
  return out;
}

double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

void check_step(const FlagDensityField& field, double delta) {
  if (!(delta >= 1e-6 * field.metric().length_scale)) {
    throw StepDegeneration("finite-difference step " + std::to_string(delta) +
                           " is below 1e-6 of the field length scale");
  }
}

// Neville's scheme evaluated at 0 for samples (u_i, v_i).
double neville_at_zero(const std::vector<double>& u, std::vector<double> v) {
  const std::size_t n = u.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      const double a = u[i];
      const double b = u[i + level];
      v[i] = (b * v[i] - a * v[i + 1]) / (b - a);
    }
  }
  return v[0];
}
}  // namespace

void ReconstructionConfig::validate() const {
  require(band_limit >= 0, "band_limit", "must be >= 0");
  require(delta > 0.0 && std::isfinite(delta), "delta", "must be positive");
  require(n_phi >= 16 && n_phi % 2 == 0, "n_phi", "must be even and >= 16");
  require(std::isfinite(c_norm), "c_norm", "must be finite");
  require(!alpha_sequence.empty(), "alpha_sequence", "must not be empty");
  for (std::size_t i = 0; i < alpha_sequence.size(); ++i) {
    const double a = alpha_sequence[i];
    require(a > 0.0 && a < kPi / 2.0, "alpha_sequence", "entries must lie in (0, pi/2)");
    if (i > 0) require(a < alpha_sequence[i - 1], "alpha_sequence", "must be strictly decreasing");
  }
  require(disc_radial_nodes >= 1, "disc_radial_nodes", "must be >= 1");
  require(disc_angular_nodes >= 4, "disc_angular_nodes", "must be >= 4");
  require(disc_boundary_nodes >= 4, "disc_boundary_nodes", "must be >= 4");
  require(std::isfinite(phi_offset), "phi_offset", "must be finite");
  require(odd_tolerance > 0.0, "odd_tolerance", "must be positive");
  require(oracle_tolerance > 0.0, "oracle_tolerance", "must be positive");
}

FlagMoments flag_moments(const Flag& orientation, int band_limit, bool with_derivatives) {
  const PolarRule rule = PolarRule::full(band_limit / 2 + 2, band_limit + 4);
  const Vec3& g = orientation.line().vec();
  const Vec3& w = orientation.normal().vec();
  FlagMoments m;
  m.value = kernel_moments(g, w, band_limit, rule);
  if (!with_derivatives) return m;

  // rho(t) has period pi and degree <= L in t: a trigonometric polynomial of
  // degree D = floor(L/2) in s = 2t, recovered from K = 2D + 1 samples.
  const int d = band_limit / 2;
  const int k = 2 * d + 1;
  const Vec3 y = g.cross(w);
  m.d_phi = Eigen::VectorXd::Zero(m.value.size());
  m.d_phi_phi = Eigen::VectorXd::Zero(m.value.size());
  for (int i = 0; i < k; ++i) {
    const double s = kTwoPi * i / k;
    double c1 = 0.0;
    double c2 = 0.0;
    for (int j = 1; j <= d; ++j) {
      c1 += j * std::sin(j * s);
      c2 += static_cast<double>(j) * j * std::cos(j * s);
    }
    c1 *= 2.0 / k;
    c2 *= -2.0 / k;
    const Eigen::VectorXd sample =
        i == 0 ? m.value
               : kernel_moments(g, std::cos(0.5 * s) * w + std::sin(0.5 * s) * y, band_limit, rule);
    m.d_phi += (2.0 * c1) * sample;
    m.d_phi_phi += (4.0 * c2) * sample;
  }
  return m;
}

struct FlagDensityField::Cache {
  mutable std::shared_mutex mutex;
  std::map<std::array<long long, 3>, std::shared_ptr<const Eigen::VectorXd>> solutions;
};

FlagDensityField::FlagDensityField(MetricField metric, ReconstructionConfig config)
    : metric_(std::move(metric)), config_(std::move(config)), cache_(std::make_shared<Cache>()) {
  config_.validate();
  if (!metric_.value) throw std::invalid_argument("FlagDensityField: metric has no evaluator");
  quad_ = shared_quadrature(config_.band_limit);
}

std::shared_ptr<const Eigen::VectorXd> FlagDensityField::solution(const Vec3& x) const {
  const double unit = 1e-12 * metric_.length_scale;
  const std::array<long long, 3> key{std::llround(x.x() / unit), std::llround(x.y() / unit),
                                     std::llround(x.z() / unit)};
  {
    std::shared_lock lock(cache_->mutex);
    auto it = cache_->solutions.find(key);
    if (it != cache_->solutions.end()) return it->second;
  }
  const Vec3 xq(static_cast<double>(key[0]) * unit, static_cast<double>(key[1]) * unit,
                static_cast<double>(key[2]) * unit);
  const auto nodes = quad_->nodes();
  Eigen::VectorXd samples(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) samples[static_cast<Eigen::Index>(j)] = metric_(xq, nodes[j]);
  auto coeffs = std::make_shared<const Eigen::VectorXd>(
      zonoid_invert_coefficients(sh_analyze(*quad_, samples), config_.band_limit, config_.odd_tolerance));

  std::unique_lock lock(cache_->mutex);
  auto [it, inserted] = cache_->solutions.emplace(key, std::move(coeffs));
  return it->second;
}

SphericalFunction FlagDensityField::restriction(const Vec3& x) const {
  return SphericalFunction::from_coefficients(quad_, *solution(x), Parity::Even);
}

double FlagDensityField::bundle_mass(const Vec3& x) const { return bundle_mass_from_coefficients(*solution(x)); }

double FlagDensityField::rho(const Flag& f) const {
  const FlagMoments m = flag_moments(f, config_.band_limit, false);
  return m.value.dot(*solution(f.location()));
}

std::size_t FlagDensityField::cache_size() const {
  std::shared_lock lock(cache_->mutex);
  return cache_->solutions.size();
}

double bundle_mass_from_coefficients(const Eigen::VectorXd& coeffs) {
  return 0.5 * coeffs[0] * std::sqrt(4.0 * kPi);
}

double flag_density_at(const FlagDensityField& field, const Flag& f) { return field.rho(f); }

RotationalDerivs rho_rotational_derivs(const FlagDensityField& field, const Flag& f) {
  const FlagMoments m = flag_moments(f, field.config().band_limit);
  const Eigen::VectorXd& c = *field.solution(f.location());
  return {m.d_phi.dot(c), m.d_phi_phi.dot(c)};
}

namespace {
SpatialDerivs spatial_derivs_at_step(const FlagDensityField& field, const Flag& f, const FlagMoments& m,
                                     double delta) {
  const Vec3& x = f.location();
  const Vec3 y = f.y_axis();
  const Vec3& n = f.normal().vec();
  const Eigen::VectorXd& c0 = *field.solution(x);
  const Eigen::VectorXd& cyp = *field.solution(x + delta * y);
  const Eigen::VectorXd& cym = *field.solution(x - delta * y);
  const Eigen::VectorXd& cnp = *field.solution(x + delta * n);
  const Eigen::VectorXd& cnm = *field.solution(x - delta * n);
  SpatialDerivs d;
  d.dy = m.value.dot(cyp - cym) / (2.0 * delta);
  d.dyy = m.value.dot(cyp - 2.0 * c0 + cym) / (delta * delta);
  d.dn = m.value.dot(cnp - cnm) / (2.0 * delta);
  d.dy_of_dphi = m.d_phi.dot(cyp - cym) / (2.0 * delta);
  d.dphi_y = d.dy_of_dphi - 0.5 * d.dn;
  return d;
}

SpatialDerivs spatial_derivs(const FlagDensityField& field, const Flag& f, const FlagMoments& m, double delta) {
  check_step(field, delta);
  const SpatialDerivs coarse = spatial_derivs_at_step(field, f, m, delta);
  if (!field.config().richardson) return coarse;
  const SpatialDerivs fine = spatial_derivs_at_step(field, f, m, 0.5 * delta);
  SpatialDerivs d;
  d.dy = richardson(coarse.dy, fine.dy);
  d.dyy = richardson(coarse.dyy, fine.dyy);
  d.dn = richardson(coarse.dn, fine.dn);
  d.dy_of_dphi = richardson(coarse.dy_of_dphi, fine.dy_of_dphi);
  d.dphi_y = d.dy_of_dphi - 0.5 * d.dn;
  return d;
}

double mass_second_difference(const FlagDensityField& field, const Vec3& x, const Vec3& dir, double delta) {
  return (field.bundle_mass(x + delta * dir) - 2.0 * field.bundle_mass(x) + field.bundle_mass(x - delta * dir)) /
         (delta * delta);
}

double mass_first_difference(const FlagDensityField& field, const Vec3& x, const Vec3& dir, double delta) {
  return (field.bundle_mass(x + delta * dir) - field.bundle_mass(x - delta * dir)) / (2.0 * delta);
}
}  // namespace

SpatialDerivs rho_spatial_derivs(const FlagDensityField& field, const Flag& f, double delta) {
  const FlagMoments m = flag_moments(f, field.config().band_limit);
  return spatial_derivs(field, f, m, delta);
}

Vec3 bundle_line(const Direction& normal, double phi, double offset) {
  const TangentFrame f = frame_of_normal(normal);
  return std::cos(phi + offset) * f.e1 + std::sin(phi + offset) * f.e2;
}

double bundle_mass_derivs(const FlagDensityField& field, const Vec3& x, const PlaneCoords& e, double phi,
                          double delta) {
  check_step(field, delta);
  const Vec3 g = bundle_line(e.normal, phi, field.config().phi_offset);
  const double coarse = mass_second_difference(field, x, g, delta);
  if (!field.config().richardson) return coarse;
  return richardson(coarse, mass_second_difference(field, x, g, 0.5 * delta));
}

ReconstructionResult reconstruct_plane(const FlagDensityField& field, const PlaneCoords& e) {
  return reconstruct_plane(field, e, e.foot());
}

ReconstructionResult reconstruct_plane(const FlagDensityField& field, const PlaneCoords& e, const Vec3& x) {
  const double scale = std::max(1.0, std::abs(e.p)) * field.metric().length_scale;
  if (std::abs(x.dot(e.normal.vec()) - e.p) > 1e-9 * scale) {
    throw std::invalid_argument("reconstruct_plane: base point does not lie on the plane");
  }
  const ReconstructionConfig& cfg = field.config();
  const int n = cfg.n_phi;
  double mass_integral = 0.0;
  double flag_integral = 0.0;
  for (int k = 0; k < n; ++k) {
    const double phi = kTwoPi * k / n;
    const Flag f(x, Direction(bundle_line(e.normal, phi, cfg.phi_offset)), e.normal);
    const FlagMoments m = flag_moments(f, cfg.band_limit);
    const double rho_phi_phi = m.d_phi_phi.dot(*field.solution(x));
    const SpatialDerivs d = spatial_derivs(field, f, m, cfg.delta);
    flag_integral += rho_phi_phi + 2.0 * d.dphi_y + d.dyy;
    mass_integral += bundle_mass_derivs(field, x, e, phi, cfg.delta);
  }
  const double dphi = kTwoPi / n;
  ReconstructionResult r;
  r.mass = field.bundle_mass(x);
  r.mass_term = mass_integral * dphi / kTwoPi;
  r.flag_term = flag_integral * dphi;
  r.bracket = r.mass + r.mass_term - (2.0 / kPi) * r.flag_term;
  r.value = cfg.c_norm * r.bracket;
  r.base_point = x;
  r.plane = e;
  return r;
}

double disc_identity_rhs(const FlagDensityField& field, const Vec3& x, const Direction& normal, double alpha) {
  const ReconstructionConfig& cfg = field.config();
  const Vec3& w = normal.vec();
  const Vec3 center = x - w;
  const double delta = cfg.delta;
  check_step(field, delta);

  const GaussLegendre radial = gauss_legendre(cfg.disc_radial_nodes, 0.0, alpha);
  const double dphi_area = kTwoPi / cfg.disc_angular_nodes;
  double area = 0.0;
  for (int k = 0; k < cfg.disc_angular_nodes; ++k) {
    const Vec3 r = bundle_line(normal, dphi_area * k, cfg.phi_offset);
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double nu = radial.nodes[i];
      const Vec3 n = std::cos(nu) * w + std::sin(nu) * r;
      const Vec3 s = center + n;
      const double ds = radial.weights[i] * std::sin(nu) * dphi_area;
      area += (field.bundle_mass(s) + mass_first_difference(field, s, n, delta)) * ds;
    }
  }

  const int nb = cfg.disc_boundary_nodes;
  const double ca = std::cos(alpha);
  const double sa = std::sin(alpha);
  double boundary = 0.0;
  for (int k = 0; k < nb; ++k) {
    const Vec3 r = bundle_line(normal, kTwoPi * k / nb, cfg.phi_offset);
    const Vec3 n = ca * w + sa * r;
    const Vec3 s = center + n;
    const Flag f(s, Direction(w.cross(r)), Direction(n));
    const FlagMoments m = flag_moments(f, cfg.band_limit);
    const Eigen::VectorXd& c = *field.solution(s);
    const double rho = m.value.dot(c);
    const double rho_phi = m.d_phi.dot(c);
    const Vec3 y = f.y_axis();
    const double rho_y = m.value.dot(*field.solution(s + delta * y) - *field.solution(s - delta * y)) /
                         (2.0 * delta);
    boundary += ca * field.bundle_mass(s) - sa * rho_phi - 2.0 * ca * rho - sa * rho_y;
  }
  return area + boundary * kTwoPi / nb;
}

double disc_identity_lhs(const DensityField& h, const Vec3& x, const Direction& normal, double alpha,
                         int radial_nodes, int angular_nodes) {
  const Vec3& w = normal.vec();
  const Vec3 center = x - w;
  const GaussLegendre radial = gauss_legendre(radial_nodes, 0.0, alpha);
  const double dphi = kTwoPi / angular_nodes;
  double total = 0.0;
  for (int k = 0; k < angular_nodes; ++k) {
    const Vec3 r = bundle_line(normal, dphi * k);
    for (std::size_t i = 0; i < radial.nodes.size(); ++i) {
      const double nu = radial.nodes[i];
      const Vec3 n = std::cos(nu) * w + std::sin(nu) * r;
      const Vec3 s = center + n;
      total += h(s.dot(n), n) * radial.weights[i] * std::sin(nu) * dphi;
    }
  }
  return kTwoPi * total;
}

DiscOracleResult disc_limit_oracle(const FlagDensityField& field, const PlaneCoords& e, const Vec3& x) {
  const ReconstructionConfig& cfg = field.config();
  DiscOracleResult out;
  std::vector<double> u;
  for (double alpha : cfg.alpha_sequence) {
    const double area = kTwoPi * (1.0 - std::cos(alpha));
    out.per_alpha.push_back(disc_identity_rhs(field, x, e.normal, alpha) / (kTwoPi * area));
    u.push_back(alpha * alpha);
  }
  out.value = neville_at_zero(u, out.per_alpha);
  if (u.size() > 1) {
    const std::vector<double> u_tail(u.begin() + 1, u.end());
    const std::vector<double> v_tail(out.per_alpha.begin() + 1, out.per_alpha.end());
    out.spread = std::abs(out.value - neville_at_zero(u_tail, v_tail));
  }
  out.converged = u.size() > 1 && out.spread <= cfg.oracle_tolerance * std::max(std::abs(out.value), 1e-12);
  return out;
}

IdentitySides lemma_radial_check(const FlagDensityField& field, const Vec3& x, const Direction& normal,
                                 double phi, double step) {
  check_step(field, step);
  const Vec3& w = normal.vec();
  const Vec3 center = x - w;
  const Vec3 r = bundle_line(normal, phi, field.config().phi_offset);
  const Direction g(w.cross(r));
  auto tangent_rho = [&](double alpha) {
    const Vec3 n = std::cos(alpha) * w + std::sin(alpha) * r;
    return field.rho(Flag(center + n, g, Direction(n)));
  };
  const Flag f(x, g, normal);
  const FlagMoments m = flag_moments(f, field.config().band_limit);
  const Vec3 y = f.y_axis();
  const double rho_phi = m.d_phi.dot(*field.solution(x));
  const double rho_y =
      m.value.dot(*field.solution(x + step * y) - *field.solution(x - step * y)) / (2.0 * step);
  return {(tangent_rho(step) - tangent_rho(-step)) / (2.0 * step), rho_phi + rho_y};
}

IdentitySides curvature_correction_check(const FlagDensityField& field, const Vec3& x,
                                         const Direction& normal, double phi, double step) {
  check_step(field, step);
  const Vec3& w = normal.vec();
  const Vec3 center = x - w;
  const Vec3 r = bundle_line(normal, phi, field.config().phi_offset);
  auto meridian_mass = [&](double alpha) {
    return field.bundle_mass(center + std::cos(alpha) * w + std::sin(alpha) * r);
  };
  const double lhs = (meridian_mass(step) - 2.0 * meridian_mass(0.0) + meridian_mass(-step)) / (step * step);
  const double rhs = mass_second_difference(field, x, r, step) - mass_first_difference(field, x, w, step);
  return {lhs, rhs};
}

}  // namespace crofton
