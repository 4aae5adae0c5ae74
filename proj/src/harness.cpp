#include "crofton/harness.hpp"

#include "crofton/quadrature.hpp"
#include "crofton/zonoid.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace crofton {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using Rng = std::mt19937_64;
using Clock = std::chrono::steady_clock;

Vec3 random_unit(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-8) return v.normalized();
  }
}

Vec3 random_in_ball(Rng& rng, double radius) {
  std::uniform_real_distribution<double> r(0.0, 1.0);
  return radius * std::cbrt(r(rng)) * random_unit(rng);
}

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

Vec3 perpendicular_unit(Rng& rng, const Vec3& n) {
  for (;;) {
    const Vec3 v = random_unit(rng);
    const Vec3 p = v - v.dot(n) * n;
    if (p.norm() > 1e-3) return p.normalized();
  }
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

SyntheticDensitySpec spec_of(Family f, double beta = 0.5) {
  SyntheticDensitySpec s;
  s.family = f;
  s.beta = beta;
  if (f == Family::Constant) s.c = 0.7;
  return s;
}

struct SyntheticSetup {
  SyntheticDensitySpec spec;
  DensityField density;
  std::unique_ptr<FlagDensityField> field;
};

SyntheticSetup setup(const SyntheticDensitySpec& spec, const SuiteOptions& opt,
                     std::optional<ReconstructionConfig> config = std::nullopt) {
  SyntheticSetup s;
  s.spec = spec;
  s.density = make_density(spec);
  s.field = std::make_unique<FlagDensityField>(forward_metric(s.density, opt.forward_order),
                                               config.value_or(opt.config));
  return s;
}

std::string label(const SyntheticDensitySpec& s) {
  std::string name = family_name(s.family);
  if (s.family != Family::Constant && s.beta < 0.0) name += " (beta " + fmt(s.beta) + ")";
  return name;
}

// ---------------------------------------------------------------- identities
void identities_suite(Report& r, Rng& rng, const SuiteOptions& opt) {
  {
    const auto t0 = Clock::now();
    double worst = 0.0;
    double worst_k = 0.0;
    double min_k = 1.0;
    for (int i = 0; i < 100; ++i) {
      const Vec3 xi = random_unit(rng);
      const Direction omega(random_unit(rng));
      const double k = omega.dot(xi);
      const double err = std::abs(kernel_bundle_average(xi, omega, 512) - std::abs(k));
      min_k = std::min(min_k, std::abs(k));
      if (err > worst) {
        worst = err;
        worst_k = k;
      }
    }
    const double t = seconds_since(t0);
    r.checks.push_back(make_check("kernel_bundle_average", "(1/2pi) int sin^2 alpha dPhi = |<Omega, xi>|, 512 nodes",
                                  worst, 1e-9,
                                  "100 uniform pairs; worst at |<Omega,xi>| = " + fmt(std::abs(worst_k)) +
                                      ", smallest |<Omega,xi>| = " + fmt(min_k)));
    r.checks.push_back(make_check("kernel_bundle_average_runtime", "runtime of the 100-pair check [s]", t, 1.0));
  }
  {
    const Direction omega(random_unit(rng));
    const Vec3 xi = perpendicular_unit(rng, omega.vec());
    r.checks.push_back(make_check("kernel_bundle_average_orthogonal", "Omega orthogonal to xi gives 0",
                                  std::abs(kernel_bundle_average(xi, omega, 512)), 1e-14));
  }
  {
    double worst = 0.0;
    double out_of_range = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Vec3 xi = random_unit(rng);
      const Direction w(random_unit(rng));
      const Vec3 g = perpendicular_unit(rng, w.vec());
      const double k = flag_kernel(xi, w.vec(), g);
      out_of_range = std::max({out_of_range, -k, k - 1.0});
      const Vec3 proj = xi - w.dot(xi) * w.vec();
      if (proj.squaredNorm() > 1e-6) {
        // Trace of the plane xi in the flag plane is orthogonal to proj.
        const Vec3 y = g.cross(w.vec());
        const double psi = std::atan2(proj.dot(y), proj.dot(g));
        const double c = std::cos(psi);
        worst = std::max(worst, std::abs(k - c * c));
      }
    }
    r.checks.push_back(make_check("flag_kernel_angle_form", "kernel = cos^2 of the in-plane angle", worst, 1e-12));
    r.checks.push_back(make_check("flag_kernel_range", "kernel in [0, 1]", std::max(out_of_range, 0.0), 0.0));
  }

  const auto quad = shared_quadrature(16);
  const SphericalFunction one =
      SphericalFunction::from_values(quad, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(quad->size())));
  {
    const Direction omega(random_unit(rng));
    const Vec3 g = perpendicular_unit(rng, omega.vec());
    r.checks.push_back(make_check("cosine_transform_constant", "C[1] = 2pi",
                                  std::abs(cosine_transform(one, omega) - kTwoPi), 1e-6));
    r.checks.push_back(make_check("sine_square_constant", "S[1] = pi",
                                  std::abs(sine_square_transform(one, omega, Direction(g)) - kPi), 1e-6));
    r.checks.push_back(make_check("bundle_mass_constant", "M[1] = 2pi", std::abs(bundle_mass(one) - kTwoPi), 1e-10));
    const IdentitySides s = flag_average_identity(one, omega, 64);
    r.checks.push_back(make_check("flag_average_constant", "(1/2pi) int rho dPhi = C/2 = pi",
                                  std::max({std::abs(s.lhs - kPi), std::abs(s.rhs - kPi)}), 1e-8));
  }

  const SyntheticDensitySpec bump = spec_of(Family::GaussianBump);
  const DensityField h = make_density(bump);
  {
    double worst_avg = 0.0;
    double worst_mass = 0.0;
    double worst_even = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vec3 x = random_in_ball(rng, 0.8);
      const SphericalFunction hx = restrict_density(h, x, quad);
      const Direction omega(random_unit(rng));
      const IdentitySides s = flag_average_identity(hx, omega, 64);
      worst_avg = std::max(worst_avg, std::abs(s.difference()));

      const Direction w(random_unit(rng));
      const TangentFrame f = frame_of_normal(w);
      const int n = 64;
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        const double phi = kTwoPi * k / n;
        sum += sine_square_transform(hx, w, Direction(std::cos(phi) * f.e1 + std::sin(phi) * f.e2));
      }
      worst_mass = std::max(worst_mass, std::abs(sum * kTwoPi / n / kPi - bundle_mass(hx)));
      worst_even = std::max(worst_even, std::abs(cosine_transform(hx, omega) - cosine_transform(hx, -omega)));
    }
    r.checks.push_back(make_check("flag_average_identity", "(1/2pi) int rho dPhi = C[h_x](Omega) / 2", worst_avg,
                                  1e-8, "gaussian-bump restrictions at 5 random points"));
    r.checks.push_back(make_check("bundle_mass_phi_average", "M = (1/pi) int rho dphi", worst_mass, 1e-8,
                                  "5 random normals"));
    r.checks.push_back(make_check("cosine_transform_even", "C(Omega) = C(-Omega)", worst_even, 1e-10));
  }
  {
    double worst = 0.0;
    for (Family fam : {Family::Constant, Family::TranslationInvariant, Family::GaussianBump}) {
      const DensityField d = make_density(spec_of(fam));
      for (int i = 0; i < 50; ++i) {
        const Vec3 xi = random_unit(rng);
        const double p = uniform(rng, -2.0, 2.0);
        worst = std::max(worst, std::abs(d(p, xi) - d(-p, -xi)));
      }
    }
    r.checks.push_back(make_check("density_evenness", "h(p, xi) = h(-p, -xi)", worst, 0.0));
  }
  {
    const MetricField hc = forward_metric(make_density(spec_of(Family::Constant)), opt.forward_order);
    const MetricField ht = forward_metric(make_density(spec_of(Family::TranslationInvariant)), opt.forward_order);
    const MetricField hb = forward_metric(h, opt.forward_order);
    double worst_c = 0.0;
    double worst_t = 0.0;
    double worst_e = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = random_in_ball(rng, 1.0);
      const Vec3 x2 = random_in_ball(rng, 1.0);
      const Vec3 om = random_unit(rng);
      worst_c = std::max(worst_c, std::abs(hc(x, om) - kTwoPi * 0.7));
      worst_t = std::max(worst_t, std::abs(ht(x, om) - ht(x2, om)));
      worst_e = std::max(worst_e, std::abs(hb(x, om) - hb(x, -om)));
    }
    r.checks.push_back(make_check("forward_constant", "H = 2pi c for h = c", worst_c, 1e-10));
    r.checks.push_back(make_check("forward_translation_invariant", "H independent of x", worst_t, 1e-10));
    r.checks.push_back(make_check("forward_even", "H(x, Omega) = H(x, -Omega)", worst_e, 1e-12));
  }
  {
    // (1/pi) int rho(x, Omega, Phi) dPhi = H(x, Omega) through the full pipeline.
    const FlagDensityField field(forward_metric(h, opt.forward_order), opt.config);
    const int n = 64;
    const int samples = 50;
    std::vector<double> err(samples);
    std::vector<std::pair<Vec3, Vec3>> pts;
    for (int i = 0; i < samples; ++i) pts.emplace_back(random_in_ball(rng, 0.8), random_unit(rng));
    parallel_for(samples, opt.threads, [&](std::size_t i) {
      const auto& [x, om] = pts[i];
      const Direction line(om);
      const Eigen::VectorXd& c = *field.solution(x);
      double sum = 0.0;
      for (int k = 0; k < n; ++k) {
        const Flag f = Flag::from_line(x, line, kTwoPi * k / n);
        sum += flag_moments(f, opt.config.band_limit, false).value.dot(c);
      }
      err[i] = std::abs(sum * kTwoPi / n / kPi - field.metric()(x, om));
    });
    r.checks.push_back(make_check("bundle_average_consistency", "(1/pi) int rho dPhi = H(x, Omega)",
                                  max_of(err), 1e-6,
                                  "gaussian-bump field, 50 random (x, Omega)"));
  }
}

// ------------------------------------------------------------------- zonoid
double multiplier_oracle(int n) {
  using boost::math::quadrature::gauss_kronrod;
  auto f = [n](double t) { return std::abs(t) * boost::math::legendre_p(n, t); };
  const double lower = gauss_kronrod<double, 61>::integrate(f, -1.0, 0.0, 15, 1e-15);
  const double upper = gauss_kronrod<double, 61>::integrate(f, 0.0, 1.0, 15, 1e-15);
  return kTwoPi * (lower + upper);
}

Eigen::VectorXd random_even_coefficients(Rng& rng, int band_limit) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(harmonic_count(band_limit));
  for (int n = 0; n <= band_limit; n += 2) {
    for (int m = -n; m <= n; ++m) c[harmonic_index(n, m)] = nd(rng) / (1.0 + n);
  }
  return c;
}

SphericalFunction forward_on_quadrature(const SphericalFunction& h) {
  const auto& quad = h.shared_quadrature();
  const auto nodes = quad->nodes();
  Eigen::VectorXd v(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t j = 0; j < nodes.size(); ++j) v[static_cast<Eigen::Index>(j)] = cosine_transform(h, Direction(nodes[j]));
  return SphericalFunction::from_values(quad, std::move(v));
}

void zonoid_suite(Report& r, Rng& rng, const SuiteOptions&) {
  const MultiplierTable& lambda = multipliers(32);
  {
    const double expected[] = {kTwoPi, 0.0, kPi / 2.0, 0.0, -kPi / 12.0};
    double worst_oracle = 0.0;
    double worst_closed = 0.0;
    for (int n = 0; n <= 4; ++n) {
      worst_oracle = std::max(worst_oracle, std::abs(lambda[n] - multiplier_oracle(n)));
      worst_closed = std::max(worst_closed, std::abs(lambda[n] - expected[n]));
    }
    r.checks.push_back(make_check("multipliers_quadrature_oracle", "lambda_0..4 against adaptive 1-D quadrature",
                                  worst_oracle, 1e-10));
    r.checks.push_back(make_check("multipliers_constants", "lambda = 2pi, 0, pi/2, 0, -pi/12", worst_closed, 1e-10));
    double odd = 0.0;
    for (int n = 1; n <= 32; n += 2) odd = std::max(odd, std::abs(lambda[n]));
    r.checks.push_back(make_check("multipliers_odd_zero", "lambda_n = 0 for odd n", odd, 1e-14));
    double growth = -std::numeric_limits<double>::infinity();
    for (int n = 4; n <= 32; n += 2) growth = std::max(growth, std::abs(lambda[n]) - std::abs(lambda[n - 2]));
    r.checks.push_back(make_check("multipliers_decreasing", "|lambda_n| strictly decreasing over even n >= 2",
                                  growth, -1e-300, "largest increment |lambda_n| - |lambda_{n-2}|"));
  }

  const int band = 8;
  const auto quad = shared_quadrature(band);
  std::vector<Vec3> probes;
  for (int i = 0; i < 200; ++i) probes.push_back(random_unit(rng));
  {
    double worst_h = 0.0;
    double worst_H = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const SphericalFunction h = SphericalFunction::from_coefficients(quad, random_even_coefficients(rng, band));
      const SphericalFunction H = forward_on_quadrature(h);
      const SphericalFunction inv = zonoid_invert(H, band);
      for (const Vec3& p : probes) {
        worst_h = std::max(worst_h, std::abs(inv(p) - h(p)));
        worst_H = std::max(worst_H, std::abs(cosine_transform(inv, Direction(p)) - H(p)));
      }
    }
    r.checks.push_back(make_check("zonoid_round_trip", "invert(forward(h)) = h at L = 8", worst_h, 1e-7,
                                  "sup over 200 random directions, 3 random fields"));
    r.checks.push_back(make_check("zonoid_forward_of_inverse", "forward(invert(H)) = H at L = 8", worst_H, 1e-7));
  }
  {
    const Eigen::VectorXd two_pi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(quad->size()), kTwoPi);
    const SphericalFunction inv = zonoid_invert(SphericalFunction::from_values(quad, two_pi), band);
    double worst = 0.0;
    for (const Vec3& p : probes) worst = std::max(worst, std::abs(inv(p) - 1.0));
    r.checks.push_back(make_check("zonoid_constant", "H = 2pi gives h = 1", worst, 1e-8));

    Eigen::VectorXd y20 = Eigen::VectorXd::Zero(harmonic_count(band));
    y20[harmonic_index(2, 0)] = 1.0;
    const SphericalFunction inv2 =
        zonoid_invert(SphericalFunction::from_coefficients(quad, lambda[2] * y20), band);
    r.checks.push_back(make_check("zonoid_degree_two", "H = lambda_2 Y_20 gives h = Y_20",
                                  (inv2.coefficients() - y20).cwiseAbs().maxCoeff(), 1e-8));
  }
  {
    const SphericalFunction h1 = SphericalFunction::from_coefficients(quad, random_even_coefficients(rng, band));
    const SphericalFunction h2 = SphericalFunction::from_coefficients(quad, random_even_coefficients(rng, band));
    const double a = 0.7;
    const double b = -1.3;
    const SphericalFunction mix = SphericalFunction::from_values(quad, a * h1.values() + b * h2.values());
    const Eigen::VectorXd lhs = zonoid_invert(mix, band).coefficients();
    const Eigen::VectorXd rhs = a * zonoid_invert(h1, band).coefficients() + b * zonoid_invert(h2, band).coefficients();
    r.checks.push_back(make_check("zonoid_linearity", "invert(a H1 + b H2) = a invert(H1) + b invert(H2)",
                                  (lhs - rhs).cwiseAbs().maxCoeff(), 1e-10));
  }
  {
    Eigen::VectorXd v(static_cast<Eigen::Index>(quad->size()));
    const Vec3 u = random_unit(rng);
    const auto nodes = quad->nodes();
    for (std::size_t j = 0; j < nodes.size(); ++j) v[static_cast<Eigen::Index>(j)] = kTwoPi + 0.05 * nodes[j].dot(u);
    double rejected = 0.0;
    std::string detail = "not rejected";
    try {
      zonoid_invert(SphericalFunction::from_values(quad, v), band);
    } catch (const OddPartTooLarge& e) {
      rejected = 1.0;
      detail = "odd energy " + fmt(e.odd_energy());
    }
    r.checks.push_back(make_check("zonoid_odd_rejected", "odd input raises OddPartTooLarge", 1.0 - rejected, 0.0,
                                  detail));
  }
}

// ----------------------------------------------------------- reconstruction
double max_rel(const std::vector<RoundTripRow>& rows) {
  double m = 0.0;
  for (const RoundTripRow& r : rows) m = std::max(m, r.rel_error);
  return m;
}

void reconstruction_suite(Report& r, Rng& rng, const SuiteOptions& opt) {
  const auto t0 = Clock::now();
  const double c_norm = opt.config.c_norm;
  {
    const SyntheticSetup s = setup(spec_of(Family::Constant), opt);
    const auto planes = random_planes(rng(), 5);
    std::vector<double> bracket(planes.size());
    parallel_for(planes.size(), opt.threads,
                 [&](std::size_t i) { bracket[i] = reconstruct_plane(*s.field, planes[i].canonical()).bracket; });
    double worst = 0.0;
    double worst_printed = 0.0;
    double ratio = 0.0;
    for (double b : bracket) {
      worst = std::max(worst, std::abs(c_norm * b - s.spec.c));
      worst_printed = std::max(worst_printed, std::abs(kPrintedNormalization * b - kTwoPi * s.spec.c));
      ratio = c_norm * b / s.spec.c;
    }
    r.checks.push_back(make_check("calibration_anchor", "h = 0.7 reconstructs to 0.7", worst, 1e-5,
                                  "c_norm = " + fmt(c_norm) + ", reconstructed / true = " + fmt(ratio)));
    r.checks.push_back(make_check("printed_normalization", "with c_norm = 1 the output is 2pi * 0.7", worst_printed,
                                  1e-4));
  }

  const auto planes = random_planes(rng(), opt.plane_count);
  std::vector<std::pair<SyntheticDensitySpec, double>> cases = {
      {spec_of(Family::TranslationInvariant), 1e-3},
      {spec_of(Family::GaussianBump), 2e-2},
      {spec_of(Family::GaussianBump, -0.8), 2e-2},
  };
  for (const auto& [spec, tol] : cases) {
    const SyntheticSetup s = setup(spec, opt);
    const auto rows = round_trip(*s.field, s.density, planes, opt.threads);
    double ratio = 0.0;
    for (const auto& row : rows) ratio += row.reconstructed / row.truth / static_cast<double>(rows.size());
    std::string name = "round_trip_" + family_name(spec.family);
    if (spec.beta < 0.0) name += "_signed";
    r.checks.push_back(make_check(name, "L-infinity relative error, " + label(spec), max_rel(rows), tol,
                                  std::to_string(rows.size()) + " planes, mean reconstructed / true = " + fmt(ratio)));

    if (spec.family == Family::TranslationInvariant) {
      double worst = 0.0;
      for (int i = 0; i < 3; ++i) {
        const Direction n(random_unit(rng));
        const double a = reconstruct_plane(*s.field, PlaneCoords{0.1, n}.canonical()).value;
        const double b = reconstruct_plane(*s.field, PlaneCoords{0.7, n}.canonical()).value;
        worst = std::max(worst, rel(a, b));
      }
      r.checks.push_back(make_check("translation_invariant_p_independence", "h(p1, xi) = h(p2, xi)", worst, 1e-3));
    }
    if (spec.family == Family::GaussianBump && spec.beta > 0.0) {
      double worst_base = 0.0;
      double worst_seam = 0.0;
      double worst_even = 0.0;
      ReconstructionConfig rotated = opt.config;
      rotated.phi_offset = opt.config.phi_offset + 0.37;
      const FlagDensityField seam(s.field->metric(), rotated);
      for (std::size_t i = 0; i < std::min<std::size_t>(3, planes.size()); ++i) {
        const PlaneCoords e = planes[i].canonical();
        const TangentFrame f = frame_of_normal(e.normal);
        const double v0 = reconstruct_plane(*s.field, e).value;
        const double v1 = reconstruct_plane(*s.field, e, e.foot() + 0.3 * f.e1).value;
        const double v2 = reconstruct_plane(*s.field, e, e.foot() - 0.2 * f.e1 + 0.25 * f.e2).value;
        worst_base = std::max({worst_base, rel(v1, v0), rel(v2, v0)});
        worst_seam = std::max(worst_seam, rel(reconstruct_plane(seam, e).value, v0));
        const PlaneCoords flipped{-e.p, -e.normal};
        worst_even = std::max(worst_even, std::abs(reconstruct_plane(*s.field, flipped.canonical()).value - v0));
      }
      r.checks.push_back(make_check("base_point_invariance", "h(e) from 3 base points on e", worst_base, 1e-3));
      r.checks.push_back(make_check("frame_seam_invariance", "h(e) with the bundle frame rotated by 0.37",
                                    worst_seam, 1e-3));
      r.checks.push_back(make_check("plane_evenness", "h(p, xi) = h(-p, -xi) after reconstruction", worst_even, 0.0));
    }
  }
  r.checks.push_back(make_check("reconstruction_runtime", "suite wall clock [s]", seconds_since(t0), 600.0));
}

// ---------------------------------------------------------------- theorem3
void theorem3_suite(Report& r, Rng&, const SuiteOptions& opt) {
  const Vec3 center(0.05, -0.1, 0.1);
  for (Family fam : {Family::Constant, Family::TranslationInvariant, Family::GaussianBump}) {
    SyntheticDensitySpec spec = spec_of(fam);
    if (fam == Family::Constant) spec.c = 1.0;
    const SyntheticSetup s = setup(spec, opt);
    const FlagFunction rho = [&](const Flag& f) { return s.field->rho(f); };
    double worst = 0.0;
    double worst_closed = 0.0;
    for (double radius : {0.5, 1.0, 2.0}) {
      const double planes = plane_measure_ball(s.density, center, radius);
      const double flags = flag_measure_ball(rho, center, radius, 12);
      worst = std::max(worst, rel(flags, planes));
      if (fam == Family::Constant) {
        const double closed = 4.0 * kPi * radius;
        worst_closed = std::max({worst_closed, std::abs(planes - closed), std::abs(flags - closed)});
      }
    }
    r.checks.push_back(make_check("ball_measure_" + family_name(fam), "flag integral over the sphere = plane measure",
                                  worst, 1e-3, "R in {0.5, 1, 2}"));
    if (fam == Family::Constant) {
      r.checks.push_back(make_check("ball_measure_closed_form", "both ball measures = 4 pi R for h = 1", worst_closed,
                                    1e-6));
    }
  }
  {
    const DensityField odd{[&](double p, const Vec3& xi) { return (p - center.dot(xi)) * xi.z(); }, {}, 1.0};
    r.checks.push_back(make_check("ball_measure_odd_in_p", "density odd in p about the centre gives 0",
                                  std::abs(plane_measure_ball(odd, center, 1.0)), 1e-12));
  }
}

// ---------------------------------------------------------------- theorem5
void theorem5_suite(Report& r, Rng& rng, const SuiteOptions& opt) {
  for (const SyntheticDensitySpec& spec :
       {spec_of(Family::Constant), spec_of(Family::TranslationInvariant), spec_of(Family::GaussianBump)}) {
    const SyntheticSetup s = setup(spec, opt);
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      const Vec3 x = random_in_ball(rng, 0.6);
      const Direction n(random_unit(rng));
      for (double alpha : {0.2, 0.4}) {
        const double lhs = disc_identity_lhs(s.density, x, n, alpha, 12, 48);
        const double rhs = disc_identity_rhs(*s.field, x, n, alpha);
        worst = std::max(worst, rel(rhs, lhs));
      }
    }
    r.checks.push_back(make_check("disc_identity_" + family_name(spec.family),
                                  "2pi int_A h* ds = boundary and area terms", worst, 1e-3,
                                  "alpha in {0.2, 0.4}, 2 random discs"));
    if (spec.family == Family::Constant) {
      const PlaneCoords e = random_planes(rng(), 1).front();
      const DiscOracleResult o = disc_limit_oracle(*s.field, e, e.foot());
      r.checks.push_back(make_check("disc_oracle_constant", "disc limit returns c for h = c",
                                    std::abs(o.value - spec.c), 1e-4));
    }
  }

  const SyntheticSetup s = setup(spec_of(Family::GaussianBump), opt);
  const auto planes = random_planes(rng(), opt.oracle_plane_count);
  std::vector<double> err(planes.size());
  std::vector<double> cancel(planes.size());
  std::vector<int> converged(planes.size());
  parallel_for(planes.size(), opt.threads, [&](std::size_t i) {
    const PlaneCoords e = planes[i].canonical();
    const Vec3 x = e.foot();
    const DiscOracleResult o = disc_limit_oracle(*s.field, e, x);
    const double v = reconstruct_plane(*s.field, e).value;
    err[i] = rel(v, o.value);
    converged[i] = o.converged ? 1 : 0;
    const int n = s.field->config().n_phi;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      const Vec3 r0 = bundle_line(e.normal, kTwoPi * k / n, s.field->config().phi_offset);
      const Flag f(x, Direction(e.normal.vec().cross(r0)), e.normal);
      const FlagMoments m = flag_moments(f, s.field->config().band_limit);
      const double d = s.field->config().delta;
      const Vec3 y = f.y_axis();
      sum += m.d_phi.dot(*s.field->solution(x)) +
             m.value.dot(*s.field->solution(x + d * y) - *s.field->solution(x - d * y)) / (2.0 * d);
    }
    cancel[i] = std::abs(sum * kTwoPi / n) / (2.0 * kPi * kPi * std::abs(o.value));
  });
  r.checks.push_back(make_check("oracle_agreement", "reconstruction formula vs disc-limit oracle",
                                max_of(err), 1e-2,
                                std::to_string(planes.size()) + " gaussian-bump planes"));
  r.checks.push_back(make_check("oracle_converged", "extrapolation spread within oracle tolerance",
                                static_cast<double>(std::count(converged.begin(), converged.end(), 0)), 0.0,
                                "number of planes not converged"));
  r.checks.push_back(make_check("first_order_cancellation", "int (rho'_Phi + rho'_y) dphi relative to 2 pi^2 h",
                                max_of(cancel), 1e-4));
}

// ------------------------------------------------------------- derivatives
struct FlagAngles {
  double latitude;
  double longitude;
  double line_angle;
};

FlagAngles angles_of(const Flag& f) {
  const SphereCoords c = SphereCoords::from_direction(f.normal());
  const Vec3& g = f.line().vec();
  return {c.latitude, c.longitude, std::atan2(g.dot(local_north(c)), g.dot(local_east(c)))};
}

void derivatives_suite(Report& r, Rng& rng, const SuiteOptions& opt) {
  {
    const double h = 1e-4;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Flag f = Flag::from_normal(Vec3::Zero(), Direction(random_unit(rng)), uniform(rng, 0.0, kTwoPi));
      const FlagAngles a = angles_of(f);
      const PhiRates rates = phi_rotation_derivatives({a.latitude, a.longitude}, a.line_angle);
      const FlagAngles p = angles_of(f.rotated(h));
      const FlagAngles m = angles_of(f.rotated(-h));
      const double fd_phi = wrap_angle(p.line_angle - m.line_angle) / (2.0 * h);
      const double fd_lat = (p.latitude - m.latitude) / (2.0 * h);
      const double fd_lon = wrap_angle(p.longitude - m.longitude) / (2.0 * h);
      worst = std::max({worst, std::abs(fd_phi - rates.line_angle) / std::max(1.0, std::abs(rates.line_angle)),
                        std::abs(fd_lat - rates.latitude) / std::max(1.0, std::abs(rates.latitude)),
                        std::abs(fd_lon - rates.longitude) / std::max(1.0, std::abs(rates.longitude))});
    }
    r.checks.push_back(make_check("rotation_rates", "closed-form dphi, dlat, dlon vs rotated flag", worst, 1e-6,
                                  "100 random flags, step 1e-4, error relative to max(1, |rate|)"));
  }

  const SyntheticSetup bump = setup(spec_of(Family::GaussianBump), opt);
  const FlagDensityField& field = *bump.field;
  {
    double worst_lemma = 0.0;
    double worst_curv = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = random_in_ball(rng, 0.6);
      const Direction n(random_unit(rng));
      const double phi = uniform(rng, 0.0, kTwoPi);
      worst_lemma = std::max(worst_lemma, std::abs(lemma_radial_check(field, x, n, phi, 1e-3).difference()));
    }
    for (int i = 0; i < 20; ++i) {
      const Vec3 x = random_in_ball(rng, 0.6);
      const Direction n(random_unit(rng));
      const double phi = uniform(rng, 0.0, kTwoPi);
      worst_curv = std::max(worst_curv, std::abs(curvature_correction_check(field, x, n, phi, 1e-2).difference()));
    }
    r.checks.push_back(make_check("radial_derivative_lemma", "d rho / d alpha = rho'_Phi + rho'_y", worst_lemma, 1e-3,
                                  "20 random configurations, step 1e-3"));
    r.checks.push_back(make_check("curvature_correction", "M''_alpha = M''_line - M'_n", worst_curv, 1e-3,
                                  "20 random configurations, step 1e-2"));
  }
  {
    double worst1 = 0.0;
    double worst2 = 0.0;
    double order1 = 4.0;
    double order2 = 4.0;
    for (int i = 0; i < 5; ++i) {
      const Flag f = Flag::from_normal(random_in_ball(rng, 0.6), Direction(random_unit(rng)), uniform(rng, 0.0, kTwoPi));
      const RotationalDerivs d = rho_rotational_derivs(field, f);
      double e1[2];
      double e2[2];
      const double steps[2] = {2e-3, 1e-3};
      for (int k = 0; k < 2; ++k) {
        const double h = steps[k];
        const double p = field.rho(f.rotated(h));
        const double m = field.rho(f.rotated(-h));
        const double c = field.rho(f);
        e1[k] = std::abs((p - m) / (2.0 * h) - d.first);
        e2[k] = std::abs((p - 2.0 * c + m) / (h * h) - d.second);
      }
      worst1 = std::max(worst1, e1[1]);
      worst2 = std::max(worst2, e2[1]);
      if (e1[1] > 1e-9) order1 = std::min(order1, e1[0] / e1[1]);
      if (e2[1] > 1e-7) order2 = std::min(order2, e2[0] / e2[1]);
    }
    r.checks.push_back(make_check("rotational_first_derivative", "rho'_Phi vs central difference (step 1e-3)", worst1,
                                  1e-5));
    r.checks.push_back(make_check("rotational_second_derivative", "rho''_PhiPhi vs central difference (step 1e-3)",
                                  worst2, 1e-5));
    r.checks.push_back(make_check("rotational_difference_order", "error ratio for steps 2e-3 / 1e-3 (expect 4)",
                                  std::abs(std::min(order1, order2) - 4.0), 1.0));
  }
  {
    const SyntheticSetup c = setup(spec_of(Family::Constant), opt);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Flag f = Flag::from_normal(random_in_ball(rng, 0.6), Direction(random_unit(rng)), uniform(rng, 0.0, kTwoPi));
      const RotationalDerivs d = rho_rotational_derivs(*c.field, f);
      worst = std::max({worst, std::abs(d.first), std::abs(d.second)});
    }
    r.checks.push_back(make_check("rotational_constant", "rho'_Phi = rho''_PhiPhi = 0 for h = c", worst, 1e-10));
  }
  {
    const SyntheticSetup ti = setup(spec_of(Family::TranslationInvariant), opt);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vec3 x = random_in_ball(rng, 0.6);
      const Flag f = Flag::from_normal(x, Direction(random_unit(rng)), uniform(rng, 0.0, kTwoPi));
      const SpatialDerivs d = rho_spatial_derivs(*ti.field, f, opt.config.delta);
      const PlaneCoords e = PlaneCoords::through(x, f.normal());
      worst = std::max({worst, std::abs(d.dy), std::abs(d.dyy), std::abs(d.dphi_y),
                        std::abs(bundle_mass_derivs(*ti.field, x, e, uniform(rng, 0.0, kTwoPi), opt.config.delta))});
    }
    r.checks.push_back(make_check("spatial_translation_invariant", "spatial derivatives vanish for a t.i. field",
                                  worst, 1e-8));
  }
  {
    // Analytic oracles from the synthetic density on a dense rule.
    const SyntheticDensitySpec spec = bump.spec;
    const DensityField& h = bump.density;
    const auto dense = shared_quadrature(48);
    double worst_y = 0.0;
    double worst_m = 0.0;
    double order_y = 4.0;
    double order_m = 4.0;
    for (int i = 0; i < 4; ++i) {
      const Vec3 x = random_in_ball(rng, 0.6);
      const Flag f = Flag::from_normal(x, Direction(random_unit(rng)), uniform(rng, 0.0, kTwoPi));
      const Vec3 y = f.y_axis();
      const double rho_y = sine_square_transform(
          [&](const Vec3& xi) { return h.dp(x.dot(xi), xi) * y.dot(xi); }, f.normal(), f.line(), 48);
      const PlaneCoords e = PlaneCoords::through(x, f.normal());
      const double phi = uniform(rng, 0.0, kTwoPi);
      const Vec3 g = bundle_line(e.normal, phi, opt.config.phi_offset);
      double mpp = 0.0;
      const auto nodes = dense->nodes();
      const auto w = dense->weights();
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double a = g.dot(nodes[j]);
        mpp += w[j] * density_dpp(spec, x.dot(nodes[j]), nodes[j]) * a * a;
      }
      mpp *= 0.5;
      double ey[2];
      double em[2];
      const double steps[2] = {2.0 * opt.config.delta, opt.config.delta};
      for (int k = 0; k < 2; ++k) {
        ey[k] = std::abs(rho_spatial_derivs(field, f, steps[k]).dy - rho_y);
        em[k] = std::abs(bundle_mass_derivs(field, x, e, phi, steps[k]) - mpp);
      }
      worst_y = std::max(worst_y, ey[1]);
      worst_m = std::max(worst_m, em[1]);
      if (ey[1] > 1e-9) order_y = std::min(order_y, ey[0] / ey[1]);
      if (em[1] > 1e-9) order_m = std::min(order_m, em[0] / em[1]);
    }
    r.checks.push_back(make_check("spatial_first_derivative", "rho'_y vs analytic p-derivative of h", worst_y, 1e-4,
                                  "step " + fmt(opt.config.delta)));
    r.checks.push_back(make_check("mass_second_derivative", "M'' along a bundle line vs analytic", worst_m, 1e-4,
                                  "step " + fmt(opt.config.delta)));
    r.checks.push_back(make_check("spatial_difference_order", "error ratio for steps 2 delta / delta (expect 4)",
                                  std::abs(std::min(order_y, order_m) - 4.0), 1.0));
  }
  {
    ReconstructionConfig rotated = opt.config;
    rotated.phi_offset += 0.37;
    const FlagDensityField seam(field.metric(), rotated);
    const Vec3 x = random_in_ball(rng, 0.6);
    const PlaneCoords e = PlaneCoords::through(x, Direction(random_unit(rng)));
    const int n = opt.config.n_phi;
    double a = 0.0;
    double b = 0.0;
    for (int k = 0; k < n; ++k) {
      a += bundle_mass_derivs(field, x, e, kTwoPi * k / n, opt.config.delta);
      b += bundle_mass_derivs(seam, x, e, kTwoPi * k / n, opt.config.delta);
    }
    r.checks.push_back(make_check("mass_derivative_frame_seam", "phi-average of M'' independent of the frame seam",
                                  std::abs(a - b) / n, 1e-8));
  }
  {
    double thrown = 0.0;
    try {
      rho_spatial_derivs(field, Flag::from_normal(Vec3::Zero(), Direction(0, 0, 1), 0.0), 1e-7);
    } catch (const StepDegeneration&) {
      thrown = 1.0;
    }
    r.checks.push_back(make_check("step_degeneration", "delta < 1e-6 length scale is rejected", 1.0 - thrown, 0.0));
  }
}

using SuiteFn = void (*)(Report&, Rng&, const SuiteOptions&);

const std::map<std::string, SuiteFn>& suites() {
  static const std::map<std::string, SuiteFn> table = {
      {"identities", identities_suite}, {"zonoid", zonoid_suite},     {"reconstruction", reconstruction_suite},
      {"theorem3", theorem3_suite},     {"theorem5", theorem5_suite}, {"derivatives", derivatives_suite},
  };
  return table;
}
}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Constant: return "constant";
    case Family::TranslationInvariant: return "translation-invariant";
    case Family::GaussianBump: return "gaussian-bump";
  }
  return "unknown";
}

Family parse_family(const std::string& name) {
  if (name == "constant") return Family::Constant;
  if (name == "translation-invariant") return Family::TranslationInvariant;
  if (name == "gaussian-bump") return Family::GaussianBump;
  throw std::invalid_argument("unknown family '" + name + "'");
}

void SyntheticDensitySpec::validate() const {
  if (!std::isfinite(c)) throw std::invalid_argument("c must be finite");
  if (!std::isfinite(beta)) throw std::invalid_argument("beta must be finite");
  if (!(u.norm() > 0.0) || !u.allFinite()) throw std::invalid_argument("u must be a finite nonzero vector");
  if (!q.allFinite()) throw std::invalid_argument("q must be finite");
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
}

DensityField make_density(const SyntheticDensitySpec& spec) {
  spec.validate();
  const Vec3 u = spec.u.normalized();
  const double beta = spec.beta;
  DensityField d;
  d.length_scale = 1.0;
  switch (spec.family) {
    case Family::Constant: {
      const double c = spec.c;
      d.value = [c](double, const Vec3&) { return c; };
      d.dp = [](double, const Vec3&) { return 0.0; };
      break;
    }
    case Family::TranslationInvariant:
      d.value = [u, beta](double, const Vec3& xi) {
        const double a = xi.dot(u);
        return 1.0 + beta * a * a;
      };
      d.dp = [](double, const Vec3&) { return 0.0; };
      break;
    case Family::GaussianBump: {
      const Vec3 q = spec.q;
      const double s2 = spec.sigma * spec.sigma;
      d.value = [u, q, beta, s2](double p, const Vec3& xi) {
        const double a = xi.dot(u);
        const double t = p - q.dot(xi);
        return 1.0 + beta * std::exp(-t * t / s2) * a * a;
      };
      d.dp = [u, q, beta, s2](double p, const Vec3& xi) {
        const double a = xi.dot(u);
        const double t = p - q.dot(xi);
        return -2.0 * t / s2 * beta * std::exp(-t * t / s2) * a * a;
      };
      break;
    }
  }
  return d;
}

double density_dpp(const SyntheticDensitySpec& spec, double p, const Vec3& xi) {
  if (spec.family != Family::GaussianBump) return 0.0;
  const double a = xi.dot(spec.u.normalized());
  const double s2 = spec.sigma * spec.sigma;
  const double t = p - spec.q.dot(xi);
  return spec.beta * a * a * std::exp(-t * t / s2) * (4.0 * t * t / (s2 * s2) - 2.0 / s2);
}

MetricField forward_metric(const DensityField& h, int order) {
  if (order < 1) throw std::invalid_argument("forward_metric: order must be >= 1");
  auto rule = std::make_shared<const PolarRule>(PolarRule::split(order, 2 * order));
  MetricField m;
  m.length_scale = h.length_scale;
  m.value = [h, rule](const Vec3& x, const Vec3& direction) {
    const Direction omega(direction);
    const TangentFrame f = frame_of_normal(omega);
    double sum = 0.0;
    for (const PolarNode& n : rule->nodes()) {
      const Vec3 xi = PolarRule::direction(n, f.e1, f.e2, omega.vec());
      sum += n.weight * std::abs(n.t) * h(x.dot(xi), xi);
    }
    return sum;
  };
  return m;
}

bool Report::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

nlohmann::json Report::to_json() const {
  nlohmann::json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["passed"] = passed();
  j["seconds"] = seconds;
  j["checks"] = nlohmann::json::array();
  for (const Check& c : checks) {
    j["checks"].push_back({{"name", c.name},
                           {"identity", c.identity},
                           {"measured", c.measured},
                           {"tolerance", c.tolerance},
                           {"passed", c.passed},
                           {"detail", c.detail}});
  }
  return j;
}

Check make_check(std::string name, std::string identity, double measured, double tolerance, std::string detail) {
  Check c;
  c.name = std::move(name);
  c.identity = std::move(identity);
  c.measured = measured;
  c.tolerance = tolerance;
  c.passed = std::isfinite(measured) && measured <= tolerance;
  c.detail = std::move(detail);
  return c;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"identities", "zonoid",   "reconstruction",
                                                 "theorem3",   "theorem5", "derivatives"};
  return names;
}

Report run_suite(const std::string& name, std::uint64_t seed, const SuiteOptions& options) {
  const auto it = suites().find(name);
  if (it == suites().end()) throw std::invalid_argument("unknown suite '" + name + "'");
  options.config.validate();
  Report r;
  r.suite = name;
  r.seed = seed;
  Rng rng(seed);
  const auto t0 = Clock::now();
  it->second(r, rng, options);
  r.seconds = seconds_since(t0);
  return r;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<PlaneCoords> random_planes(std::uint64_t seed, int count, double p_max) {
  Rng rng(seed);
  std::vector<PlaneCoords> planes;
  planes.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const Direction n(random_unit(rng));
    planes.push_back({uniform(rng, -p_max, p_max), n});
  }
  return planes;
}

std::vector<RoundTripRow> round_trip(const FlagDensityField& field, const DensityField& truth,
                                     const std::vector<PlaneCoords>& planes, unsigned threads) {
  std::vector<RoundTripRow> rows(planes.size());
  parallel_for(planes.size(), threads, [&](std::size_t i) {
    RoundTripRow& row = rows[i];
    row.plane = planes[i].canonical();
    row.reconstructed = reconstruct_plane(field, row.plane).value;
    row.truth = truth(row.plane);
    row.rel_error = rel(row.reconstructed, row.truth);
  });
  return rows;
}

}  // namespace crofton
