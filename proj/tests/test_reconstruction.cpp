#include "doctest.h"

#include "crofton/harness.hpp"
#include "crofton/reconstruction.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace crofton;

namespace {
constexpr double kPi = std::numbers::pi;

SyntheticDensitySpec spec_of(Family f, double c = 1.0) {
  SyntheticDensitySpec s;
  s.family = f;
  s.c = c;
  return s;
}

FlagDensityField field_of(const SyntheticDensitySpec& s, ReconstructionConfig cfg = {}) {
  return FlagDensityField(forward_metric(make_density(s)), cfg);
}

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}
}  // namespace

TEST_SUITE("reconstruction") {
  TEST_CASE("config validation names the field") {
    ReconstructionConfig c;
    CHECK_NOTHROW(c.validate());
    auto field_of_error = [](const ReconstructionConfig& cfg) -> std::string {
      try {
        cfg.validate();
      } catch (const ConfigFieldError& e) {
        return e.field();
      }
      return {};
    };
    ReconstructionConfig a = c;
    a.n_phi = 15;
    CHECK(field_of_error(a) == "n_phi");
    ReconstructionConfig b = c;
    b.alpha_sequence = {0.1, 0.2};
    CHECK(field_of_error(b) == "alpha_sequence");
    ReconstructionConfig d = c;
    d.delta = -1.0;
    CHECK(field_of_error(d) == "delta");
    ReconstructionConfig e = c;
    e.band_limit = -2;
    CHECK(field_of_error(e) == "band_limit");
  }

  TEST_CASE("flag density of a constant field") {
    const FlagDensityField f = field_of(spec_of(Family::Constant, 0.7));
    std::mt19937_64 rng(1);
    for (int i = 0; i < 5; ++i) {
      const Flag fl = Flag::from_line(Vec3(0.1 * i, 0.2, -0.1), Direction(random_unit(rng)), 0.7 * i);
      CHECK(std::abs(f.rho(fl) - 0.7 * kPi) < 1e-10);
    }
    CHECK(std::abs(f.bundle_mass(Vec3(0.3, 0, 0)) - 1.4 * kPi) < 1e-10);
  }

  TEST_CASE("flag density matches the sine-square transform of the true restriction") {
    const SyntheticDensitySpec s = spec_of(Family::GaussianBump);
    const DensityField h = make_density(s);
    const FlagDensityField f = field_of(s);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 5; ++i) {
      const Vec3 x = 0.5 * random_unit(rng);
      const Flag fl = Flag::from_line(x, Direction(random_unit(rng)), 1.1 * i);
      const double truth = sine_square_transform([&](const Vec3& xi) { return h(x.dot(xi), xi); }, fl.normal(),
                                                 fl.line(), 40);
      CHECK(std::abs(f.rho(fl) - truth) < 1e-5);
    }
  }

  TEST_CASE("solutions do not depend on request order") {
    const SyntheticDensitySpec s = spec_of(Family::GaussianBump);
    const FlagDensityField a = field_of(s);
    const FlagDensityField b = field_of(s);
    const std::vector<Vec3> pts{Vec3(0.1, 0.2, 0.3), Vec3(-0.4, 0.0, 0.2), Vec3(0.0, 0.5, -0.1)};
    std::vector<Eigen::VectorXd> fa;
    for (const Vec3& p : pts) fa.push_back(*a.solution(p));
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) b.solution(*it);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(*b.solution(pts[i]) == fa[i]);
    CHECK(a.cache_size() == 3);
    CHECK(a.solution(pts[0] + Vec3(1e-14, 0, 0)) == a.solution(pts[0]));
  }

  TEST_CASE("rotational derivatives are exact for band-limited input") {
    const SyntheticDensitySpec s = spec_of(Family::GaussianBump);
    const FlagDensityField f = field_of(s);
    const Flag fl = Flag::from_line(Vec3(0.1, 0.0, 0.2), Direction(0.3, -0.4, 0.5), 0.8);
    const RotationalDerivs d = rho_rotational_derivs(f, fl);
    const double h = 1e-3;
    const double p = f.rho(fl.rotated(h));
    const double m = f.rho(fl.rotated(-h));
    const double c = f.rho(fl);
    CHECK(std::abs(d.first - (p - m) / (2 * h)) < 1e-6);
    CHECK(std::abs(d.second - (p - 2 * c + m) / (h * h)) < 1e-4);
  }

  TEST_CASE("spatial step degeneration") {
    const FlagDensityField f = field_of(spec_of(Family::Constant));
    const Flag fl = Flag::from_line(Vec3::Zero(), Direction(1, 0, 0), 0.0);
    CHECK_THROWS_AS(rho_spatial_derivs(f, fl, 1e-8), StepDegeneration);
    const SpatialDerivs d = rho_spatial_derivs(f, fl, 1e-2);
    CHECK(std::abs(d.dy) < 1e-10);
    CHECK(std::abs(d.dyy) < 1e-8);
  }

  TEST_CASE("bundle lines lie in the plane") {
    const Direction n(0.2, 0.9, -0.3);
    for (double phi : {0.0, 1.0, 4.0}) {
      const Vec3 l = bundle_line(n, phi, 0.3);
      CHECK(std::abs(l.dot(n.vec())) < 1e-14);
      CHECK(l.norm() == doctest::Approx(1.0));
    }
    const TangentFrame fr = frame_of_normal(n);
    CHECK((bundle_line(n, 0.0) - fr.e1).norm() < 1e-14);
  }

  TEST_CASE("constant density reconstructs exactly") {
    const FlagDensityField f = field_of(spec_of(Family::Constant, 0.7));
    for (const PlaneCoords& e : random_planes(3, 3)) {
      const ReconstructionResult r = reconstruct_plane(f, e.canonical());
      CHECK(std::abs(r.value - 0.7) < 1e-6);
      CHECK(std::abs(r.mass - 1.4 * kPi) < 1e-10);
    }
    const PlaneCoords e{0.3, Direction(0, 0, 1)};
    CHECK_THROWS_AS(reconstruct_plane(f, e, Vec3(0, 0, 0)), std::invalid_argument);
  }

  TEST_CASE("printed normalization gives 2pi times the density") {
    ReconstructionConfig cfg;
    cfg.c_norm = kPrintedNormalization;
    const FlagDensityField f = field_of(spec_of(Family::Constant, 0.7), cfg);
    const ReconstructionResult r = reconstruct_plane(f, PlaneCoords{0.2, Direction(1, 2, 3)});
    CHECK(std::abs(r.value - 2 * kPi * 0.7) < 1e-4);
  }

  TEST_CASE("disc identity for the constant family") {
    const SyntheticDensitySpec s = spec_of(Family::Constant);
    const FlagDensityField f = field_of(s);
    const Vec3 x(0.1, 0.0, 0.2);
    const Direction n(0.0, 0.6, 0.8);
    for (double alpha : {0.2, 0.4}) {
      const double lhs = disc_identity_lhs(make_density(s), x, n, alpha, 8, 32);
      // 2pi * area of the spherical cap.
      CHECK(lhs == doctest::Approx(2 * kPi * 2 * kPi * (1 - std::cos(alpha))).epsilon(1e-10));
      CHECK(disc_identity_rhs(f, x, n, alpha) == doctest::Approx(lhs).epsilon(1e-6));
    }
  }
}
