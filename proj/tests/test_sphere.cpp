#include "doctest.h"

#include "crofton/harmonics.hpp"
#include "crofton/quadrature.hpp"
#include "crofton/sphere.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace crofton;

namespace {
constexpr double kPi = std::numbers::pi;

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

double angle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }
}  // namespace

TEST_SUITE("sphere") {
  TEST_CASE("direction normalizes and rejects zero") {
    const Direction d(3.0, 0.0, 4.0);
    CHECK(d.vec().norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.x() == doctest::Approx(0.6));
    CHECK_THROWS_AS(Direction(0.0, 0.0, 0.0), std::invalid_argument);
  }

  TEST_CASE("sphere coordinates round trip") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      const Direction d(random_unit(rng));
      const Direction back = SphereCoords::from_direction(d).to_direction();
      CHECK((back.vec() - d.vec()).norm() < 1e-12);
    }
  }

  TEST_CASE("frame of normal") {
    const TangentFrame z = frame_of_normal(Direction(0, 0, 1));
    CHECK((z.e1 - Vec3(1, 0, 0)).norm() < 1e-15);
    CHECK((z.e2 - Vec3(0, 1, 0)).norm() < 1e-15);

    std::mt19937_64 rng(3);
    std::vector<Vec3> normals{Vec3(0, 0, -1), Vec3(1, 1, 1).normalized(), Vec3(1e-8, 0, 1).normalized()};
    for (int i = 0; i < 100; ++i) normals.push_back(random_unit(rng));
    for (const Vec3& n : normals) {
      const TangentFrame f = frame_of_normal(Direction(n));
      CHECK(std::abs(f.e1.dot(n)) < 1e-12);
      CHECK(std::abs(f.e2.dot(n)) < 1e-12);
      CHECK(std::abs(f.e1.dot(f.e2)) < 1e-12);
      CHECK(std::abs(f.e1.norm() - 1.0) < 1e-12);
      CHECK(f.e1.cross(f.e2).dot(n) == doctest::Approx(1.0));
    }
    // Deterministic.
    const TangentFrame a = frame_of_normal(Direction(normals[1]));
    const TangentFrame b = frame_of_normal(Direction(normals[1]));
    CHECK(a.e1 == b.e1);
  }

  TEST_CASE("flag representations convert both ways") {
    const Flag f(Vec3::Zero(), Direction(1, 0, 0), Direction(0, 0, 1));
    CHECK(f.line_angle() == doctest::Approx(0.0).epsilon(1e-15));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Direction line(random_unit(rng));
      const double Phi = ang(rng);
      const Flag a = Flag::from_line(Vec3(1, 2, 3), line, Phi);
      CHECK(std::abs(a.line().dot(a.normal())) < 1e-12);
      const Flag b = Flag::from_normal(a.location(), a.normal(), a.line_angle());
      worst = std::max(worst, (b.line().vec() - line.vec()).norm());
      worst = std::max(worst, angle_distance(b.plane_angle(), Phi));
    }
    CHECK(worst < 1e-9);

    const Direction line(random_unit(rng));
    const Flag p = Flag::from_line(Vec3::Zero(), line, 0.4);
    const Flag q = Flag::from_line(Vec3::Zero(), line, 0.4 + 2.0 * kPi);
    CHECK((p.normal().vec() - q.normal().vec()).norm() < 1e-12);
    CHECK(angle_distance(p.line_angle(), q.line_angle()) < 1e-12);
  }

  TEST_CASE("flag frame and rotation") {
    const Flag f(Vec3::Zero(), Direction(1, 0, 0), Direction(0, 0, 1));
    const FlagFrame fr = f.frame();
    CHECK((fr.x2 - Vec3(0, -1, 0)).norm() < 1e-15);
    CHECK(fr.x1.cross(fr.x2).dot(fr.x3) == doctest::Approx(-1.0));
    // Positive rotation is right-handed about the line.
    const Flag r = f.rotated(kPi / 2);
    CHECK((r.normal().vec() - Vec3(0, -1, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(Flag(Vec3::Zero(), Direction(1, 0, 0), Direction(1, 0, 1)), std::invalid_argument);
  }

  TEST_CASE("gauss legendre") {
    const GaussLegendre gl = gauss_legendre(5, 0.0, 2.0);
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += gl.weights[i] * std::pow(gl.nodes[i], 9);
    CHECK(s == doctest::Approx(102.4).epsilon(1e-13));
  }

  TEST_CASE("spherical quadrature") {
    for (int L : {0, 3, 8, 16}) {
      const SphericalQuadrature q = build_quadrature(L);
      CHECK(q.latitude_count() >= L + 1);
      CHECK(q.longitude_count() >= 2 * L + 1);
      std::vector<double> one(q.size(), 1.0);
      CHECK(std::abs(q.integrate(one) - 4.0 * kPi) < 1e-12);
    }
    const SphericalQuadrature q = build_quadrature(8);
    const Vec3 u = Vec3(0.2, -0.7, 0.4).normalized();
    std::vector<double> lin;
    std::vector<double> zz;
    for (const Vec3& n : q.nodes()) {
      lin.push_back(n.dot(u));
      zz.push_back(n.z() * n.z());
    }
    CHECK(std::abs(q.integrate(lin)) < 1e-12);
    CHECK(std::abs(q.integrate(zz) - 4.0 * kPi / 3.0) < 1e-12);
  }

  TEST_CASE("harmonics are orthonormal on the rule") {
    const int L = 10;
    const auto q = shared_quadrature(L);
    const Eigen::MatrixXd& B = q->harmonic_basis();
    const Eigen::Map<const Eigen::VectorXd> w(q->weights().data(), static_cast<Eigen::Index>(q->size()));
    const Eigen::MatrixXd gram = B.transpose() * w.asDiagonal() * B;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    CHECK((gram - id).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("harmonic closed forms") {
    // Y_00 = 1/sqrt(4pi), Y_10 = sqrt(3/4pi) z, Y_11 = sqrt(3/4pi) x, Y_1,-1 = sqrt(3/4pi) y,
    // Y_20 = sqrt(5/16pi)(3z^2 - 1), Y_21 = sqrt(15/4pi) xz.
    const Vec3 d = Vec3(0.3, -0.5, 0.7).normalized();
    const Eigen::VectorXd y = evaluate_harmonics(2, d);
    const double c1 = std::sqrt(3.0 / (4.0 * kPi));
    CHECK(y[harmonic_index(0, 0)] == doctest::Approx(1.0 / std::sqrt(4.0 * kPi)));
    CHECK(y[harmonic_index(1, 0)] == doctest::Approx(c1 * d.z()));
    CHECK(y[harmonic_index(1, 1)] == doctest::Approx(c1 * d.x()));
    CHECK(y[harmonic_index(1, -1)] == doctest::Approx(c1 * d.y()));
    CHECK(y[harmonic_index(2, 0)] == doctest::Approx(std::sqrt(5.0 / (16.0 * kPi)) * (3 * d.z() * d.z() - 1)));
    CHECK(y[harmonic_index(2, 1)] == doctest::Approx(std::sqrt(15.0 / (4.0 * kPi)) * d.x() * d.z()));
    // Poles are regular.
    const Eigen::VectorXd pole = evaluate_harmonics(6, Vec3(0, 0, 1));
    CHECK(pole.allFinite());
  }

  TEST_CASE("analysis and synthesis") {
    const auto q = shared_quadrature(8);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(harmonic_count(8));
    c[harmonic_index(2, 1)] = 1.0;
    const SphericalFunction f = SphericalFunction::from_coefficients(q, c);
    const Eigen::VectorXd a = sh_analyze(*q, f.values());
    CHECK(a[harmonic_index(2, 1)] == doctest::Approx(1.0).epsilon(1e-12));
    Eigen::VectorXd rest = a;
    rest[harmonic_index(2, 1)] = 0.0;
    CHECK(rest.cwiseAbs().maxCoeff() < 1e-10);

    const SphericalFunction one =
        SphericalFunction::from_values(q, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(q->size())));
    CHECK(one.coefficients()[0] == doctest::Approx(std::sqrt(4.0 * kPi)));
    CHECK(one.coefficients().tail(one.coefficients().size() - 1).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(one.parity() == Parity::Even);

    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    Eigen::VectorXd r(harmonic_count(8));
    for (Eigen::Index k = 0; k < r.size(); ++k) r[k] = n(rng);
    const Eigen::VectorXd back = sh_analyze(*q, sh_synthesize(*q, r));
    CHECK((back - r).cwiseAbs().maxCoeff() < 1e-10);
    // Parseval.
    const SphericalFunction g = SphericalFunction::from_coefficients(q, r);
    CHECK(q->integrate(Eigen::VectorXd(g.values().array().square())) == doctest::Approx(r.squaredNorm()).epsilon(1e-10));
    CHECK(g.parity() == Parity::General);
    CHECK(g(Vec3(0.1, 0.2, 0.3).normalized()) ==
          doctest::Approx(synthesize_at(r, Vec3(0.1, 0.2, 0.3).normalized())));
  }

  TEST_CASE("rotation rates closed form") {
    const PhiRates a = phi_rotation_derivatives({0.3, 1.0}, 0.0);
    CHECK(a.line_angle == doctest::Approx(0.0));
    CHECK(a.latitude == doctest::Approx(-1.0));
    CHECK(a.longitude == doctest::Approx(0.0));
    const PhiRates b = phi_rotation_derivatives({0.0, 0.5}, kPi / 2);
    CHECK(b.line_angle == doctest::Approx(0.0));
    CHECK(std::abs(b.latitude) < 1e-15);
    CHECK(b.longitude == doctest::Approx(1.0));
    CHECK_THROWS_AS(phi_rotation_derivatives({kPi / 2, 0.0}, 0.3), PoleError);
  }

  TEST_CASE("rotation rates match the rotated flag") {
    // Finite-difference oracle: rotate the actual flag and read off coordinates.
    auto angles = [](const Flag& f) {
      const SphereCoords c = SphereCoords::from_direction(f.normal());
      const Vec3& g = f.line().vec();
      return std::array<double, 3>{std::atan2(g.dot(local_north(c)), g.dot(local_east(c))), c.latitude,
                                   c.longitude};
    };
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
    const double h = 1e-4;
    for (int i = 0; i < 50; ++i) {
      Vec3 n = random_unit(rng);
      if (std::abs(n.z()) > 0.9) continue;
      const Flag f = Flag::from_normal(Vec3::Zero(), Direction(n), ang(rng));
      const auto a0 = angles(f);
      const PhiRates r = phi_rotation_derivatives({a0[1], a0[2]}, a0[0]);
      const auto p = angles(f.rotated(h));
      const auto m = angles(f.rotated(-h));
      CHECK(std::abs(wrap_angle(p[0] - m[0]) / (2 * h) - r.line_angle) < 1e-6);
      CHECK(std::abs((p[1] - m[1]) / (2 * h) - r.latitude) < 1e-6);
      CHECK(std::abs(wrap_angle(p[2] - m[2]) / (2 * h) - r.longitude) < 1e-6);
    }
  }
}
