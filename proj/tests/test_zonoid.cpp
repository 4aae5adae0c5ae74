#include "doctest.h"

#include "crofton/transforms.hpp"
#include "crofton/zonoid.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace crofton;

namespace {
constexpr double kPi = std::numbers::pi;

// 2pi * 2 * int_0^1 t P_n(t) dt for even n >= 2, from the closed-form moment
//   int_0^1 t P_n = (-1)^(n/2+1) (n-2)! / (2^n (n/2-1)! (n/2+1)!).
double closed_form_multiplier(int n) {
  if (n == 0) return 2.0 * kPi;
  if (n % 2 == 1) return 0.0;
  const int k = n / 2;
  const double log_mag = std::lgamma(n - 1.0) - n * std::log(2.0) - std::lgamma(k) - std::lgamma(k + 2.0);
  const double sign = (k + 1) % 2 == 0 ? 1.0 : -1.0;
  return 4.0 * kPi * sign * std::exp(log_mag);
}

Eigen::VectorXd random_even(std::mt19937_64& rng, int L) {
  std::normal_distribution<double> n;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(harmonic_count(L));
  for (int d = 0; d <= L; d += 2)
    for (int m = -d; m <= d; ++m) c[harmonic_index(d, m)] = n(rng);
  return c;
}
}  // namespace

TEST_SUITE("zonoid") {
  TEST_CASE("multipliers match the closed form") {
    const MultiplierTable& t = multipliers(30);
    CHECK(t.band_limit() == 30);
    for (int n = 0; n <= 30; ++n) {
      CHECK(std::abs(t[n] - closed_form_multiplier(n)) < 1e-12);
    }
    CHECK(t[2] == doctest::Approx(kPi / 2));
    CHECK(t[4] == doctest::Approx(-kPi / 12));
    CHECK(&multipliers(30) == &t);
  }

  TEST_CASE("constant metric inverts to a constant") {
    const auto q = shared_quadrature(6);
    const SphericalFunction H =
        SphericalFunction::from_values(q, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(q->size()), 2 * kPi));
    const SphericalFunction h = zonoid_invert(H, 6);
    CHECK(h.parity() == Parity::Even);
    CHECK((h.values().array() - 1.0).abs().maxCoeff() < 1e-10);
  }

  TEST_CASE("round trip at band limit 8") {
    std::mt19937_64 rng(17);
    const int L = 8;
    const auto q = shared_quadrature(L);
    const Eigen::VectorXd hc = random_even(rng, L);
    const SphericalFunction h = SphericalFunction::from_coefficients(q, hc);
    // Forward by direct quadrature of |<Omega, xi>| h.
    Eigen::VectorXd Hv(static_cast<Eigen::Index>(q->size()));
    for (std::size_t j = 0; j < q->size(); ++j)
      Hv[static_cast<Eigen::Index>(j)] =
          cosine_transform([&](const Vec3& xi) { return h(xi); }, Direction(q->nodes()[j]), 8);
    const SphericalFunction H = SphericalFunction::from_values(q, Hv);
    const SphericalFunction back = zonoid_invert(H, L);
    CHECK((back.coefficients() - hc).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((back.values() - h.values()).cwiseAbs().maxCoeff() < 1e-7);
  }

  TEST_CASE("odd input is rejected") {
    const auto q = shared_quadrature(4);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(harmonic_count(4));
    c[0] = 1.0;
    c[harmonic_index(1, 0)] = 0.1;
    const SphericalFunction H = SphericalFunction::from_coefficients(q, c);
    CHECK_THROWS_AS(zonoid_invert(H, 4), OddPartTooLarge);
    try {
      zonoid_invert(H, 4);
    } catch (const OddPartTooLarge& e) {
      CHECK(e.odd_energy() == doctest::Approx(0.01 / 1.01));
    }
    // A larger tolerance accepts it and discards the odd part.
    const SphericalFunction h = zonoid_invert(H, 4, 0.5);
    CHECK(h.coefficients()[harmonic_index(1, 0)] == 0.0);
  }

  TEST_CASE("band limit above the samples is rejected") {
    const auto q = shared_quadrature(4);
    const SphericalFunction H = SphericalFunction::from_coefficients(q, Eigen::VectorXd::Zero(harmonic_count(4)));
    CHECK_THROWS_AS(zonoid_invert(H, 6), std::invalid_argument);
    CHECK_THROWS_AS(MultiplierTable(-1), std::invalid_argument);
  }

  TEST_CASE("degree cap error carries the effective band limit") {
    const DegreeCapExceeded e(20, 14);
    CHECK(e.effective_band_limit() == 14);
  }
}
