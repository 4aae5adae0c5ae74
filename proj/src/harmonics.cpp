#include "crofton/harmonics.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace crofton {

namespace {
// Recurrence factors a_{n,m}, b_{n,m} for Pbar_n^m, laid out per order m.
struct RecurrenceTable {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<std::size_t> offset;  // start of order m
  std::vector<double> diagonal;     // sqrt((2m+1)/(2m)), 1 at m = 0
};

constexpr int kMaxTabulated = 512;

const RecurrenceTable& recurrence_table(int band_limit) {
  static std::array<std::once_flag, kMaxTabulated + 1> once;
  static std::array<RecurrenceTable, kMaxTabulated + 1> tables;
  if (band_limit > kMaxTabulated) throw std::invalid_argument("evaluate_harmonics: band limit too large");
  std::call_once(once[static_cast<std::size_t>(band_limit)], [band_limit] {
    RecurrenceTable& t = tables[static_cast<std::size_t>(band_limit)];
    t.diagonal.assign(static_cast<std::size_t>(band_limit) + 1, 1.0);
    for (int m = 0; m <= band_limit; ++m) {
      if (m > 0) t.diagonal[static_cast<std::size_t>(m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      t.offset.push_back(t.a.size());
      for (int n = m + 2; n <= band_limit; ++n) {
        const double nn = static_cast<double>(n) * n;
        const double mm = static_cast<double>(m) * m;
        t.a.push_back(std::sqrt((4.0 * nn - 1.0) / (nn - mm)));
        t.b.push_back(std::sqrt(((n - 1.0) * (n - 1.0) - mm) / (4.0 * (n - 1.0) * (n - 1.0) - 1.0)));
      }
    }
  });
  return tables[static_cast<std::size_t>(band_limit)];
}
}  // namespace

void evaluate_harmonics(int band_limit, const Vec3& dir, std::span<double> out) {
  const int count = harmonic_count(band_limit);
  if (static_cast<int>(out.size()) < count) {
    throw std::invalid_argument("evaluate_harmonics: output span too small");
  }
  const RecurrenceTable& table = recurrence_table(band_limit);
  const double x = dir.x();
  const double y = dir.y();
  const double z = dir.z();

  // q holds Pbar_n^m / sin^m(theta) for the current order m; the sin^m
  // factor is carried by Re/Im (x + iy)^m so no division by sin(theta) occurs.
  thread_local std::vector<double> q;
  q.resize(static_cast<std::size_t>(band_limit + 1));

  double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  double cm = 1.0;  // Re (x + iy)^m
  double sm = 0.0;  // Im (x + iy)^m
  for (int m = 0; m <= band_limit; ++m) {
    if (m > 0) {
      pmm *= table.diagonal[static_cast<std::size_t>(m)];
      const double c = cm * x - sm * y;
      sm = cm * y + sm * x;
      cm = c;
    }
    q[static_cast<std::size_t>(m)] = pmm;
    if (m + 1 <= band_limit) q[static_cast<std::size_t>(m + 1)] = std::sqrt(2.0 * m + 3.0) * z * pmm;
    const double* a = table.a.data() + table.offset[static_cast<std::size_t>(m)];
    const double* b = table.b.data() + table.offset[static_cast<std::size_t>(m)];
    for (int n = m + 2; n <= band_limit; ++n, ++a, ++b) {
      q[static_cast<std::size_t>(n)] =
          *a * (z * q[static_cast<std::size_t>(n - 1)] - *b * q[static_cast<std::size_t>(n - 2)]);
    }
    if (m == 0) {
      for (int n = 0; n <= band_limit; ++n) out[static_cast<std::size_t>(n * n + n)] = q[static_cast<std::size_t>(n)];
    } else {
      const double c = std::numbers::sqrt2 * cm;
      const double s = std::numbers::sqrt2 * sm;
      for (int n = m; n <= band_limit; ++n) {
        const double p = q[static_cast<std::size_t>(n)];
        out[static_cast<std::size_t>(n * n + n + m)] = p * c;
        out[static_cast<std::size_t>(n * n + n - m)] = p * s;
      }
    }
  }
}

Eigen::VectorXd evaluate_harmonics(int band_limit, const Vec3& dir) {
  Eigen::VectorXd out(harmonic_count(band_limit));
  evaluate_harmonics(band_limit, dir, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

int band_limit_of(const Eigen::VectorXd& coeffs) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(coeffs.size())))) - 1;
  if (harmonic_count(n) != coeffs.size()) {
    throw std::invalid_argument("coefficient vector length is not (L+1)^2");
  }
  return n;
}

double synthesize_at(const Eigen::VectorXd& coeffs, const Vec3& dir) {
  const int band_limit = band_limit_of(coeffs);
  thread_local std::vector<double> y;
  y.resize(static_cast<std::size_t>(coeffs.size()));
  evaluate_harmonics(band_limit, dir, y);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < coeffs.size(); ++k) sum += coeffs[k] * y[static_cast<std::size_t>(k)];
  return sum;
}

Eigen::VectorXd sh_analyze(const SphericalQuadrature& quad, const Eigen::VectorXd& values) {
  if (static_cast<std::size_t>(values.size()) != quad.size()) {
    throw std::invalid_argument("sh_analyze: values do not match quadrature size");
  }
  const Eigen::Map<const Eigen::VectorXd> w(quad.weights().data(), static_cast<Eigen::Index>(quad.size()));
  return quad.harmonic_basis().transpose() * w.cwiseProduct(values);
}

Eigen::VectorXd sh_analyze(const SphericalFunction& f) { return sh_analyze(f.quadrature(), f.values()); }

Eigen::VectorXd sh_synthesize(const SphericalQuadrature& quad, const Eigen::VectorXd& coeffs) {
  const Eigen::Index k = harmonic_count(quad.band_limit());
  if (coeffs.size() > k) throw std::invalid_argument("sh_synthesize: coefficients exceed band limit");
  return quad.harmonic_basis().leftCols(coeffs.size()) * coeffs;
}

double odd_energy_fraction(const Eigen::VectorXd& coeffs) {
  const int band_limit = band_limit_of(coeffs);
  double odd = 0.0;
  double total = 0.0;
  for (int n = 0; n <= band_limit; ++n) {
    for (int m = -n; m <= n; ++m) {
      const double c = coeffs[harmonic_index(n, m)];
      total += c * c;
      if (n % 2 == 1) odd += c * c;
    }
  }
  return total > 0.0 ? odd / total : 0.0;
}

namespace {
Parity detect_parity(const Eigen::VectorXd& coeffs) {
  const double odd = odd_energy_fraction(coeffs);
  if (odd <= 1e-10) return Parity::Even;
  if (odd >= 1.0 - 1e-10) return Parity::Odd;
  return Parity::General;
}
}  // namespace

SphericalFunction SphericalFunction::from_values(std::shared_ptr<const SphericalQuadrature> quad,
                                                 Eigen::VectorXd values,
                                                 std::optional<Parity> parity) {
  if (!quad) throw std::invalid_argument("SphericalFunction: null quadrature");
  SphericalFunction f;
  f.coeffs_ = sh_analyze(*quad, values);
  f.values_ = std::move(values);
  f.quad_ = std::move(quad);
  f.parity_ = parity.value_or(detect_parity(f.coeffs_));
  return f;
}

SphericalFunction SphericalFunction::from_coefficients(std::shared_ptr<const SphericalQuadrature> quad,
                                                       Eigen::VectorXd coeffs,
                                                       std::optional<Parity> parity) {
  if (!quad) throw std::invalid_argument("SphericalFunction: null quadrature");
  const Eigen::Index k = harmonic_count(quad->band_limit());
  if (coeffs.size() > k) throw std::invalid_argument("SphericalFunction: coefficients exceed band limit");
  band_limit_of(coeffs);
  if (coeffs.size() < k) {
    Eigen::VectorXd padded = Eigen::VectorXd::Zero(k);
    padded.head(coeffs.size()) = coeffs;
    coeffs = std::move(padded);
  }
  SphericalFunction f;
  f.values_ = sh_synthesize(*quad, coeffs);
  f.coeffs_ = std::move(coeffs);
  f.quad_ = std::move(quad);
  f.parity_ = parity.value_or(detect_parity(f.coeffs_));
  return f;
}

double SphericalFunction::odd_energy_fraction() const { return crofton::odd_energy_fraction(coeffs_); }

}  // namespace crofton
