#pragma once

// Synthetic plane densities with known ground truth and the verification
// suites built on them.

#include "crofton/reconstruction.hpp"
#include "crofton/transforms.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace crofton {

enum class Family { Constant, TranslationInvariant, GaussianBump };

std::string family_name(Family f);
/// Accepts "constant", "translation-invariant", "gaussian-bump".
Family parse_family(const std::string& name);

/// constant:              h = c
/// translation-invariant: h = 1 + beta <xi, u>^2
/// gaussian-bump:         h = 1 + beta exp(-(p - <q, xi>)^2 / sigma^2) <xi, u>^2
/// Every family is even under (p, xi) -> (-p, -xi) term by term, so no
/// explicit symmetrization is needed. Length scale is 1.
struct SyntheticDensitySpec {
  Family family = Family::GaussianBump;
  double c = 1.0;
  Vec3 u = Vec3(0.3, 0.5, 0.8).normalized();
  double beta = 0.5;
  Vec3 q = Vec3(0.1, -0.2, 0.15);
  double sigma = 1.0;

  void validate() const;
};

DensityField make_density(const SyntheticDensitySpec& spec);
/// d^2 h / dp^2 of the synthetic density.
double density_dpp(const SyntheticDensitySpec& spec, double p, const Vec3& xi);

inline constexpr int kDefaultForwardOrder = 12;

/// H(x, Omega) = cosine transform of the restriction of h at x, integrated
/// with a split Gauss-Legendre rule of `order` nodes per hemisphere.
MetricField forward_metric(const DensityField& h, int order = kDefaultForwardOrder);

struct Check {
  std::string name;
  std::string identity;  // what is compared
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<Check> checks;
  double seconds = 0.0;

  bool passed() const;
  nlohmann::json to_json() const;
};

Check make_check(std::string name, std::string identity, double measured, double tolerance,
                 std::string detail = {});

struct SuiteOptions {
  ReconstructionConfig config;
  int forward_order = kDefaultForwardOrder;
  int plane_count = 50;
  int oracle_plane_count = 20;
  unsigned threads = 0;  // 0: hardware concurrency
};

const std::vector<std::string>& suite_names();

/// Runs a named suite. Throws std::invalid_argument for an unknown name.
Report run_suite(const std::string& name, std::uint64_t seed, const SuiteOptions& options = {});

/// Calls body(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Planes with normals uniform on S^2 and p uniform in [-p_max, p_max].
std::vector<PlaneCoords> random_planes(std::uint64_t seed, int count, double p_max = 0.8);

struct RoundTripRow {
  PlaneCoords plane;
  double reconstructed = 0.0;
  double truth = 0.0;
  double rel_error = 0.0;
};

/// Reconstructs each plane (canonical form, foot of the perpendicular).
std::vector<RoundTripRow> round_trip(const FlagDensityField& field, const DensityField& truth,
                                     const std::vector<PlaneCoords>& planes, unsigned threads = 0);

}  // namespace crofton
