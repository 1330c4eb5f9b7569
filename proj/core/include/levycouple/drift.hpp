#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "levycouple/common.hpp"
#include "levycouple/rng.hpp"

namespace lvc {

using DriftFn = std::function<Vec(const Vec&)>;

// Declared regularity constants; NaN-free optionals, validated on demand.
struct DriftConstants {
  // contractivity-at-infinity record for the full drift:
  // <b(x)-b(y), x-y>/|x-y| <= K1 |x-y| 1_{|x-y|<=l0} - K2 |x-y| 1_{|x-y|>l0} + K3 W1
  std::optional<double> K1, K2, K3, l0;
  // same record for the mean-field b1 term
  std::optional<double> K1b1, K2b1, rb1;
  // Lipschitz constant of the interaction kernel b2 (with b2(0) = 0)
  std::optional<double> Kb2;
  // |b2 * mu(x)| <= B0 (1 + int |z| mu(dz) + |x|)
  std::optional<double> B0;
  // <b1(x), x> <= -lambda |x|^2 + C0
  std::optional<double> lambda_dissip, C0_dissip;
};

struct DistributionFree {
  DriftFn b;
};

// b(x, mu) = b1(x) + int b2(x - z) mu(dz); b2(0) = 0.
// When b2(u) = s u exactly, declaring s enables the closed-form
// cloud-mean fast path (b2 * mu)(x) = s (x - mean(mu)); the declaration is
// spot-checked before use.
struct MeanField {
  DriftFn b1;
  DriftFn b2;
  std::optional<double> b2_linear_slope;
};

struct DriftSpec {
  std::variant<DistributionFree, MeanField> kind;
  DriftConstants constants;
  int dim = 1;

  bool mean_field() const { return std::holds_alternative<MeanField>(kind); }
  const DriftFn& b() const { return std::get<DistributionFree>(kind).b; }
  const DriftFn& b1() const { return std::get<MeanField>(kind).b1; }
  const DriftFn& b2() const { return std::get<MeanField>(kind).b2; }
};

struct DriftValidationConfig {
  int n_pairs = 10000;
  double point_scale = 5.0;  // sampling spread for the random probes
  double tolerance = 1e-9;   // slack per unit of the dominating scale
};

// Spot-validates every declared constant on random point pairs.
// Throws InvalidDriftConstants on the first violated inequality.
void validate_constants(const DriftSpec& spec, std::uint64_t seed,
                        const DriftValidationConfig& cfg = {});

}  // namespace lvc
