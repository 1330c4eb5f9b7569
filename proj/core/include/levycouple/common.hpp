#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lvc {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec scaled(std::span<const double> a, double c) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

// (x)_kappa = (1 ∧ kappa/|x|) x, with (0)_kappa = 0.
inline Vec clip_to_length(std::span<const double> x, double kappa) {
  double n = norm(x);
  if (n <= kappa || n == 0.0) return Vec(x.begin(), x.end());
  return scaled(x, kappa / n);
}

// Order-independent-enough reduction: pairwise summation, O(log n) error growth.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

inline double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : pairwise_sum(v) / static_cast<double>(v.size());
}

// Sample standard error of the mean.
inline double se_of_mean(std::span<const double> v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double m = mean_of(v);
  Vec sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - m) * (v[i] - m);
  double var = pairwise_sum(sq) / static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

constexpr double kInf = std::numeric_limits<double>::infinity();

// Error taxonomy shared across modules.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct QuadratureFailure : Error { using Error::Error; };
struct SingularPoint : Error { using Error::Error; };
struct NoDensity : Error { using Error::Error; };
struct DensityRequired : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct NumericBlowup : Error { using Error::Error; };
struct SizeMismatch : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct NonPositiveValues : Error { using Error::Error; };
struct ConfigInvalid : Error { using Error::Error; };
struct InvalidDriftConstants : Error { using Error::Error; };
struct DegenerateOverlap : Error { using Error::Error; };
struct InvalidSigma : Error { using Error::Error; };
struct CertificationFailed : Error { using Error::Error; };
struct SamplingUnsupported : Error { using Error::Error; };

}  // namespace lvc
