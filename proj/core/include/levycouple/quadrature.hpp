#pragma once

#include <functional>

#include "levycouple/common.hpp"

namespace lvc {

struct QuadratureConfig {
  double rel_tol = 1e-6;   // 1D target (spec: 1e-6 in 1D, 1e-3 for d >= 2)
  double abs_tol = 1e-12;
  int limit = 512;         // max subdivisions per call
  std::uint64_t mc_samples = 400000;  // Monte-Carlo fallback for d >= 2
};

using Integrand = std::function<double(double)>;

// Adaptive integration on [a,b]; handles integrable endpoint singularities.
double integrate_finite(const Integrand& f, double a, double b,
                        const QuadratureConfig& cfg = {});

// Adaptive integration on [a, +inf).
double integrate_upper_tail(const Integrand& f, double a,
                            const QuadratureConfig& cfg = {});

// Adaptive integration on (-inf, b].
double integrate_lower_tail(const Integrand& f, double b,
                            const QuadratureConfig& cfg = {});

// Regularized lower incomplete gamma P(a, x); used by tests as an
// independent closed form for the psi segment integrals.
double gamma_inc_p(double a, double x);

}  // namespace lvc
