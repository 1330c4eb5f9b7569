#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "levycouple/common.hpp"

namespace lvc {

// Concave reference function with evaluators for psi, psi', psi''.
// Instances are immutable after construction and safe to share.
class PsiFunction {
 public:
  using Eval = std::function<double(double)>;

  PsiFunction() = default;
  PsiFunction(Eval f, Eval d1, Eval d2, std::vector<double> breakpoints,
              std::string construction, std::map<std::string, double> constants)
      : f_(std::move(f)), d1_(std::move(d1)), d2_(std::move(d2)),
        breakpoints_(std::move(breakpoints)), construction_(std::move(construction)),
        constants_(std::move(constants)) {}

  double operator()(double r) const { return f_(r); }
  double d1(double r) const { return d1_(r); }
  double d2(double r) const { return d2_(r); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::string& construction() const { return construction_; }
  const std::map<std::string, double>& constants() const { return constants_; }
  double constant(const std::string& k) const { return constants_.at(k); }

 private:
  Eval f_, d1_, d2_;
  std::vector<double> breakpoints_;
  std::string construction_;
  std::map<std::string, double> constants_;
};

// psi(r) = c1 r + int_0^r exp(-B s^alpha) ds on [0, 2 l0], then the affine
// tail psi(2 l0) + psi'(2 l0)(r - 2 l0). For l0 = 0 this degenerates to the
// line (c1 + 1) r. Segment integrals use adaptive quadrature over a cached
// breakpoint table; derivatives are closed-form.
PsiFunction make_concave_integral_psi(double c1, double B, double alpha, double l0);

// psi(r) = 1 - exp(-c r) on (0, 2 l0], with the bounded rational tail
// 1 - e^{-2 c l0} + c e^{-2 c l0} (r - 2 l0) / (1 + r - 2 l0) beyond.
PsiFunction make_exp_rational_psi(double c, double l0);

// Bounded variant of the concave-integral construction: the tail
// psi(2 l0) + psi'(2 l0)(r - 2 l0)/(1 + r - 2 l0) instead of the affine one.
PsiFunction make_concave_integral_psi_bounded(double c1, double B, double alpha, double l0);

// Arbitrary evaluators (negative controls in tests, user-supplied shapes).
PsiFunction make_custom_psi(PsiFunction::Eval f, PsiFunction::Eval d1, PsiFunction::Eval d2,
                            std::string name);

}  // namespace lvc
