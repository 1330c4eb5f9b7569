#pragma once

#include <optional>

#include "levycouple/common.hpp"

namespace lvc {

// Radial Lyapunov function: V(x) = 1 + |x| for |x| >= 1, glued on [0,1] by a
// polynomial in |x|^2 with matching value and first two radial derivatives at
// |x| = 1 and zero gradient at the origin. The glue keeps the radial slope in
// [0,1], so |grad V| attains its sup on {|x| >= 1}.
struct LyapunovSpec {
  int dim = 1;
  double grad_norm_inf = 1.0;
  double hess_norm_inf = 1.5;
  double sup_unit_ball = 2.0;  // max of V over the closed unit ball
  double v_origin = 11.0 / 8.0;

  double radial(double r) const;     // Vbar with V(x) = Vbar(|x|)
  double radial_d1(double r) const;  // Vbar'
  double operator()(const Vec& x) const;
  Vec grad(const Vec& x) const;

  // Radius of the sublevel set {V <= v}; nullopt when the set is empty.
  std::optional<double> level_radius(double v) const;
};

LyapunovSpec lyapunov_V(int dim);

}  // namespace lvc
