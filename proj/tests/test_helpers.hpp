#pragma once

#include <cmath>
#include <functional>

#include "levycouple/levy.hpp"

namespace lvt {

using namespace lvc;

inline LevyMeasureSpec stable_1d(double alpha = 1.5, double scale = 1.0) {
  LevyMeasureSpec s;
  s.dim = 1;
  s.components.push_back(IsotropicStable{alpha, scale});
  return s;
}

inline LevyMeasureSpec cp_uniform_1d(double intensity = 1.0, double halfwidth = 1.0) {
  CompoundPoisson cp;
  cp.intensity = intensity;
  double hw = halfwidth;
  cp.jump_density = [hw](const Vec& z) {
    return std::abs(z[0]) <= hw ? 0.5 / hw : 0.0;
  };
  cp.jump_sampler = [hw](RngStream& rng) {
    return Vec{hw * (2.0 * rng.uniform01() - 1.0)};
  };
  cp.support_radius = hw;
  LevyMeasureSpec s;
  s.dim = 1;
  s.components.push_back(cp);
  return s;
}

// density |z|^{-1-alpha} cut to |z| <= radius: infinite activity near zero
// with every moment finite
inline LevyMeasureSpec truncated_stable_1d(double alpha = 1.5, double scale = 1.0,
                                           double radius = 1.0) {
  UserDensity ud;
  double a = alpha, c = scale, R = radius;
  ud.q = [a, c, R](const Vec& z) {
    double r = std::abs(z[0]);
    if (r > R || r == 0.0) return r == 0.0 ? lvc::kInf : 0.0;
    return c * std::pow(r, -1.0 - a);
  };
  ud.isotropic = true;
  ud.radial_profile_monotone = true;
  ud.support_radius = radius;
  LevyMeasureSpec s;
  s.dim = 1;
  s.components.push_back(ud);
  return s;
}

inline LevyMeasureSpec empty_measure(int dim = 1) {
  LevyMeasureSpec s;
  s.dim = dim;
  return s;
}

// closed form for 1D stable: mu_x(R) = (2 scale / alpha) (|x|/2)^{-alpha}
inline double stable_overlap_closed_form(double alpha, double scale, double x) {
  return 2.0 * scale / alpha * std::pow(std::abs(x) / 2.0, -alpha);
}

// independent trapezoid oracle for int min(q(z), q(z - x)) dz on [lo, hi]
inline double overlap_trapezoid_oracle(const std::function<double(double)>& q, double x,
                                       double lo, double hi, int n = 2000000) {
  double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double z = lo + i * h;
    double v = std::min(q(z), q(z - x));
    if (!std::isfinite(v)) v = 0.0;  // measure-zero singular nodes
    acc += (i == 0 || i == n) ? 0.5 * v : v;
  }
  return acc * h;
}

}  // namespace lvt
