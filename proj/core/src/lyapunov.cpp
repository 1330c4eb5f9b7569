#include "levycouple/lyapunov.hpp"

#include <cmath>

namespace lvc {

namespace {
// glue p(s) = 11/8 + (3/4) s - (1/8) s^2 with s = |x|^2:
//   p(1) = 2, 2 p'(1) = 1 (radial slope 1), radial curvature 0 at |x| = 1,
//   radial slope 2 r p'(r^2) = (3/2) r - r^3 / 2 stays in [0, 1] on [0, 1].
double glue(double s) { return 11.0 / 8.0 + 0.75 * s - 0.125 * s * s; }
double glue_d(double s) { return 0.75 - 0.25 * s; }
}  // namespace

double LyapunovSpec::radial(double r) const {
  if (r >= 1.0) return 1.0 + r;
  return glue(r * r);
}

double LyapunovSpec::radial_d1(double r) const {
  if (r >= 1.0) return 1.0;
  return 2.0 * r * glue_d(r * r);
}

double LyapunovSpec::operator()(const Vec& x) const { return radial(norm(x)); }

Vec LyapunovSpec::grad(const Vec& x) const {
  double r = norm(x);
  if (r == 0.0) return Vec(x.size(), 0.0);
  if (r >= 1.0) return scaled(x, 1.0 / r);
  return scaled(x, 2.0 * glue_d(r * r));
}

std::optional<double> LyapunovSpec::level_radius(double v) const {
  if (v < v_origin) return std::nullopt;
  if (v >= 2.0) return v - 1.0;
  // solve glue(s) = v: s = 3 - sqrt(20 - 8 v)
  double s = 3.0 - std::sqrt(20.0 - 8.0 * v);
  return std::sqrt(std::max(0.0, s));
}

LyapunovSpec lyapunov_V(int dim) {
  if (dim < 1) throw Error("lyapunov_V: dim >= 1 required");
  LyapunovSpec v;
  v.dim = dim;
  return v;
}

}  // namespace lvc
