#include "levycouple/levy.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace lvc {

namespace {

double surface_area(int dim) {
  // |S^{d-1}|; in 1D the "sphere" is two points.
  return 2.0 * std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0);
}

double component_density(const MeasureComponent& c, const Vec& z, int dim) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsotropicStable>) {
          double r = norm(z);
          return m.scale * std::pow(r, -(dim + m.alpha));
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          if (!m.jump_density) throw NoDensity("compound Poisson component lacks a jump density");
          return m.intensity * m.jump_density(z);
        } else {
          if (!m.q) throw NoDensity("user density component lacks q");
          return m.q(z);
        }
      },
      c);
}

bool component_has_density(const MeasureComponent& c) {
  return std::visit(
      [&](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsotropicStable>) return true;
        else if constexpr (std::is_same_v<T, CompoundPoisson>) return static_cast<bool>(m.jump_density);
        else return static_cast<bool>(m.q);
      },
      c);
}

bool component_finite(const MeasureComponent& c) {
  return std::holds_alternative<CompoundPoisson>(c);
}

double component_support_radius(const MeasureComponent& c) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsotropicStable>) return kInf;
        else if constexpr (std::is_same_v<T, CompoundPoisson>) return m.support_radius;
        else return m.support_radius.value_or(kInf);
      },
      c);
}

bool component_isotropic_monotone(const MeasureComponent& c) {
  return std::visit(
      [&](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsotropicStable>) return true;
        else if constexpr (std::is_same_v<T, CompoundPoisson>) return false;
        else return m.isotropic && m.radial_profile_monotone;
      },
      c);
}

bool component_isotropic(const MeasureComponent& c) {
  return std::visit(
      [&](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, IsotropicStable>) return true;
        else if constexpr (std::is_same_v<T, CompoundPoisson>) return false;
        else return m.isotropic;
      },
      c);
}

bool all_isotropic_monotone(const LevyMeasureSpec& s) {
  return std::all_of(s.components.begin(), s.components.end(), component_isotropic_monotone);
}

bool all_isotropic(const LevyMeasureSpec& s) {
  return std::all_of(s.components.begin(), s.components.end(), component_isotropic);
}

Vec axis_point(int dim, double r) {
  Vec x(dim, 0.0);
  x[0] = r;
  return x;
}

// min(q(z), q(z - x)) as a function of the scalar z (1D).
struct MinIntegrand1D {
  const LevyMeasureSpec* spec;
  double x;
  double operator()(double z) const {
    Vec a{z}, b{z - x};
    double qa = norm(a) == 0.0 ? kInf : density_nocheck(*spec, a);
    double qb = norm(b) == 0.0 ? kInf : density_nocheck(*spec, b);
    return std::min(qa, qb);
  }
};

// Radial profile of the total density for isotropic specs.
double profile(const LevyMeasureSpec& spec, double r) {
  return density_nocheck(spec, axis_point(spec.dim, r));
}

// Fraction of the sphere of radius r that lies beyond a plane at distance h.
double cap_fraction(int dim, double h, double r) {
  if (h >= r) return 0.0;
  double c = h / r;
  if (dim == 2) return std::acos(c) / std::numbers::pi;
  if (dim == 3) return 0.5 * (1.0 - c);
  throw QuadratureFailure("isotropic overlap fast path supports d <= 3");
}

double overlap_isotropic_monotone(const LevyMeasureSpec& spec, double xnorm,
                                  const QuadratureConfig& cfg) {
  // min(q(z), q(z-x)) = q(z) exactly on the half-space closer to x, so
  // mu_x = 2 * int over that half-space of q.
  double h = xnorm / 2.0;
  if (spec.dim == 1) {
    double R = support_radius(spec);
    Integrand f = [&](double r) { return profile(spec, r); };
    if (std::isfinite(R)) {
      if (h >= R) return 0.0;
      return 2.0 * integrate_finite(f, h, R, cfg);
    }
    // split at 1 to keep qags panels near the singularity small
    double inner = h < 1.0 ? integrate_finite(f, h, 1.0, cfg) : 0.0;
    double outer = integrate_upper_tail(f, std::max(h, 1.0), cfg);
    return 2.0 * (inner + outer);
  }
  double S = surface_area(spec.dim);
  Integrand f = [&](double r) {
    return profile(spec, r) * std::pow(r, spec.dim - 1) * S * cap_fraction(spec.dim, h, r);
  };
  double R = support_radius(spec);
  if (std::isfinite(R)) {
    if (h >= R) return 0.0;
    return 2.0 * integrate_finite(f, h, R, cfg);
  }
  double inner = h < 1.0 ? integrate_finite(f, h, 1.0, cfg) : 0.0;
  double outer = integrate_upper_tail(f, std::max(h, 1.0), cfg);
  return 2.0 * (inner + outer);
}

double overlap_1d(const LevyMeasureSpec& spec, double x, const QuadratureConfig& cfg) {
  MinIntegrand1D f{&spec, x};
  double R = support_radius(spec);
  std::vector<double> brk = {0.0, x, x / 2.0, -1.0, 1.0, x - 1.0, x + 1.0};
  double lo = -kInf, hi = kInf;
  if (std::isfinite(R)) {
    lo = -R;
    hi = R;  // min vanishes where q(z) = 0
    brk.push_back(x - R);
    brk.push_back(x + R);
  }
  std::vector<double> pts;
  for (double b : brk)
    if (b > lo && b < hi) pts.push_back(b);
  pts.push_back(lo);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-14; }),
            pts.end());

  double total = 0.0;
  Integrand g = [&](double z) { return f(z); };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i], b = pts[i + 1];
    if (std::isinf(a) && std::isinf(b)) throw QuadratureFailure("overlap: empty breakpoints");
    if (std::isinf(a)) total += integrate_lower_tail(g, b, cfg);
    else if (std::isinf(b)) total += integrate_upper_tail(g, a, cfg);
    else total += integrate_finite(g, a, b, cfg);
  }
  return total;
}

double overlap_box_mc(const LevyMeasureSpec& spec, const Vec& x,
                      const QuadratureConfig& cfg) {
  double R = support_radius(spec);
  if (!std::isfinite(R))
    throw QuadratureFailure(
        "multi-d overlap needs isotropic nonincreasing components or compact support");
  int d = spec.dim;
  // integrand vanishes outside the support box of q(z)
  double vol = std::pow(2.0 * R, d);
  RngStream rng(0x6f76657261ULL, 0);  // fixed internal substream: deterministic
  Vec z(d), zx(d);
  double acc = 0.0;
  for (std::uint64_t k = 0; k < cfg.mc_samples; ++k) {
    for (int i = 0; i < d; ++i) z[i] = (2.0 * rng.uniform01() - 1.0) * R;
    for (int i = 0; i < d; ++i) zx[i] = z[i] - x[i];
    double qa = norm(z) == 0.0 ? kInf : density_nocheck(spec, z);
    double qb = norm(zx) == 0.0 ? kInf : density_nocheck(spec, zx);
    acc += std::min(qa, qb);
  }
  return vol * acc / static_cast<double>(cfg.mc_samples);
}

}  // namespace

double density(const LevyMeasureSpec& spec, const Vec& z) {
  if (static_cast<int>(z.size()) != spec.dim)
    throw DimensionMismatch("density: point dimension mismatch");
  if (norm(z) == 0.0) throw SingularPoint("density undefined at z = 0");
  for (const auto& c : spec.components)
    if (!component_has_density(c)) throw NoDensity("component without density");
  return density_nocheck(spec, z);
}

double density_nocheck(const LevyMeasureSpec& spec, const Vec& z) {
  double q = 0.0;
  for (const auto& c : spec.components) q += component_density(c, z, spec.dim);
  return q;
}

double support_radius(const LevyMeasureSpec& spec) {
  double r = 0.0;
  for (const auto& c : spec.components) r = std::max(r, component_support_radius(c));
  return r;
}

bool has_density(const LevyMeasureSpec& spec) {
  return std::all_of(spec.components.begin(), spec.components.end(), component_has_density);
}

bool is_finite_measure(const LevyMeasureSpec& spec) {
  return std::all_of(spec.components.begin(), spec.components.end(), component_finite);
}

double total_mass(const LevyMeasureSpec& spec) {
  if (!is_finite_measure(spec)) return kInf;
  double m = 0.0;
  for (const auto& c : spec.components) m += std::get<CompoundPoisson>(c).intensity;
  return m;
}

double overlap_mass(const LevyMeasureSpec& spec, const Vec& x, const QuadratureConfig& cfg) {
  if (static_cast<int>(x.size()) != spec.dim)
    throw DimensionMismatch("overlap_mass: point dimension mismatch");
  if (spec.empty()) return 0.0;
  for (const auto& c : spec.components)
    if (!component_has_density(c)) throw NoDensity("overlap_mass needs densities");
  double xn = norm(x);
  if (xn == 0.0) return total_mass(spec);
  if (all_isotropic_monotone(spec)) return overlap_isotropic_monotone(spec, xn, cfg);
  if (spec.dim == 1) return overlap_1d(spec, x[0], cfg);
  return overlap_box_mc(spec, x, cfg);
}

JResult J(const LevyMeasureSpec& spec, double r, const QuadratureConfig& cfg) {
  if (!(r > 0.0)) throw Error("J: r must be positive");
  JResult out;
  if (all_isotropic_monotone(spec)) {
    // overlap is nonincreasing in |x|: the infimum sits on the boundary
    out.value = overlap_mass(spec, axis_point(spec.dim, r), cfg);
    out.monotone_reduction = true;
    return out;
  }
  int n_rad = 8;
  std::vector<Vec> dirs;
  if (spec.dim == 1) {
    dirs.push_back({1.0});
    dirs.push_back({-1.0});
  } else if (spec.dim == 2) {
    int n = 16;
    for (int k = 0; k < n; ++k) {
      double th = 2.0 * std::numbers::pi * k / n;
      dirs.push_back({std::cos(th), std::sin(th)});
    }
  } else {
    // Fibonacci lattice on the sphere
    int n = 32;
    double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      double zc = 1.0 - 2.0 * (k + 0.5) / n;
      double rr = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      double th = ga * k;
      Vec d(spec.dim, 0.0);
      d[0] = rr * std::cos(th);
      d[1] = rr * std::sin(th);
      d[2] = zc;
      dirs.push_back(d);
    }
    if (spec.dim > 3) throw QuadratureFailure("J grid search supports d <= 3");
  }
  double best = kInf;
  for (const auto& d : dirs) {
    for (int i = 1; i <= n_rad; ++i) {
      double rr = r * i / n_rad;
      double v = overlap_mass(spec, scaled(d, rr), cfg);
      best = std::min(best, v);
    }
  }
  out.value = best;
  out.grid_upper_bound = true;
  out.n_directions = static_cast<int>(dirs.size());
  out.n_radii = n_rad;
  return out;
}

double rho(const LevyMeasureSpec& spec, const Vec& x, const Vec& z) {
  return rho_sub(spec, spec, x, z);
}

double rho_sub(const LevyMeasureSpec& sub_measure, const LevyMeasureSpec& full_measure,
               const Vec& x, const Vec& z) {
  double qz = density(full_measure, z);
  if (!(qz > 0.0)) throw SingularPoint("rho: density(z) must be positive");
  if (norm(x) == 0.0) {
    // mu_0 = nu (for the sub-measure: ratio of densities)
    double qs = density_nocheck(sub_measure, z);
    return std::min(1.0, qs / qz);
  }
  Vec zmx = sub(z, x);
  double qs = density_nocheck(sub_measure, z);
  double qsx = norm(zmx) == 0.0 ? kInf : density_nocheck(sub_measure, zmx);
  double r = std::min(qs, qsx) / qz;
  return std::clamp(r, 0.0, 1.0);
}

double tail_mass(const LevyMeasureSpec& spec, double eps, const QuadratureConfig& cfg) {
  double m = 0.0;
  double S = surface_area(spec.dim);
  for (const auto& c : spec.components) {
    m += std::visit(
        [&](const auto& comp) -> double {
          using T = std::decay_t<decltype(comp)>;
          if constexpr (std::is_same_v<T, IsotropicStable>) {
            return S * comp.scale * std::pow(eps, -comp.alpha) / comp.alpha;
          } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
            if (!comp.jump_density) {
              // sampler-only component: estimate via a fixed substream
              RngStream rng(0x7461696cULL, 17);
              std::uint64_t n = 200000, hit = 0;
              for (std::uint64_t k = 0; k < n; ++k) {
                Vec j = comp.jump_sampler(rng);
                if (norm(j) >= eps) ++hit;
              }
              return comp.intensity * static_cast<double>(hit) / static_cast<double>(n);
            }
            if (spec.dim == 1) {
              Integrand f = [&](double z) { return comp.jump_density(Vec{z}); };
              double R = std::isfinite(comp.support_radius) ? comp.support_radius : kInf;
              double below;
              if (eps <= 0.0) below = 0.0;
              else below = integrate_finite(f, -eps, eps, cfg);
              (void)R;
              return comp.intensity * std::max(0.0, 1.0 - below);
            }
            RngStream rng(0x7461696cULL, 29);
            std::uint64_t n = 200000, hit = 0;
            for (std::uint64_t k = 0; k < n; ++k) {
              Vec j = comp.jump_sampler(rng);
              if (norm(j) >= eps) ++hit;
            }
            return comp.intensity * static_cast<double>(hit) / static_cast<double>(n);
          } else {
            LevyMeasureSpec single{{c}, spec.dim};
            if (comp.isotropic) {
              Integrand f = [&](double r) {
                return profile(single, r) * S * std::pow(r, spec.dim - 1);
              };
              double R = comp.support_radius.value_or(kInf);
              if (std::isfinite(R)) {
                if (eps >= R) return 0.0;
                return integrate_finite(f, eps, R, cfg);
              }
              double inner = eps < 1.0 ? integrate_finite(f, eps, 1.0, cfg) : 0.0;
              return inner + integrate_upper_tail(f, std::max(eps, 1.0), cfg);
            }
            if (spec.dim != 1)
              throw QuadratureFailure("tail_mass: anisotropic user density needs d = 1");
            Integrand f = [&](double z) { return comp.q(Vec{z}); };
            double R = comp.support_radius.value_or(kInf);
            double hi = std::isfinite(R) ? R : kInf;
            double up = std::isfinite(hi) ? integrate_finite(f, eps, hi, cfg)
                                          : integrate_upper_tail(f, eps, cfg);
            double lo = std::isfinite(hi) ? integrate_finite(f, -hi, -eps, cfg)
                                          : integrate_lower_tail(f, -eps, cfg);
            return up + lo;
          }
        },
        c);
  }
  return m;
}

namespace {

// int over {a <= |z| <= b} of |z|^p nu(dz) for a single component.
double radial_moment(const LevyMeasureSpec& spec, const MeasureComponent& c, double p,
                     double a, double b, const QuadratureConfig& cfg) {
  double S = surface_area(spec.dim);
  return std::visit(
      [&](const auto& comp) -> double {
        using T = std::decay_t<decltype(comp)>;
        if constexpr (std::is_same_v<T, IsotropicStable>) {
          // S * scale * int_a^b r^{p - 1 - alpha} dr
          double e = p - comp.alpha;
          if (!std::isfinite(b)) {
            if (e >= 0.0) return kInf;
            return S * comp.scale * std::pow(a, e) / (-e);
          }
          if (a <= 0.0) {
            if (e <= 0.0) return kInf;
            return S * comp.scale * std::pow(b, e) / e;
          }
          if (std::abs(e) < 1e-12) return S * comp.scale * std::log(b / a);
          return S * comp.scale * (std::pow(b, e) - std::pow(a, e)) / e;
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          if (spec.dim == 1 && comp.jump_density) {
            Integrand f = [&](double z) {
              return std::pow(std::abs(z), p) * comp.jump_density(Vec{z});
            };
            double hi = std::isfinite(comp.support_radius) ? comp.support_radius : kInf;
            double bb = std::min(b, hi);
            double up, lo;
            if (bb <= a) return 0.0;
            if (std::isfinite(bb)) {
              up = integrate_finite(f, a, bb, cfg);
              lo = integrate_finite(f, -bb, -a, cfg);
            } else {
              up = integrate_upper_tail(f, a, cfg);
              lo = integrate_lower_tail(f, -a, cfg);
            }
            return comp.intensity * (up + lo);
          }
          RngStream rng(0x6d6f6dULL, 31);
          std::uint64_t n = 200000;
          double acc = 0.0;
          for (std::uint64_t k = 0; k < n; ++k) {
            Vec j = comp.jump_sampler(rng);
            double r = norm(j);
            if (r >= a && r <= b) acc += std::pow(r, p);
          }
          return comp.intensity * acc / static_cast<double>(n);
        } else {
          LevyMeasureSpec single{{c}, spec.dim};
          if (comp.isotropic) {
            Integrand f = [&](double r) {
              return std::pow(r, p) * profile(single, r) * S * std::pow(r, spec.dim - 1);
            };
            double R = comp.support_radius.value_or(kInf);
            double bb = std::min(b, R);
            if (bb <= a) return 0.0;
            if (std::isfinite(bb)) return integrate_finite(f, a, bb, cfg);
            double inner = a < 1.0 ? integrate_finite(f, a, 1.0, cfg) : 0.0;
            return inner + integrate_upper_tail(f, std::max(a, 1.0), cfg);
          }
          if (spec.dim != 1)
            throw QuadratureFailure("moment: anisotropic user density needs d = 1");
          Integrand f = [&](double z) { return std::pow(std::abs(z), p) * comp.q(Vec{z}); };
          double R = comp.support_radius.value_or(kInf);
          double bb = std::min(b, R);
          if (bb <= a) return 0.0;
          if (std::isfinite(bb))
            return integrate_finite(f, a, bb, cfg) + integrate_finite(f, -bb, -a, cfg);
          return integrate_upper_tail(f, a, cfg) + integrate_lower_tail(f, -a, cfg);
        }
      },
      c);
}

}  // namespace

double tail_abs_moment(const LevyMeasureSpec& spec, double p, const QuadratureConfig& cfg) {
  double m = 0.0;
  for (const auto& c : spec.components) m += radial_moment(spec, c, p, 1.0, kInf, cfg);
  return m;
}

double small_square_moment(const LevyMeasureSpec& spec, const QuadratureConfig& cfg) {
  double m = 0.0;
  for (const auto& c : spec.components) m += radial_moment(spec, c, 2.0, 0.0, 1.0, cfg);
  return m;
}

void check_admissible(const LevyMeasureSpec& spec, const QuadratureConfig& cfg) {
  double s = small_square_moment(spec, cfg);
  if (!std::isfinite(s))
    throw Error("inadmissible Levy measure: int_{|z|<=1} |z|^2 nu(dz) diverges");
  double t = tail_mass(spec, 1.0, cfg);
  if (!std::isfinite(t))
    throw Error("inadmissible Levy measure: nu({|z| > 1}) diverges");
}

Vec compensator_drift(const LevyMeasureSpec& spec, double eps, const QuadratureConfig& cfg) {
  Vec drift(spec.dim, 0.0);
  for (const auto& c : spec.components) {
    if (component_isotropic(c)) continue;  // odd integrand: exactly zero
    std::visit(
        [&](const auto& comp) {
          using T = std::decay_t<decltype(comp)>;
          if constexpr (std::is_same_v<T, CompoundPoisson>) {
            if (spec.dim == 1 && comp.jump_density) {
              Integrand f = [&](double z) { return z * comp.jump_density(Vec{z}); };
              double v = integrate_finite(f, eps, 1.0, cfg) +
                         integrate_finite(f, -1.0, -eps, cfg);
              drift[0] -= comp.intensity * v;
            } else {
              RngStream rng(0x636f6d70ULL, 7);
              std::uint64_t n = 400000;
              Vec acc(spec.dim, 0.0);
              for (std::uint64_t k = 0; k < n; ++k) {
                Vec j = comp.jump_sampler(rng);
                double r = norm(j);
                if (r >= eps && r <= 1.0)
                  for (int i = 0; i < spec.dim; ++i) acc[i] += j[i];
              }
              for (int i = 0; i < spec.dim; ++i)
                drift[i] -= comp.intensity * acc[i] / static_cast<double>(n);
            }
          } else if constexpr (std::is_same_v<T, UserDensity>) {
            if (spec.dim != 1)
              throw QuadratureFailure("compensator: anisotropic user density needs d = 1");
            Integrand f = [&](double z) { return z * comp.q(Vec{z}); };
            double R = comp.support_radius.value_or(kInf);
            double hi = std::min(1.0, R);
            if (hi > eps)
              drift[0] -= integrate_finite(f, eps, hi, cfg) +
                          integrate_finite(f, -hi, -eps, cfg);
          }
        },
        c);
  }
  return drift;
}

namespace {

// Inverse-CDF table for sampling |z| >= eps from a 1D density on one side.
struct SideTable {
  std::vector<double> r;    // abscissae
  std::vector<double> cum;  // cumulative mass, normalized to 1 at the end
  double mass = 0.0;

  double sample(double u) const {
    auto it = std::lower_bound(cum.begin(), cum.end(), u);
    std::size_t i = std::min<std::size_t>(cum.size() - 1,
                                          static_cast<std::size_t>(it - cum.begin()));
    if (i == 0) return r.front();
    double c0 = cum[i - 1], c1 = cum[i];
    double w = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
    return r[i - 1] + w * (r[i] - r[i - 1]);
  }
};

SideTable build_side_table(const std::function<double(double)>& dens, double eps,
                           double R, int n = 4096) {
  SideTable t;
  t.r.resize(n + 1);
  t.cum.resize(n + 1);
  double lo = std::log(eps), hi = std::log(R);
  for (int i = 0; i <= n; ++i) t.r[i] = std::exp(lo + (hi - lo) * i / n);
  t.cum[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    double a = t.r[i - 1], b = t.r[i];
    double fa = dens(a), fm = dens(0.5 * (a + b)), fb = dens(b);
    t.cum[i] = t.cum[i - 1] + (b - a) * (fa + 4.0 * fm + fb) / 6.0;
  }
  t.mass = t.cum[n];
  if (t.mass > 0.0)
    for (auto& c : t.cum) c /= t.mass;
  return t;
}

struct ComponentSampler {
  double rate = 0.0;
  std::function<Vec(RngStream&)> draw;
};

ComponentSampler make_component_sampler(const LevyMeasureSpec& spec,
                                        const MeasureComponent& c, double eps,
                                        const QuadratureConfig& cfg) {
  int dim = spec.dim;
  return std::visit(
      [&](const auto& comp) -> ComponentSampler {
        using T = std::decay_t<decltype(comp)>;
        if constexpr (std::is_same_v<T, IsotropicStable>) {
          double S = surface_area(dim);
          double rate = S * comp.scale * std::pow(eps, -comp.alpha) / comp.alpha;
          double alpha = comp.alpha;
          return {rate, [eps, alpha, dim](RngStream& rng) {
                    double radius = eps * std::pow(rng.uniform01(), -1.0 / alpha);
                    Vec dir = rng.unit_direction(dim);
                    return scaled(dir, radius);
                  }};
        } else if constexpr (std::is_same_v<T, CompoundPoisson>) {
          if (!comp.jump_sampler) throw SamplingUnsupported("compound Poisson without sampler");
          LevyMeasureSpec single{{c}, dim};
          double rate = tail_mass(single, eps, cfg);
          auto sampler = comp.jump_sampler;
          return {rate, [sampler, eps](RngStream& rng) {
                    for (int tries = 0; tries < 1000000; ++tries) {
                      Vec j = sampler(rng);
                      if (norm(j) >= eps) return j;
                    }
                    throw SamplingUnsupported("compound Poisson: cannot reach |z| >= eps");
                  }};
        } else {
          LevyMeasureSpec single{{c}, dim};
          if (dim != 1)
            throw SamplingUnsupported("user density sampling implemented for d = 1 only");
          double R = comp.support_radius.value_or(kInf);
          if (!std::isfinite(R))
            throw SamplingUnsupported("user density sampling needs a support radius");
          auto q = comp.q;
          auto pos = std::make_shared<SideTable>(
              build_side_table([q](double r) { return q(Vec{r}); }, eps, R));
          auto neg = std::make_shared<SideTable>(
              build_side_table([q](double r) { return q(Vec{-r}); }, eps, R));
          double rate = pos->mass + neg->mass;
          double p_pos = rate > 0.0 ? pos->mass / rate : 0.5;
          return {rate, [pos, neg, p_pos](RngStream& rng) {
                    bool right = rng.uniform01() < p_pos;
                    double u = rng.uniform01();
                    double r = right ? pos->sample(u) : neg->sample(u);
                    return Vec{right ? r : -r};
                  }};
        }
      },
      c);
}

}  // namespace

JumpStream sample_jumps(const LevyMeasureSpec& spec, const JumpSimConfig& cfg,
                        double horizon, RngStream& rng, const QuadratureConfig& qcfg) {
  if (!(cfg.epsilon_cutoff > 0.0) || cfg.epsilon_cutoff > 1.0)
    throw ConfigInvalid("epsilon_cutoff must lie in (0, 1]");
  JumpStream out;
  out.compensator = Vec(spec.dim, 0.0);
  if (spec.empty()) return out;

  std::vector<ComponentSampler> samplers;
  samplers.reserve(spec.components.size());
  double total_rate = 0.0;
  for (const auto& c : spec.components) {
    samplers.push_back(make_component_sampler(spec, c, cfg.epsilon_cutoff, qcfg));
    total_rate += samplers.back().rate;
  }
  out.rate = total_rate;
  if (total_rate * horizon > static_cast<double>(cfg.max_jumps_per_horizon))
    throw BudgetExceeded("expected jump count " + std::to_string(total_rate * horizon) +
                         " exceeds max_jumps_per_horizon");
  if (cfg.compensate)
    out.compensator = compensator_drift(spec, cfg.epsilon_cutoff, qcfg);

  if (total_rate <= 0.0) return out;
  double t = 0.0;
  while (true) {
    t += rng.exponential(total_rate);
    if (t > horizon) break;
    double u = rng.uniform01() * total_rate;
    std::size_t k = 0;
    double acc = 0.0;
    for (; k < samplers.size(); ++k) {
      acc += samplers[k].rate;
      if (u <= acc) break;
    }
    if (k == samplers.size()) k = samplers.size() - 1;
    out.jumps.push_back({t, samplers[k].draw(rng)});
  }
  return out;
}

SigmaMinorant sigma_minorant(const LevyMeasureSpec& spec, double kappa, double l0,
                             double alpha, int grid_points, const QuadratureConfig& cfg) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidSigma("sigma exponent alpha must be in (0,1)");
  if (!(kappa > 0.0)) throw InvalidSigma("kappa must be positive");
  if (!(l0 > 0.0)) throw InvalidSigma("l0 must be positive");
  double hi = 2.0 * l0;
  double lo = hi * 1e-4;
  double j_at_kappa = -1.0;
  double min_rhs = kInf, min_ratio = kInf;
  for (int i = 0; i < grid_points; ++i) {
    double r = lo * std::pow(hi / lo, static_cast<double>(i) / (grid_points - 1));
    double kr = std::min(kappa, r);
    double jv;
    if (kr >= kappa) {
      if (j_at_kappa < 0.0) j_at_kappa = J(spec, kappa, cfg).value;
      jv = j_at_kappa;
    } else {
      jv = J(spec, kr, cfg).value;
    }
    double rhs = jv * kr * kr / (2.0 * r);
    min_rhs = std::min(min_rhs, rhs);
    min_ratio = std::min(min_ratio, rhs / std::pow(r, 1.0 - alpha));
  }
  if (!(min_rhs > 0.0))
    throw DegenerateOverlap("sigma_minorant: J(kappa ^ r)(kappa ^ r)^2/(2r) vanishes on the grid");
  SigmaMinorant s;
  s.c0 = 0.95 * min_ratio;
  s.alpha = alpha;
  s.l0 = l0;
  s.grid_min_rhs = min_rhs;
  return s;
}

NuThetaResult nu_theta(const LevyMeasureSpec& spec, double theta, const QuadratureConfig& cfg) {
  if (!(theta > 0.0)) throw Error("nu_theta: theta must be positive");
  // int_{|z| <= r} |z| nu(dz) must be finite for small r, otherwise the
  // restriction construction cannot reach the theta budget.
  for (const auto& c : spec.components) {
    if (const auto* st = std::get_if<IsotropicStable>(&c)) {
      if (st->alpha >= 1.0)
        throw Error("nu_theta: first moment near zero diverges (stable alpha >= 1); "
                    "the restriction construction does not apply");
    }
  }
  auto m = [&](double r) {
    double v = 0.0;
    for (const auto& c : spec.components) v += radial_moment(spec, c, 1.0, 0.0, r, cfg);
    return v;
  };
  double r_theta = 1.0;
  if (m(1.0) > theta) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      if (m(mid) > theta) hi = mid;
      else lo = mid;
    }
    r_theta = lo;
  }
  if (!(r_theta > 0.0)) throw Error("nu_theta: no positive restriction radius found");

  LevyMeasureSpec out;
  out.dim = spec.dim;
  LevyMeasureSpec parent = spec;
  double rt = r_theta;
  bool iso = all_isotropic(spec);
  bool mono = all_isotropic_monotone(spec);
  UserDensity restricted;
  restricted.q = [parent, rt](const Vec& z) {
    return norm(z) <= rt ? density_nocheck(parent, z) : 0.0;
  };
  restricted.isotropic = iso;
  restricted.radial_profile_monotone = mono;
  restricted.support_radius = rt;
  out.components.push_back(restricted);
  return {out, r_theta};
}

double fit_overlap_exponent(const LevyMeasureSpec& spec, double s_lo, double s_hi,
                            int points, const QuadratureConfig& cfg) {
  if (!(s_lo > 0.0 && s_hi > s_lo)) throw Error("fit_overlap_exponent: bad range");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int i = 0; i < points; ++i) {
    double s = s_lo * std::pow(s_hi / s_lo, static_cast<double>(i) / (points - 1));
    double j = J(spec, s, cfg).value;
    if (!(j > 0.0)) continue;
    double X = std::log(s), Y = std::log(j);
    sx += X; sy += Y; sxx += X * X; sxy += X * Y;
    ++n;
  }
  if (n < 2) throw DegenerateOverlap("fit_overlap_exponent: J vanishes on the range");
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

}  // namespace lvc
