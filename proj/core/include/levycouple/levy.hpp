#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "levycouple/common.hpp"
#include "levycouple/quadrature.hpp"
#include "levycouple/rng.hpp"

namespace lvc {

// Levy measure with density c |z|^{-d-alpha}, alpha in (0,2).
struct IsotropicStable {
  double alpha = 1.5;
  double scale = 1.0;  // the density coefficient c
};

// Finite-activity component: intensity * (probability density of one jump).
struct CompoundPoisson {
  double intensity = 1.0;
  std::function<double(const Vec&)> jump_density;       // integrates to 1
  std::function<Vec(RngStream&)> jump_sampler;          // one jump
  double support_radius = kInf;                         // quadrature hint
};

// Arbitrary density q >= 0 with optional structure flags.
struct UserDensity {
  std::function<double(const Vec&)> q;
  bool isotropic = false;
  bool radial_profile_monotone = false;  // radially nonincreasing
  std::optional<double> support_radius;
};

using MeasureComponent = std::variant<IsotropicStable, CompoundPoisson, UserDensity>;

struct LevyMeasureSpec {
  std::vector<MeasureComponent> components;
  int dim = 1;

  bool empty() const { return components.empty(); }
};

struct JumpSimConfig {
  double epsilon_cutoff = 1e-3;          // jumps with |z| < eps are dropped
  bool compensate = true;                // add -int_{eps<=|z|<=1} z nu(dz) drift
  std::uint64_t max_jumps_per_horizon = 20000000;
};

// --- density / overlap machinery ------------------------------------------

// Total density sum_k q_k(z). Throws SingularPoint at z = 0,
// NoDensity if a component lacks a density.
double density(const LevyMeasureSpec& spec, const Vec& z);

// No precondition checks; hot-loop variant (undefined at z = 0).
double density_nocheck(const LevyMeasureSpec& spec, const Vec& z);

bool has_density(const LevyMeasureSpec& spec);
bool is_finite_measure(const LevyMeasureSpec& spec);

// Largest support radius over components; +inf when any is unbounded.
double support_radius(const LevyMeasureSpec& spec);

// nu(R^d) for finite measures, +inf otherwise.
double total_mass(const LevyMeasureSpec& spec);

// mu_x(R^d) = int min(q(z), q(z-x)) dz. Returns +inf at x = 0 for an
// infinite measure (min(q,q) = q). Finite for x != 0.
double overlap_mass(const LevyMeasureSpec& spec, const Vec& x,
                    const QuadratureConfig& cfg = {});

struct JResult {
  double value = 0.0;
  bool monotone_reduction = false;  // isotropic nonincreasing profile: inf at |x| = r
  bool grid_upper_bound = false;    // grid infimum only; true inf may be lower
  int n_directions = 0;
  int n_radii = 0;
};

// J(r) = inf_{|x| <= r} mu_x(R^d).
JResult J(const LevyMeasureSpec& spec, double r, const QuadratureConfig& cfg = {});

// rho(x, z) = min(q(z), q(z-x)) / q(z) in [0,1].
double rho(const LevyMeasureSpec& spec, const Vec& x, const Vec& z);

// Coupled-submeasure control ratio min(q_sub(z), q_sub(z-x)) / q_full(z);
// equals rho when sub == full.
double rho_sub(const LevyMeasureSpec& sub, const LevyMeasureSpec& full,
               const Vec& x, const Vec& z);

// --- integral functionals ---------------------------------------------------

// nu({|z| >= eps}).
double tail_mass(const LevyMeasureSpec& spec, double eps,
                 const QuadratureConfig& cfg = {});

// int_{|z| > 1} |z|^p nu(dz), p in {1, 2}.
double tail_abs_moment(const LevyMeasureSpec& spec, double p,
                       const QuadratureConfig& cfg = {});

// int_{|z| <= 1} |z|^2 nu(dz).
double small_square_moment(const LevyMeasureSpec& spec,
                           const QuadratureConfig& cfg = {});

// Levy admissibility: int min(1, |z|^2) nu(dz) < inf, checked numerically.
void check_admissible(const LevyMeasureSpec& spec, const QuadratureConfig& cfg = {});

// -int_{eps <= |z| <= 1} z nu(dz); zero for isotropic components.
Vec compensator_drift(const LevyMeasureSpec& spec, double eps,
                      const QuadratureConfig& cfg = {});

// --- jump stream sampling ---------------------------------------------------

struct JumpEvent {
  double time;
  Vec z;
};

struct JumpStream {
  std::vector<JumpEvent> jumps;  // sorted by time
  Vec compensator;               // drift per unit time (zero vector if off)
  double rate = 0.0;             // nu({|z| >= eps})
};

// Poisson stream of rate nu({|z| >= eps}) on [0, T]; sizes from the
// normalized restriction of nu to {|z| >= eps}.
JumpStream sample_jumps(const LevyMeasureSpec& spec, const JumpSimConfig& cfg,
                        double horizon, RngStream& rng,
                        const QuadratureConfig& qcfg = {});

// --- sigma minorant (Theorem-three-one hypothesis) -------------------------

struct SigmaMinorant {
  double c0 = 0.0;
  double alpha = 0.5;      // exponent in sigma(r) = c0 r^{1-alpha}
  double l0 = 0.0;
  double grid_min_rhs = 0.0;  // min over grid of J(k^r)(k^r)^2/(2r)

  double operator()(double r) const { return c0 * std::pow(r, 1.0 - alpha); }
  // g1(r) = int_0^r sigma(s)^{-1} ds = r^alpha / (c0 alpha).
  double g1(double r) const { return std::pow(r, alpha) / (c0 * alpha); }
};

// Largest c0 (with a 0.95 safety factor) such that
// c0 r^{1-alpha} <= J(kappa ^ r)(kappa ^ r)^2 / (2r) on a log grid of (0, 2 l0].
SigmaMinorant sigma_minorant(const LevyMeasureSpec& spec, double kappa, double l0,
                             double alpha = 0.5, int grid_points = 400,
                             const QuadratureConfig& cfg = {});

// --- nu_theta construction --------------------------------------------------

struct NuThetaResult {
  LevyMeasureSpec measure;  // nu restricted to {|z| <= r_theta}
  double r_theta = 0.0;
};

// nu_theta := nu restricted to {|z| <= r_theta}, r_theta <= 1 chosen so that
// int_{|z| <= r_theta} |z| nu(dz) <= theta.
NuThetaResult nu_theta(const LevyMeasureSpec& spec, double theta,
                       const QuadratureConfig& cfg = {});

// Least-squares exponent alpha_hat with J(s) ~ s^{-alpha_hat} on [s_lo, s_hi].
double fit_overlap_exponent(const LevyMeasureSpec& spec, double s_lo, double s_hi,
                            int points = 16, const QuadratureConfig& cfg = {});

}  // namespace lvc
