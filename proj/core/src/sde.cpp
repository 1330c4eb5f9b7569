#include "levycouple/sde.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lvc {

namespace {

void check_state(const Vec& x, double t) {
  double n = norm(x);
  if (!std::isfinite(n) || n > kBlowupGuard)
    throw NumericBlowup("state norm " + std::to_string(n) + " at t=" + std::to_string(t));
}

const DriftFn& free_drift(const DriftSpec& drift) {
  if (drift.mean_field())
    throw Error("simulate: distribution-free drift required here");
  return drift.b();
}

}  // namespace

Path simulate(const DriftSpec& drift, const LevyMeasureSpec& levy,
              const JumpSimConfig& jcfg, const Vec& x0, double horizon, double dt,
              RngStream& rng, const QuadratureConfig& qcfg) {
  if (!(dt > 0.0)) throw ConfigInvalid("simulate: dt must be positive");
  const DriftFn& b = free_drift(drift);
  JumpStream js = sample_jumps(levy, jcfg, horizon, rng, qcfg);

  Path p;
  p.dim = drift.dim;
  Vec x = x0;
  double t = 0.0;
  std::size_t next_jump = 0;
  long grid_i = 1;
  p.times.push_back(0.0);
  p.states.insert(p.states.end(), x.begin(), x.end());

  while (t < horizon) {
    double t_grid = std::min(horizon, grid_i * dt);
    double t_jump = next_jump < js.jumps.size() ? js.jumps[next_jump].time : kInf;
    double t_next = std::min(t_grid, t_jump);
    double step = t_next - t;
    if (step > 0.0) {
      Vec drift_val = b(x);
      for (int i = 0; i < p.dim; ++i) x[i] += (drift_val[i] + js.compensator[i]) * step;
    }
    t = t_next;
    if (t_jump <= t_grid) {
      for (int i = 0; i < p.dim; ++i) x[i] += js.jumps[next_jump].z[i];
      ++next_jump;
    }
    if (t >= t_grid) ++grid_i;
    check_state(x, t);
    p.times.push_back(t);
    p.states.insert(p.states.end(), x.begin(), x.end());
  }
  return p;
}

Vec simulate_terminal(const DriftSpec& drift, const LevyMeasureSpec& levy,
                      const JumpSimConfig& jcfg, const Vec& x0, double horizon,
                      double dt, RngStream& rng, const QuadratureConfig& qcfg) {
  if (!(dt > 0.0)) throw ConfigInvalid("simulate: dt must be positive");
  const DriftFn& b = free_drift(drift);
  JumpStream js = sample_jumps(levy, jcfg, horizon, rng, qcfg);

  int dim = drift.dim;
  Vec x = x0;
  double t = 0.0;
  std::size_t next_jump = 0;
  long grid_i = 1;
  while (t < horizon) {
    double t_grid = std::min(horizon, grid_i * dt);
    double t_jump = next_jump < js.jumps.size() ? js.jumps[next_jump].time : kInf;
    double t_next = std::min(t_grid, t_jump);
    double step = t_next - t;
    if (step > 0.0) {
      Vec drift_val = b(x);
      for (int i = 0; i < dim; ++i) x[i] += (drift_val[i] + js.compensator[i]) * step;
    }
    t = t_next;
    if (t_jump <= t_grid) {
      for (int i = 0; i < dim; ++i) x[i] += js.jumps[next_jump].z[i];
      ++next_jump;
    }
    if (t >= t_grid) ++grid_i;
    check_state(x, t);
  }
  return x;
}

std::vector<Vec> terminal_ensemble(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                   const JumpSimConfig& jcfg, const Vec& x0,
                                   double horizon, double dt, std::size_t n_paths,
                                   std::uint64_t seed, std::uint64_t stream_offset,
                                   const QuadratureConfig& qcfg) {
  std::vector<Vec> out(n_paths);
  // compute the compensator once; per-path sampling re-derives it otherwise
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < static_cast<long>(n_paths); ++i) {
    if (err) continue;
    try {
      RngStream rng(seed, stream_offset + static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] =
          simulate_terminal(drift, levy, jcfg, x0, horizon, dt, rng, qcfg);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

GeneratorResult generator_apply(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                const ScalarC2& f, const Vec& x,
                                const QuadratureConfig& qcfg) {
  int dim = static_cast<int>(x.size());
  double fx = f.f(x);
  Vec gx = f.grad(x);

  GeneratorResult out;
  const DriftFn& b = drift.mean_field() ? drift.b1() : drift.b();
  out.value = dot(b(x), gx);

  if (levy.empty()) return out;
  if (!has_density(levy)) throw NoDensity("generator_apply needs a density");

  if (dim == 1) {
    Integrand g = [&](double z) {
      Vec xz{x[0] + z};
      double corr = std::abs(z) <= 1.0 ? gx[0] * z : 0.0;
      return (f.f(xz) - fx - corr) * density_nocheck(levy, Vec{z});
    };
    // segment endpoints: origin singularity, the |z| = 1 compensation kink,
    // and any compact support edges
    double R = support_radius(levy);
    std::vector<double> pts = {-1.0, 0.0, 1.0};
    double lo = -kInf, hi = kInf;
    if (std::isfinite(R)) { lo = -R; hi = R; }
    std::vector<double> grid;
    grid.push_back(lo);
    for (double pt : pts)
      if (pt > lo && pt < hi) grid.push_back(pt);
    grid.push_back(hi);
    std::sort(grid.begin(), grid.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      double a = grid[i], bnd = grid[i + 1];
      if (std::isinf(a)) total += integrate_lower_tail(g, bnd, qcfg);
      else if (std::isinf(bnd)) total += integrate_upper_tail(g, a, qcfg);
      else total += integrate_finite(g, a, bnd, qcfg);
    }
    out.value += total;
    out.error_estimate = qcfg.rel_tol * std::abs(total) + qcfg.abs_tol;
    return out;
  }

  // d >= 2: Monte-Carlo over the eps-truncated jump measure plus a
  // second-order small-ball remainder bound folded into the error estimate.
  double eps = 1e-3;
  JumpSimConfig jc;
  jc.epsilon_cutoff = eps;
  jc.compensate = false;
  RngStream rng(0x67656e6dULL, 3);
  double rate = tail_mass(levy, eps, qcfg);
  std::uint64_t n = qcfg.mc_samples;
  double acc = 0.0, acc2 = 0.0;
  // z draws from the normalized restriction of nu to {|z| >= eps}
  jc.max_jumps_per_horizon = n * 4;
  JumpStream draws = sample_jumps(levy, jc, static_cast<double>(n) / rate, rng, qcfg);
  std::size_t m = draws.jumps.size();
  if (m == 0) throw QuadratureFailure("generator_apply: no jump draws");
  for (const auto& ev : draws.jumps) {
    Vec xz = add(x, ev.z);
    double corr = norm(ev.z) <= 1.0 ? dot(gx, ev.z) : 0.0;
    double v = f.f(xz) - fx - corr;
    acc += v;
    acc2 += v * v;
  }
  double mean = acc / static_cast<double>(m);
  double var = std::max(0.0, acc2 / static_cast<double>(m) - mean * mean);
  out.value += rate * mean;
  out.error_estimate = rate * std::sqrt(var / static_cast<double>(m));
  return out;
}

McEstimate dynkin_residual(const DriftSpec& drift, const LevyMeasureSpec& levy,
                           const JumpSimConfig& jcfg, const ScalarC2& f, const Vec& x,
                           double h, std::size_t n_samples, std::uint64_t seed,
                           const QuadratureConfig& qcfg) {
  if (!(h > 0.0)) throw ConfigInvalid("dynkin_residual: h must be positive");
  double fx = f.f(x);
  Vec vals(n_samples, 0.0);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 256)
  for (long i = 0; i < static_cast<long>(n_samples); ++i) {
    if (err) continue;
    try {
      RngStream rng(seed, static_cast<std::uint64_t>(i));
      Vec xh = simulate_terminal(drift, levy, jcfg, x, h, h, rng, qcfg);
      vals[static_cast<std::size_t>(i)] = (f.f(xh) - fx) / h;
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return {mean_of(vals), se_of_mean(vals)};
}

}  // namespace lvc
