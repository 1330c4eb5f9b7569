#include "levycouple/coupling.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lvc {

double default_phi(double delta, double r) {
  if (delta <= 0.0) return 1.0;
  if (r <= 0.5 * delta) return 0.0;
  if (r >= delta) return 1.0;
  double s = (r - 0.5 * delta) / (0.5 * delta);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));  // C^2 smoothstep
}

double CouplingConfig::phi_value(double r) const {
  if (phi) return phi(r);
  return default_phi(delta, r);
}

void validate_coupling_config(const CouplingConfig& cfg) {
  if (!(cfg.kappa > 0.0)) throw ConfigInvalid("coupling: kappa must be positive");
  if (cfg.delta < 0.0) throw ConfigInvalid("coupling: delta must be nonnegative");
  double prev = -1.0;
  for (int i = 0; i <= 200; ++i) {
    double r = cfg.delta <= 0.0 ? i * 0.01 : 1.5 * cfg.delta * i / 200.0;
    double v = cfg.phi_value(r);
    if (v < -1e-12 || v > 1.0 + 1e-12)
      throw ConfigInvalid("coupling: phi out of [0,1]");
    if (v + 1e-12 < prev) throw ConfigInvalid("coupling: phi not nondecreasing");
    prev = v;
    if (cfg.delta > 0.0) {
      if (r <= 0.5 * cfg.delta && v > 1e-12)
        throw ConfigInvalid("coupling: phi must vanish on [0, delta/2]");
      if (r >= cfg.delta && v < 1.0 - 1e-12)
        throw ConfigInvalid("coupling: phi must be 1 on [delta, inf)");
    }
  }
}

namespace {

struct CoupledStepper {
  const DriftSpec* drift;
  const LevyMeasureSpec* levy;
  const LevyMeasureSpec* sub_measure;
  const CouplingConfig* ccfg;
  int dim;

  // applies one shared jump with mark u; returns true if the pair coalesced
  bool apply_jump(Vec& x, Vec& y, const Vec& z, double u, bool& coupled_flag) const {
    if (coupled_flag) {
      for (int i = 0; i < dim; ++i) {
        x[i] += z[i];
        y[i] = x[i];
      }
      return false;
    }
    Vec U = sub(x, y);
    double r = norm(U);
    Vec Uk = clip_to_length(U, ccfg->kappa);
    Vec mUk = scaled(Uk, -1.0);
    double r1 = rho_sub(*sub_measure, *levy, mUk, z);
    double r2 = rho_sub(*sub_measure, *levy, Uk, z);
    double m = 0.0;
    if (u <= 0.5 * r1) m = 1.0;
    else if (u <= 0.5 * (r1 + r2)) m = -1.0;
    double phi = ccfg->delta > 0.0 ? ccfg->phi_value(r) : 1.0;

    bool coalesce = ccfg->delta == 0.0 && m == 1.0 && r <= ccfg->kappa;
    for (int i = 0; i < dim; ++i) x[i] += z[i];
    if (coalesce) {
      y = x;  // exact coalescence, not within-epsilon
      coupled_flag = true;
      return true;
    }
    for (int i = 0; i < dim; ++i) y[i] += z[i] + Uk[i] * m * phi;
    return false;
  }

};

}  // namespace

CoupledPath simulate_coupled(const DriftSpec& drift, const LevyMeasureSpec& levy,
                             const JumpSimConfig& jcfg, const CouplingConfig& ccfg,
                             const Vec& x0, const Vec& y0, double horizon, double dt,
                             RngStream& rng, const QuadratureConfig& qcfg) {
  if (!(dt > 0.0)) throw ConfigInvalid("simulate_coupled: dt must be positive");
  validate_coupling_config(ccfg);
  const LevyMeasureSpec& sub = ccfg.coupled_submeasure ? *ccfg.coupled_submeasure : levy;
  if (!has_density(sub))
    throw DensityRequired("simulate_coupled: coupled sub-measure needs a density");
  const DriftFn& b = drift.b();

  JumpStream js = sample_jumps(levy, jcfg, horizon, rng, qcfg);
  CoupledStepper stepper{&drift, &levy, &sub, &ccfg, drift.dim};

  CoupledPath p;
  p.dim = drift.dim;
  Vec x = x0, y = y0;
  bool coupled_flag = std::equal(x.begin(), x.end(), y.begin(), y.end());
  if (coupled_flag) p.coupling_time = 0.0;
  double t = 0.0;
  std::size_t next_jump = 0;
  long grid_i = 1;
  auto record = [&](double tt) {
    p.times.push_back(tt);
    p.xs.insert(p.xs.end(), x.begin(), x.end());
    p.ys.insert(p.ys.end(), y.begin(), y.end());
    p.coupled.push_back(coupled_flag ? 1 : 0);
  };
  record(0.0);

  while (t < horizon) {
    double t_grid = std::min(horizon, grid_i * dt);
    double t_jump = next_jump < js.jumps.size() ? js.jumps[next_jump].time : kInf;
    double t_next = std::min(t_grid, t_jump);
    double step = t_next - t;
    if (step > 0.0) {
      Vec bx = b(x);
      for (int i = 0; i < p.dim; ++i) x[i] += (bx[i] + js.compensator[i]) * step;
      if (coupled_flag) {
        y = x;
      } else {
        Vec by = b(y);
        for (int i = 0; i < p.dim; ++i) y[i] += (by[i] + js.compensator[i]) * step;
      }
    }
    t = t_next;
    if (t_jump <= t_grid) {
      double u = rng.uniform01();
      bool just_coupled = stepper.apply_jump(x, y, js.jumps[next_jump].z, u, coupled_flag);
      if (just_coupled && !p.coupling_time) p.coupling_time = t;
      ++next_jump;
    }
    if (t >= t_grid) ++grid_i;
    if (!coupled_flag && std::equal(x.begin(), x.end(), y.begin(), y.end())) {
      // exact equality reached without a coalescing jump (delta > 0 paths)
      coupled_flag = ccfg.delta == 0.0;
      if (!p.coupling_time) p.coupling_time = t;
    }
    double nx = norm(x), ny = norm(y);
    if (!std::isfinite(nx) || nx > kBlowupGuard || !std::isfinite(ny) || ny > kBlowupGuard)
      throw NumericBlowup("coupled state blowup at t=" + std::to_string(t));
    record(t);
  }
  return p;
}

CoupledTerminal simulate_coupled_terminal(const DriftSpec& drift,
                                          const LevyMeasureSpec& levy,
                                          const JumpSimConfig& jcfg,
                                          const CouplingConfig& ccfg, const Vec& x0,
                                          const Vec& y0, double horizon, double dt,
                                          RngStream& rng, const QuadratureConfig& qcfg) {
  if (!(dt > 0.0)) throw ConfigInvalid("simulate_coupled: dt must be positive");
  const LevyMeasureSpec& sub = ccfg.coupled_submeasure ? *ccfg.coupled_submeasure : levy;
  if (!has_density(sub))
    throw DensityRequired("simulate_coupled: coupled sub-measure needs a density");
  const DriftFn& b = drift.b();

  JumpStream js = sample_jumps(levy, jcfg, horizon, rng, qcfg);
  CoupledStepper stepper{&drift, &levy, &sub, &ccfg, drift.dim};

  CoupledTerminal out;
  Vec x = x0, y = y0;
  bool coupled_flag = std::equal(x.begin(), x.end(), y.begin(), y.end());
  if (coupled_flag) out.coupling_time = 0.0;
  double t = 0.0;
  std::size_t next_jump = 0;
  long grid_i = 1;
  while (t < horizon) {
    double t_grid = std::min(horizon, grid_i * dt);
    double t_jump = next_jump < js.jumps.size() ? js.jumps[next_jump].time : kInf;
    double t_next = std::min(t_grid, t_jump);
    double step = t_next - t;
    if (step > 0.0) {
      Vec bx = b(x);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += (bx[i] + js.compensator[i]) * step;
      if (coupled_flag) {
        y = x;
      } else {
        Vec by = b(y);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += (by[i] + js.compensator[i]) * step;
      }
    }
    t = t_next;
    if (t_jump <= t_grid) {
      double u = rng.uniform01();
      bool just_coupled = stepper.apply_jump(x, y, js.jumps[next_jump].z, u, coupled_flag);
      if (just_coupled && !out.coupling_time) out.coupling_time = t;
      ++next_jump;
    }
    if (t >= t_grid) ++grid_i;
    double nx = norm(x), ny = norm(y);
    if (!std::isfinite(nx) || nx > kBlowupGuard || !std::isfinite(ny) || ny > kBlowupGuard)
      throw NumericBlowup("coupled state blowup at t=" + std::to_string(t));
  }
  out.x = std::move(x);
  out.y = std::move(y);
  return out;
}

std::vector<CoupledTerminal> coupled_ensemble(
    const DriftSpec& drift, const LevyMeasureSpec& levy, const JumpSimConfig& jcfg,
    const CouplingConfig& ccfg, const Vec& x0, const Vec& y0, double horizon,
    double dt, std::size_t n_pairs, std::uint64_t seed, std::uint64_t stream_offset,
    const QuadratureConfig& qcfg) {
  validate_coupling_config(ccfg);
  std::vector<CoupledTerminal> out(n_pairs);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < static_cast<long>(n_pairs); ++i) {
    if (err) continue;
    try {
      RngStream rng(seed, stream_offset + static_cast<std::uint64_t>(i));
      out[static_cast<std::size_t>(i)] = simulate_coupled_terminal(
          drift, levy, jcfg, ccfg, x0, y0, horizon, dt, rng, qcfg);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

SurvivalCurve coupling_time_survival(const std::vector<CoupledTerminal>& ensemble,
                                     const Vec& t_grid) {
  if (ensemble.empty()) throw Error("coupling_time_survival: empty ensemble");
  SurvivalCurve curve;
  curve.t = t_grid;
  double n = static_cast<double>(ensemble.size());
  for (double t : t_grid) {
    std::size_t alive = 0;
    for (const auto& e : ensemble)
      if (!e.coupling_time || *e.coupling_time > t) ++alive;
    double p = static_cast<double>(alive) / n;
    curve.survival.push_back(p);
    curve.se.push_back(std::sqrt(std::max(0.0, p * (1.0 - p) / n)));
  }
  return curve;
}

double coupling_psi_generator(const PsiFunction& psi, const LevyMeasureSpec& levy,
                              const CouplingConfig& ccfg, double drift_inner_product,
                              double r, MuVariant variant, const QuadratureConfig& qcfg) {
  if (!(r > 0.0)) throw Error("coupling_psi_generator: r > 0 required");
  const LevyMeasureSpec& sub = ccfg.coupled_submeasure ? *ccfg.coupled_submeasure : levy;
  double kr = std::min(ccfg.kappa, r);
  double bracket = psi(r + kr) + psi(r - kr) - 2.0 * psi(r);
  double mass;
  if (variant == MuVariant::Exact) {
    Vec shift(levy.dim, 0.0);
    shift[0] = kr;
    mass = overlap_mass(sub, shift, qcfg);
  } else {
    mass = J(sub, kr, qcfg).value;
  }
  return 0.5 * mass * bracket + psi.d1(r) / r * drift_inner_product;
}

ContractionCheck verify_contraction(const PsiFunction& psi, double lambda, double K1,
                                    double K2, double l0, const LevyMeasureSpec& levy,
                                    const CouplingConfig& ccfg, const Vec& r_grid,
                                    const QuadratureConfig& qcfg) {
  const LevyMeasureSpec& sub = ccfg.coupled_submeasure ? *ccfg.coupled_submeasure : levy;
  ContractionCheck out;
  double j_at_kappa = -1.0;
  for (double r : r_grid) {
    if (!(r > 0.0)) continue;
    double kr = std::min(ccfg.kappa, r);
    double jv;
    if (kr >= ccfg.kappa) {
      if (j_at_kappa < 0.0) j_at_kappa = J(sub, ccfg.kappa, qcfg).value;
      jv = j_at_kappa;
    } else {
      jv = J(sub, kr, qcfg).value;
    }
    double bracket = psi(r + kr) + psi(r - kr) - 2.0 * psi(r);
    double drift_term = psi.d1(r) * (r <= l0 ? K1 * r : -K2 * r);
    double v = drift_term + 0.5 * jv * bracket + lambda * psi(r);
    if (v > out.max_value) {
      out.max_value = v;
      out.argmax = r;
    }
  }
  return out;
}

McEstimate coupling_dynkin(const PairFunction& F, const DriftSpec& drift,
                           const LevyMeasureSpec& levy, const JumpSimConfig& jcfg,
                           const CouplingConfig& ccfg, const Vec& x, const Vec& y,
                           double h, std::size_t n_samples, std::uint64_t seed,
                           const QuadratureConfig& qcfg) {
  if (!(h > 0.0)) throw ConfigInvalid("coupling_dynkin: h must be positive");
  double f0 = F(x, y);
  Vec vals(n_samples, 0.0);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < static_cast<long>(n_samples); ++i) {
    if (err) continue;
    try {
      RngStream rng(seed, static_cast<std::uint64_t>(i));
      CoupledTerminal ct =
          simulate_coupled_terminal(drift, levy, jcfg, ccfg, x, y, h, h, rng, qcfg);
      vals[static_cast<std::size_t>(i)] = (F(ct.x, ct.y) - f0) / h;
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return {mean_of(vals), se_of_mean(vals)};
}

}  // namespace lvc
