#include "levycouple/meanfield.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lvc {

namespace {

constexpr std::uint64_t kInitSalt = 0x1a2b3c4d5e6f7788ULL;
constexpr std::uint64_t kMarkSalt = 0x99aa55cc33ee0011ULL;

const MeanField& mf(const DriftSpec& drift) {
  if (!drift.mean_field()) throw Error("mean-field drift required");
  return std::get<MeanField>(drift.kind);
}

void check_linear_declaration(const MeanField& m, int dim) {
  if (!m.b2_linear_slope) return;
  RngStream rng(0x11ddee, 5);
  double s = *m.b2_linear_slope;
  for (int k = 0; k < 16; ++k) {
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u[i] = 3.0 * rng.normal();
    Vec v = m.b2(u);
    for (int i = 0; i < dim; ++i)
      if (std::abs(v[i] - s * u[i]) > 1e-12 * (1.0 + std::abs(u[i])))
        throw InvalidDriftConstants("b2_linear_slope declaration does not match b2");
  }
}

Vec column_mean(const Vec& slice, int n, int dim) {
  Vec m(dim, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < dim; ++k) m[k] += slice[static_cast<std::size_t>(i) * dim + k];
  for (int k = 0; k < dim; ++k) m[k] /= static_cast<double>(n);
  return m;
}

// interaction field (1/n) sum_j b2(x_i - x_j) for every i, from the old slice
std::vector<Vec> interaction_field(const MeanField& m, const Vec& slice, int n, int dim) {
  std::vector<Vec> out(static_cast<std::size_t>(n), Vec(dim, 0.0));
  if (m.b2_linear_slope) {
    double s = *m.b2_linear_slope;
    Vec mean = column_mean(slice, n, dim);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < dim; ++k)
        out[i][k] = s * (slice[static_cast<std::size_t>(i) * dim + k] - mean[k]);
    return out;
  }
  Vec u(dim);
  for (int i = 0; i < n; ++i) {
    Vec acc(dim, 0.0);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < dim; ++k)
        u[k] = slice[static_cast<std::size_t>(i) * dim + k] -
               slice[static_cast<std::size_t>(j) * dim + k];
      Vec v = m.b2(u);
      for (int k = 0; k < dim; ++k) acc[k] += v[k];
    }
    for (int k = 0; k < dim; ++k) out[i][k] = acc[k] / static_cast<double>(n);
  }
  return out;
}

// cloud-mean interaction (b2 * cloud)(x), refreshed at every drift evaluation
struct CloudInteraction {
  const MeanField* m;
  const Vec* cloud;  // n_law x dim
  int dim;
  Vec cloud_mean;    // valid when the linear fast path is on

  Vec eval(const Vec& x) const {
    if (m->b2_linear_slope) {
      double s = *m->b2_linear_slope;
      Vec v(dim);
      for (int k = 0; k < dim; ++k) v[k] = s * (x[k] - cloud_mean[k]);
      return v;
    }
    std::size_t n = cloud->size() / static_cast<std::size_t>(dim);
    Vec acc(dim, 0.0), u(dim);
    for (std::size_t j = 0; j < n; ++j) {
      for (int k = 0; k < dim; ++k) u[k] = x[k] - (*cloud)[j * dim + k];
      Vec v = m->b2(u);
      for (int k = 0; k < dim; ++k) acc[k] += v[k];
    }
    for (int k = 0; k < dim; ++k) acc[k] /= static_cast<double>(n);
    return acc;
  }
};

void blowup_check(const Vec& x, double t) {
  double nx = norm(x);
  if (!std::isfinite(nx) || nx > kBlowupGuard)
    throw NumericBlowup("particle state blowup at t=" + std::to_string(t));
}

// advance one state through [t0, t1] with frozen extra drift and its jumps
template <typename DriftEval>
void advance_window(Vec& x, double t0, double t1, const DriftEval& drift_eval,
                    const Vec& comp, const std::vector<JumpEvent>& jumps,
                    std::size_t& jump_pos, int dim) {
  double t = t0;
  while (true) {
    double t_jump = jump_pos < jumps.size() ? jumps[jump_pos].time : kInf;
    double t_next = std::min(t1, t_jump);
    double step = t_next - t;
    if (step > 0.0) {
      Vec b = drift_eval(x);
      for (int k = 0; k < dim; ++k) x[k] += (b[k] + comp[k]) * step;
    }
    t = t_next;
    if (t_jump <= t1) {
      for (int k = 0; k < dim; ++k) x[k] += jumps[jump_pos].z[k];
      ++jump_pos;
    } else {
      break;
    }
  }
}

}  // namespace

Ensemble simulate_particles(const ParticleSystemConfig& cfg, const QuadratureConfig& qcfg) {
  if (cfg.n < 2) throw ConfigInvalid("particle system needs n >= 2");
  if (!(cfg.dt > 0.0) || !(cfg.T > 0.0)) throw ConfigInvalid("positive dt and T required");
  const MeanField& m = mf(cfg.drift);
  int dim = cfg.drift.dim;
  check_linear_declaration(m, dim);
  {
    Vec z0(dim, 0.0);
    if (norm(m.b2(z0)) != 0.0) throw InvalidDriftConstants("b2(0) must be exactly zero");
  }

  // jump streams and initial states use disjoint salted streams per particle
  std::vector<JumpStream> js(static_cast<std::size_t>(cfg.n));
  Vec slice(static_cast<std::size_t>(cfg.n) * dim);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < cfg.n; ++i) {
    if (err) continue;
    try {
      RngStream jrng(cfg.seed, cfg.stream_offset + static_cast<std::uint64_t>(i));
      js[static_cast<std::size_t>(i)] = sample_jumps(cfg.levy, cfg.jcfg, cfg.T, jrng, qcfg);
      RngStream irng(cfg.seed ^ kInitSalt, cfg.stream_offset + static_cast<std::uint64_t>(i));
      Vec x0 = cfg.initial(irng);
      if (static_cast<int>(x0.size()) != dim)
        throw DimensionMismatch("initial sampler dimension mismatch");
      std::copy(x0.begin(), x0.end(), slice.begin() + static_cast<std::size_t>(i) * dim);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);

  std::size_t n_steps = static_cast<std::size_t>(std::ceil(cfg.T / cfg.dt - 1e-12));
  Ensemble out;
  out.n = cfg.n;
  out.dim = dim;
  out.times.push_back(0.0);
  out.slices.push_back(slice);

  std::vector<std::size_t> jump_pos(static_cast<std::size_t>(cfg.n), 0);
  for (std::size_t step = 0; step < n_steps; ++step) {
    double t0 = step * cfg.dt;
    double t1 = std::min(cfg.T, (step + 1) * cfg.dt);
    std::vector<Vec> field = interaction_field(m, slice, cfg.n, dim);
    Vec next = slice;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < cfg.n; ++i) {
      if (err) continue;
      try {
        Vec x(next.begin() + static_cast<std::size_t>(i) * dim,
              next.begin() + static_cast<std::size_t>(i + 1) * dim);
        const Vec& I = field[static_cast<std::size_t>(i)];
        auto drift_eval = [&](const Vec& xx) {
          Vec b = m.b1(xx);
          for (int k = 0; k < dim; ++k) b[k] += I[k];
          return b;
        };
        advance_window(x, t0, t1, drift_eval, js[static_cast<std::size_t>(i)].compensator,
                       js[static_cast<std::size_t>(i)].jumps,
                       jump_pos[static_cast<std::size_t>(i)], dim);
        blowup_check(x, t1);
        std::copy(x.begin(), x.end(), next.begin() + static_cast<std::size_t>(i) * dim);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
    slice = std::move(next);
    out.times.push_back(t1);
    out.slices.push_back(slice);
  }
  return out;
}

std::size_t MeasureFlow::slice_index(double t) const {
  if (times.empty()) throw Error("measure flow is empty");
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
  return std::min(i, times.size() - 1);
}

PicardResult simulate_mckv_picard(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                  const JumpSimConfig& jcfg, const InitialSampler& mu0,
                                  double T, double dt, int picard_iters,
                                  std::size_t n_law_samples, std::uint64_t seed,
                                  const QuadratureConfig& qcfg) {
  if (picard_iters < 1) throw ConfigInvalid("picard needs at least one iteration");
  const MeanField& m = mf(drift);
  int dim = drift.dim;
  check_linear_declaration(m, dim);

  std::size_t n_steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));

  Vec init(n_law_samples * static_cast<std::size_t>(dim));
  for (std::size_t j = 0; j < n_law_samples; ++j) {
    RngStream irng(seed ^ kInitSalt, j);
    Vec x0 = mu0(irng);
    if (static_cast<int>(x0.size()) != dim)
      throw DimensionMismatch("initial sampler dimension mismatch");
    std::copy(x0.begin(), x0.end(), init.begin() + j * dim);
  }

  MeasureFlow flow;
  flow.dim = dim;
  flow.times.resize(n_steps + 1);
  for (std::size_t s = 0; s <= n_steps; ++s)
    flow.times[s] = std::min(T, static_cast<double>(s) * dt);
  flow.clouds.assign(n_steps + 1, init);  // iteration 0: frozen initial law

  PicardResult result;
  Vec prev_terminal = init;
  for (int it = 1; it <= picard_iters; ++it) {
    std::vector<Vec> new_clouds(n_steps + 1, Vec(n_law_samples * dim));
    new_clouds[0] = init;
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 32)
    for (long j = 0; j < static_cast<long>(n_law_samples); ++j) {
      if (err) continue;
      try {
        // common random numbers across iterations: stream id = path index
        RngStream rng(seed, static_cast<std::uint64_t>(j));
        JumpStream js = sample_jumps(levy, jcfg, T, rng, qcfg);
        Vec x(init.begin() + j * dim, init.begin() + (j + 1) * dim);
        std::size_t jp = 0;
        for (std::size_t s = 0; s < n_steps; ++s) {
          double t0 = flow.times[s], t1 = flow.times[s + 1];
          CloudInteraction ci{&m, &flow.clouds[s], dim, {}};
          if (m.b2_linear_slope)
            ci.cloud_mean = column_mean(flow.clouds[s], static_cast<int>(n_law_samples), dim);
          auto drift_eval = [&](const Vec& xx) {
            Vec b = m.b1(xx);
            Vec inter = ci.eval(xx);
            for (int k = 0; k < dim; ++k) b[k] += inter[k];
            return b;
          };
          advance_window(x, t0, t1, drift_eval, js.compensator, js.jumps, jp, dim);
          blowup_check(x, t1);
          std::copy(x.begin(), x.end(),
                    new_clouds[s + 1].begin() + j * dim);
        }
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);

    double w1 = w1_empirical(EmpiricalMeasure::from_flat(new_clouds[n_steps], dim),
                             EmpiricalMeasure::from_flat(prev_terminal, dim));
    result.successive_w1.push_back(w1);
    prev_terminal = new_clouds[n_steps];
    flow.clouds = std::move(new_clouds);
  }
  for (std::size_t i = 1; i < result.successive_w1.size(); ++i)
    if (result.successive_w1[i] > result.successive_w1[i - 1] + 1e-12)
      result.w1_decreasing = false;
  result.flow = std::move(flow);
  return result;
}

namespace {

// column-mean cache for the linear fast path over a whole flow
struct FlowMeans {
  std::vector<Vec> means;
  const MeasureFlow* flow;
  bool active = false;

  void build(const MeasureFlow& f, const MeanField& m, int dim) {
    flow = &f;
    active = m.b2_linear_slope.has_value();
    if (!active) return;
    means.resize(f.clouds.size());
    for (std::size_t s = 0; s < f.clouds.size(); ++s)
      means[s] = column_mean(f.clouds[s],
                             static_cast<int>(f.clouds[s].size() / dim), dim);
  }
};

}  // namespace

PocCoupledResult coupled_poc_run(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                 const JumpSimConfig& jcfg, double kappa, int n,
                                 double T, double dt, const MeasureFlow& reference,
                                 const PsiFunction& psi, const InitialSampler& mu0,
                                 std::uint64_t seed, const QuadratureConfig& qcfg) {
  if (n < 2) throw ConfigInvalid("coupled_poc_run: n >= 2");
  if (!(kappa > 0.0)) throw ConfigInvalid("coupled_poc_run: kappa > 0");
  if (!has_density(levy)) throw DensityRequired("coupled_poc_run needs a density");
  const MeanField& m = mf(drift);
  int dim = drift.dim;
  check_linear_declaration(m, dim);

  std::size_t n_steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-12));
  FlowMeans fm;
  fm.build(reference, m, dim);

  // shared jump streams; marks and initial states from salted substreams,
  // with identical initial samples for each (copy, particle) pair
  std::vector<JumpStream> js(static_cast<std::size_t>(n));
  std::vector<RngStream> marks;
  marks.reserve(static_cast<std::size_t>(n));
  Vec particles(static_cast<std::size_t>(n) * dim);
  Vec copies(static_cast<std::size_t>(n) * dim);
  for (int i = 0; i < n; ++i) {
    RngStream jrng(seed, static_cast<std::uint64_t>(i));
    js[static_cast<std::size_t>(i)] = sample_jumps(levy, jcfg, T, jrng, qcfg);
    marks.emplace_back(seed ^ kMarkSalt, static_cast<std::uint64_t>(i));
    RngStream irng(seed ^ kInitSalt, static_cast<std::uint64_t>(i));
    Vec x0 = mu0(irng);
    if (static_cast<int>(x0.size()) != dim)
      throw DimensionMismatch("initial sampler dimension mismatch");
    std::copy(x0.begin(), x0.end(), particles.begin() + static_cast<std::size_t>(i) * dim);
    std::copy(x0.begin(), x0.end(), copies.begin() + static_cast<std::size_t>(i) * dim);
  }

  PocCoupledResult out;
  out.times.push_back(0.0);
  out.mean_psi.push_back(0.0);

  std::vector<std::size_t> jump_pos(static_cast<std::size_t>(n), 0);
  for (std::size_t s = 0; s < n_steps; ++s) {
    double t0 = std::min(T, static_cast<double>(s) * dt);
    double t1 = std::min(T, static_cast<double>(s + 1) * dt);
    std::vector<Vec> field = interaction_field(m, particles, n, dim);
    std::size_t ref_idx = reference.slice_index(t0);
    CloudInteraction ci{&m, &reference.clouds[ref_idx], dim, {}};
    if (m.b2_linear_slope) ci.cloud_mean = fm.means[ref_idx];

    for (int i = 0; i < n; ++i) {
      Vec x(particles.begin() + static_cast<std::size_t>(i) * dim,
            particles.begin() + static_cast<std::size_t>(i + 1) * dim);
      Vec xb(copies.begin() + static_cast<std::size_t>(i) * dim,
             copies.begin() + static_cast<std::size_t>(i + 1) * dim);
      const Vec& I = field[static_cast<std::size_t>(i)];
      const auto& stream = js[static_cast<std::size_t>(i)];
      std::size_t& jp = jump_pos[static_cast<std::size_t>(i)];
      double t = t0;
      while (true) {
        double t_jump = jp < stream.jumps.size() ? stream.jumps[jp].time : kInf;
        double t_next = std::min(t1, t_jump);
        double step = t_next - t;
        if (step > 0.0) {
          Vec bp = m.b1(x);
          for (int k = 0; k < dim; ++k)
            x[k] += (bp[k] + I[k] + stream.compensator[k]) * step;
          Vec bc = m.b1(xb);
          Vec inter = ci.eval(xb);
          for (int k = 0; k < dim; ++k)
            xb[k] += (bc[k] + inter[k] + stream.compensator[k]) * step;
        }
        t = t_next;
        if (t_jump <= t1) {
          const Vec& z = stream.jumps[jp].z;
          double u = marks[static_cast<std::size_t>(i)].uniform01();
          // particle is the modified marginal: U = copy - particle
          Vec U = sub(xb, x);
          double r = norm(U);
          Vec Uk = clip_to_length(U, kappa);
          double r1 = rho(levy, scaled(Uk, -1.0), z);
          double r2 = rho(levy, Uk, z);
          double mm = 0.0;
          if (u <= 0.5 * r1) mm = 1.0;
          else if (u <= 0.5 * (r1 + r2)) mm = -1.0;
          for (int k = 0; k < dim; ++k) xb[k] += z[k];
          if (mm == 1.0 && r <= kappa) {
            x = xb;  // exact coalescence of the pair at this jump
          } else {
            for (int k = 0; k < dim; ++k) x[k] += z[k] + Uk[k] * mm;
          }
          ++jp;
        } else {
          break;
        }
      }
      blowup_check(x, t1);
      blowup_check(xb, t1);
      std::copy(x.begin(), x.end(), particles.begin() + static_cast<std::size_t>(i) * dim);
      std::copy(xb.begin(), xb.end(), copies.begin() + static_cast<std::size_t>(i) * dim);
    }

    Vec psis(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Vec U = sub(std::span<const double>(copies.data() + static_cast<std::size_t>(i) * dim,
                                          static_cast<std::size_t>(dim)),
                  std::span<const double>(particles.data() + static_cast<std::size_t>(i) * dim,
                                          static_cast<std::size_t>(dim)));
      psis[static_cast<std::size_t>(i)] = psi(norm(U));
    }
    out.times.push_back(t1);
    out.mean_psi.push_back(mean_of(psis));
  }

  out.terminal_w1 = w1_empirical(EmpiricalMeasure::from_flat(particles, dim),
                                 reference.cloud_at(T));
  return out;
}

PocCurve poc_error_curve(const DriftSpec& drift, const LevyMeasureSpec& levy,
                         const JumpSimConfig& jcfg, const std::vector<int>& n_list,
                         double T, double dt, const MeasureFlow& reference,
                         const InitialSampler& mu0, int replicates, std::uint64_t seed,
                         const QuadratureConfig& qcfg) {
  if (n_list.empty()) throw ConfigInvalid("poc_error_curve: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw ConfigInvalid("poc_error_curve: n_list must increase");
  EmpiricalMeasure ref_cloud = reference.cloud_at(T);

  PocCurve curve;
  curve.n_list = n_list;
  for (int n : n_list) {
    Vec reps;
    for (int r = 0; r < replicates; ++r) {
      std::uint64_t mix = seed;
      std::uint64_t run_seed = splitmix64(mix) ^
                               (static_cast<std::uint64_t>(n) * 0x100000001b3ULL) ^
                               (static_cast<std::uint64_t>(r) * 0x9e3779b97f4a7c15ULL);
      ParticleSystemConfig cfg;
      cfg.n = n;
      cfg.drift = drift;
      cfg.levy = levy;
      cfg.jcfg = jcfg;
      cfg.dt = dt;
      cfg.T = T;
      cfg.initial = mu0;
      cfg.seed = run_seed;
      Ensemble e = simulate_particles(cfg, qcfg);
      double w1 = w1_empirical(e.cloud(e.slices.size() - 1), ref_cloud);
      curve.rows.push_back({n, r, w1});
      reps.push_back(w1);
    }
    curve.mean_w1.push_back(mean_of(reps));
    curve.se_w1.push_back(se_of_mean(reps));
  }
  if (n_list.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t k = n_list.size();
    for (std::size_t i = 0; i < k; ++i) {
      double X = std::log(static_cast<double>(n_list[i]));
      double Y = std::log(std::max(curve.mean_w1[i], 1e-300));
      sx += X; sy += Y; sxx += X * X; sxy += X * Y;
    }
    double den = k * sxx - sx * sx;
    double slope = (k * sxy - sx * sy) / den;
    double inter = (sy - slope * sx) / k;
    double ss_res = 0, ss_tot = 0, ym = sy / k;
    for (std::size_t i = 0; i < k; ++i) {
      double X = std::log(static_cast<double>(n_list[i]));
      double Y = std::log(std::max(curve.mean_w1[i], 1e-300));
      double fit = inter + slope * X;
      ss_res += (Y - fit) * (Y - fit);
      ss_tot += (Y - ym) * (Y - ym);
    }
    curve.loglog_slope = slope;
    curve.loglog_r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  }
  return curve;
}

PlateauResult poc_plateau(const DriftSpec& drift, const LevyMeasureSpec& levy,
                          const JumpSimConfig& jcfg, int n, const Vec& t_probe,
                          double dt, const MeasureFlow& reference,
                          const InitialSampler& mu0, int replicates, std::uint64_t seed,
                          const QuadratureConfig& qcfg) {
  if (t_probe.empty()) throw ConfigInvalid("poc_plateau: empty probe times");
  double T = *std::max_element(t_probe.begin(), t_probe.end());
  std::vector<Vec> vals(t_probe.size());
  for (int r = 0; r < replicates; ++r) {
    std::uint64_t mix = seed + 17 * static_cast<std::uint64_t>(r);
    std::uint64_t run_seed = splitmix64(mix);
    ParticleSystemConfig cfg;
    cfg.n = n;
    cfg.drift = drift;
    cfg.levy = levy;
    cfg.jcfg = jcfg;
    cfg.dt = dt;
    cfg.T = T;
    cfg.initial = mu0;
    cfg.seed = run_seed;
    Ensemble e = simulate_particles(cfg, qcfg);
    for (std::size_t k = 0; k < t_probe.size(); ++k) {
      auto it = std::lower_bound(e.times.begin(), e.times.end(), t_probe[k] - 1e-12);
      std::size_t idx = std::min(static_cast<std::size_t>(it - e.times.begin()),
                                 e.times.size() - 1);
      double w1 = w1_empirical(e.cloud(idx), reference.cloud_at(t_probe[k]));
      vals[k].push_back(w1);
    }
  }
  PlateauResult out;
  out.t_probe = t_probe;
  for (auto& v : vals) {
    out.mean_w1.push_back(mean_of(v));
    out.se_w1.push_back(se_of_mean(v));
  }
  return out;
}

}  // namespace lvc
