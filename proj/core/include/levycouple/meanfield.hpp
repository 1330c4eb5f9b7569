#pragma once

#include <functional>
#include <optional>

#include "levycouple/drift.hpp"
#include "levycouple/levy.hpp"
#include "levycouple/metrics.hpp"
#include "levycouple/psi.hpp"

namespace lvc {

using InitialSampler = std::function<Vec(RngStream&)>;

struct ParticleSystemConfig {
  int n = 2;  // at least 2
  DriftSpec drift;  // MeanField kind
  LevyMeasureSpec levy;
  JumpSimConfig jcfg;
  double dt = 0.01;
  double T = 1.0;
  InitialSampler initial;
  std::uint64_t seed = 1;
  std::uint64_t stream_offset = 0;
};

struct Ensemble {
  Vec times;
  std::vector<Vec> slices;  // per time, n x dim row-major
  int n = 0;
  int dim = 1;

  std::span<const double> particle(std::size_t slice, int i) const {
    return {slices[slice].data() + static_cast<std::size_t>(i) * dim,
            static_cast<std::size_t>(dim)};
  }
  EmpiricalMeasure cloud(std::size_t slice) const {
    return EmpiricalMeasure::from_flat(slices[slice], dim);
  }
};

// Euler steps on the dt grid with the pairwise interaction field recomputed
// once per step (O(n^2), or O(n) via the declared linear fast path); each
// particle is jump-adapted inside the step with its own stream.
Ensemble simulate_particles(const ParticleSystemConfig& cfg,
                            const QuadratureConfig& qcfg = {});

struct MeasureFlow {
  Vec times;
  std::vector<Vec> clouds;  // per time, n_law x dim
  int dim = 1;

  // piecewise-constant in time between grid points
  std::size_t slice_index(double t) const;
  EmpiricalMeasure cloud_at(double t) const {
    return EmpiricalMeasure::from_flat(clouds[slice_index(t)], dim);
  }
};

struct PicardResult {
  MeasureFlow flow;
  Vec successive_w1;  // terminal W1 between consecutive iterates
  bool w1_decreasing = true;  // NonConvergence is a warning, not an error
};

// Picard law iteration: iteration k freezes the iteration k-1 cloud flow in
// the drift and re-solves with common random numbers per path.
PicardResult simulate_mckv_picard(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                  const JumpSimConfig& jcfg, const InitialSampler& mu0,
                                  double T, double dt, int picard_iters,
                                  std::size_t n_law_samples, std::uint64_t seed,
                                  const QuadratureConfig& qcfg = {});

struct PocCoupledResult {
  Vec times;
  Vec mean_psi;  // (1/n) sum_i psi(|U_t^i|)
  double terminal_w1 = 0.0;
};

// n McKean-Vlasov copies driven by the frozen reference flow share jump
// streams with the n particles; the particle side receives the refined basic
// coupling shifts (delta = 0). Each pair starts from the same mu0 draw.
PocCoupledResult coupled_poc_run(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                 const JumpSimConfig& jcfg, double kappa, int n,
                                 double T, double dt, const MeasureFlow& reference,
                                 const PsiFunction& psi, const InitialSampler& mu0,
                                 std::uint64_t seed, const QuadratureConfig& qcfg = {});

struct PocCurveRow {
  int n;
  int replicate;
  double w1;
};

struct PocCurve {
  std::vector<PocCurveRow> rows;
  std::vector<int> n_list;
  Vec mean_w1;
  Vec se_w1;
  std::optional<double> loglog_slope;  // absent for a single n
  std::optional<double> loglog_r2;
};

PocCurve poc_error_curve(const DriftSpec& drift, const LevyMeasureSpec& levy,
                         const JumpSimConfig& jcfg, const std::vector<int>& n_list,
                         double T, double dt, const MeasureFlow& reference,
                         const InitialSampler& mu0, int replicates, std::uint64_t seed,
                         const QuadratureConfig& qcfg = {});

// W1(particle cloud at t, reference cloud at t) at a set of probe times,
// averaged over replicates (used by the uniform-in-time check).
struct PlateauResult {
  Vec t_probe;
  Vec mean_w1;
  Vec se_w1;
};

PlateauResult poc_plateau(const DriftSpec& drift, const LevyMeasureSpec& levy,
                          const JumpSimConfig& jcfg, int n, const Vec& t_probe,
                          double dt, const MeasureFlow& reference,
                          const InitialSampler& mu0, int replicates, std::uint64_t seed,
                          const QuadratureConfig& qcfg = {});

}  // namespace lvc
