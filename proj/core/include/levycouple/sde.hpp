#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "levycouple/drift.hpp"
#include "levycouple/levy.hpp"

namespace lvc {

// Overflow guard: blow past this norm and the simulation reports the time.
constexpr double kBlowupGuard = 1e12;

struct Path {
  Vec times;
  Vec states;  // row-major, stride dim
  int dim = 1;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  Vec terminal() const {
    return Vec(states.end() - dim, states.end());
  }
};

// Jump-adapted Euler for dX = b(X) dt + dZ: the dt grid is merged with the
// sampled jump times, so jumps land exactly where they were drawn.
Path simulate(const DriftSpec& drift, const LevyMeasureSpec& levy,
              const JumpSimConfig& jcfg, const Vec& x0, double horizon, double dt,
              RngStream& rng, const QuadratureConfig& qcfg = {});

// Same stepping without storing the trajectory.
Vec simulate_terminal(const DriftSpec& drift, const LevyMeasureSpec& levy,
                      const JumpSimConfig& jcfg, const Vec& x0, double horizon,
                      double dt, RngStream& rng, const QuadratureConfig& qcfg = {});

// n independent terminal states; path i uses stream id stream_offset + i.
// Deterministic given (seed, stream_offset) regardless of thread count.
std::vector<Vec> terminal_ensemble(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                   const JumpSimConfig& jcfg, const Vec& x0,
                                   double horizon, double dt, std::size_t n_paths,
                                   std::uint64_t seed, std::uint64_t stream_offset = 0,
                                   const QuadratureConfig& qcfg = {});

// Scalar C^2 test function with gradient.
struct ScalarC2 {
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
};

struct GeneratorResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

// Lf(x) = int (f(x+z) - f(x) - <grad f(x), z> 1_{|z|<=1}) nu(dz) + <b(x), grad f(x)>.
GeneratorResult generator_apply(const DriftSpec& drift, const LevyMeasureSpec& levy,
                                const ScalarC2& f, const Vec& x,
                                const QuadratureConfig& qcfg = {});

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte-Carlo estimate of (E f(X_h) - f(x)) / h; converges to Lf(x) as h -> 0
// with O(h) bias.
McEstimate dynkin_residual(const DriftSpec& drift, const LevyMeasureSpec& levy,
                           const JumpSimConfig& jcfg, const ScalarC2& f, const Vec& x,
                           double h, std::size_t n_samples, std::uint64_t seed,
                           const QuadratureConfig& qcfg = {});

}  // namespace lvc
