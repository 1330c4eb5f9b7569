#pragma once

#include <functional>
#include <optional>

#include "levycouple/drift.hpp"
#include "levycouple/levy.hpp"
#include "levycouple/psi.hpp"
#include "levycouple/sde.hpp"

namespace lvc {

// Refined basic coupling threshold kappa with optional delta-mixture:
// below |x-y| = delta/2 the coupling is synchronous, above delta it is the
// refined basic coupling, with a smooth C^2 blend in between. delta = 0 means
// pure refined basic coupling (phi == 1).
struct CouplingConfig {
  double kappa = 0.5;
  double delta = 0.0;
  std::function<double(double)> phi;  // defaulted to the smoothstep cutoff
  std::optional<LevyMeasureSpec> coupled_submeasure;

  double phi_value(double r) const;
};

// Smoothstep cutoff: 0 on [0, delta/2], 1 on [delta, inf), C^2 in between.
double default_phi(double delta, double r);

// Grid check of the phi invariants (range, boundary values, monotonicity).
void validate_coupling_config(const CouplingConfig& cfg);

struct CoupledPath {
  Vec times;
  Vec xs, ys;  // row-major, stride dim
  std::vector<std::uint8_t> coupled;
  int dim = 1;
  std::optional<double> coupling_time;

  std::size_t size() const { return times.size(); }
  std::span<const double> x_state(std::size_t i) const {
    return {xs.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> y_state(std::size_t i) const {
    return {ys.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

// Both marginals share the jump stream and the uniform marks; Y receives the
// refined-basic-coupling shift (U)_kappa * m * phi(|U|). For delta = 0 an
// m = +1 jump at |U| <= kappa coalesces exactly and the pair is absorbed.
CoupledPath simulate_coupled(const DriftSpec& drift, const LevyMeasureSpec& levy,
                             const JumpSimConfig& jcfg, const CouplingConfig& ccfg,
                             const Vec& x0, const Vec& y0, double horizon, double dt,
                             RngStream& rng, const QuadratureConfig& qcfg = {});

struct CoupledTerminal {
  Vec x, y;
  std::optional<double> coupling_time;
};

// Storage-free variant for ensembles.
CoupledTerminal simulate_coupled_terminal(const DriftSpec& drift,
                                          const LevyMeasureSpec& levy,
                                          const JumpSimConfig& jcfg,
                                          const CouplingConfig& ccfg, const Vec& x0,
                                          const Vec& y0, double horizon, double dt,
                                          RngStream& rng,
                                          const QuadratureConfig& qcfg = {});

// n coupled pairs, stream id = stream_offset + pair index.
std::vector<CoupledTerminal> coupled_ensemble(
    const DriftSpec& drift, const LevyMeasureSpec& levy, const JumpSimConfig& jcfg,
    const CouplingConfig& ccfg, const Vec& x0, const Vec& y0, double horizon,
    double dt, std::size_t n_pairs, std::uint64_t seed,
    std::uint64_t stream_offset = 0, const QuadratureConfig& qcfg = {});

struct SurvivalCurve {
  Vec t;
  Vec survival;  // empirical P(T > t)
  Vec se;        // binomial standard errors
};

SurvivalCurve coupling_time_survival(const std::vector<CoupledTerminal>& ensemble,
                                     const Vec& t_grid);

enum class MuVariant { Exact, ConservativeJ };

// One-dimensional-in-r action of the coupling operator on psi(|x-y|):
//   1/2 mu_{(x-y)_k}(R^d) [psi(r + k^r) + psi(r - k^r) - 2 psi(r)]
//   + psi'(r)/r <b(x)-b(y), x-y>.
// ConservativeJ replaces the overlap mass by J(k^r); the bracket is <= 0 for
// concave psi, so the result is an upper bound.
double coupling_psi_generator(const PsiFunction& psi, const LevyMeasureSpec& levy,
                              const CouplingConfig& ccfg, double drift_inner_product,
                              double r, MuVariant variant = MuVariant::Exact,
                              const QuadratureConfig& qcfg = {});

struct ContractionCheck {
  double max_value = -kInf;  // max over grid of bound form + lambda psi
  double argmax = 0.0;
};

// Evaluates psi'(r)[K1 r 1_{r<=l0} - K2 r 1_{r>l0}]
//   + 1/2 J(k^r)[psi(r+k^r)+psi(r-k^r)-2 psi(r)] + lambda psi(r)
// on the grid; nonpositive (up to numerics) when lambda is the chain's rate.
ContractionCheck verify_contraction(const PsiFunction& psi, double lambda, double K1,
                                    double K2, double l0, const LevyMeasureSpec& levy,
                                    const CouplingConfig& ccfg, const Vec& r_grid,
                                    const QuadratureConfig& qcfg = {});

using PairFunction = std::function<double(const Vec&, const Vec&)>;

// Finite-difference estimate of the coupling generator applied to F.
McEstimate coupling_dynkin(const PairFunction& F, const DriftSpec& drift,
                           const LevyMeasureSpec& levy, const JumpSimConfig& jcfg,
                           const CouplingConfig& ccfg, const Vec& x, const Vec& y,
                           double h, std::size_t n_samples, std::uint64_t seed,
                           const QuadratureConfig& qcfg = {});

}  // namespace lvc
