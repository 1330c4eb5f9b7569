#pragma once

#include <functional>

#include "levycouple/common.hpp"
#include "levycouple/coupling.hpp"

namespace lvc {

struct EmpiricalMeasure {
  Vec points;   // row-major, stride dim
  int dim = 1;
  Vec weights;  // empty = uniform 1/n

  std::size_t size() const { return points.size() / static_cast<std::size_t>(dim); }
  std::span<const double> point(std::size_t i) const {
    return {points.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  double weight(std::size_t i) const {
    return weights.empty() ? 1.0 / static_cast<double>(size()) : weights[i];
  }
  void validate() const;

  static EmpiricalMeasure from_states(const std::vector<Vec>& states, int dim);
  static EmpiricalMeasure from_flat(Vec flat, int dim);
};

// Exact L1 transport cost. 1D: quantile coupling on sorted samples.
// d >= 2: exact min-cost assignment (shortest augmenting paths), which needs
// equal sample counts, uniform weights and n <= 4096.
double w1_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

// Exact solution of the dense assignment problem; returns the optimal cost.
// cost is row-major n x n.
double solve_assignment(const std::vector<double>& cost, std::size_t n);

// Mean Phi(X_T, Y_T) over coupled terminal pairs: an upper bound on
// W_Phi of the marginal laws (any coupling dominates the infimum).
McEstimate w_phi_coupled(const PairFunction& phi,
                         const std::vector<CoupledTerminal>& pairs);

// Classical coupling inequality: ||P_t(x,.) - P_t(y,.)||_var <= 2 P(T > t)
// (mass-2 total variation convention).
SurvivalCurve tv_upper_from_coupling(const SurvivalCurve& survival);

struct DecayFit {
  double rate = 0.0;       // -slope of the log-linear fit
  double intercept = 0.0;
  double r_squared = 0.0;
  double rate_se = 0.0;
  std::size_t n_points = 0;
};

// OLS on (t, log value) after discarding the burn-in fraction of the time
// range. Throws NonPositiveValues when a post-burn-in value is <= 0.
DecayFit decay_fit(const Vec& times, const Vec& values, double burn_in_fraction = 0.2);

}  // namespace lvc
