#include "levycouple/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lvc {

void EmpiricalMeasure::validate() const {
  if (dim < 1) throw DimensionMismatch("empirical measure: dim >= 1 required");
  if (points.size() % static_cast<std::size_t>(dim) != 0)
    throw DimensionMismatch("empirical measure: ragged point array");
  if (!weights.empty()) {
    if (weights.size() != size()) throw SizeMismatch("weights size mismatch");
    double s = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw Error("weights must be nonnegative");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw Error("weights must sum to 1 within 1e-12");
  }
}

EmpiricalMeasure EmpiricalMeasure::from_states(const std::vector<Vec>& states, int dim) {
  EmpiricalMeasure m;
  m.dim = dim;
  m.points.reserve(states.size() * static_cast<std::size_t>(dim));
  for (const auto& s : states) m.points.insert(m.points.end(), s.begin(), s.end());
  return m;
}

EmpiricalMeasure EmpiricalMeasure::from_flat(Vec flat, int dim) {
  EmpiricalMeasure m;
  m.dim = dim;
  m.points = std::move(flat);
  return m;
}

namespace {

// Exact 1D transport cost between weighted quantile functions.
double w1_sorted_weighted(std::vector<std::pair<double, double>>& a,
                          std::vector<std::pair<double, double>>& b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double wa = a.empty() ? 0.0 : a[0].second;
  double wb = b.empty() ? 0.0 : b[0].second;
  while (i < a.size() && j < b.size()) {
    double m = std::min(wa, wb);
    cost += m * std::abs(a[i].first - b[j].first);
    wa -= m;
    wb -= m;
    if (wa <= 1e-15) {
      ++i;
      if (i < a.size()) wa = a[i].second;
    }
    if (wb <= 1e-15) {
      ++j;
      if (j < b.size()) wb = b[j].second;
    }
  }
  return cost;
}

}  // namespace

double solve_assignment(const std::vector<double>& cost, std::size_t n) {
  // shortest augmenting path algorithm with dual potentials (exact optimum)
  if (cost.size() != n * n) throw SizeMismatch("solve_assignment: cost must be n x n");
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, n);  // match[col] = row
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> min_to(n + 1, kInf);
    std::vector<std::size_t> prev(n + 1, n);
    std::vector<bool> used(n + 1, false);
    std::size_t j0 = n;
    match[n] = i;
    do {
      used[j0] = true;
      std::size_t i0 = match[j0], j1 = n;
      double delta = kInf;
      for (std::size_t j = 0; j < n; ++j) {
        if (used[j]) continue;
        double cur = cost[i0 * n + j] - u[i0] - v[j];
        if (cur < min_to[j]) {
          min_to[j] = cur;
          prev[j] = j0;
        }
        if (min_to[j] < delta) {
          delta = min_to[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_to[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != n);
    while (j0 != n) {
      std::size_t j1 = prev[j0];
      match[j0] = match[j1];
      j0 = j1;
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    if (match[j] != n) total += cost[match[j] * n + j];
  return total;
}

double w1_empirical(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  a.validate();
  b.validate();
  if (a.dim != b.dim) throw DimensionMismatch("w1_empirical: dimension mismatch");
  if (a.size() == 0 || b.size() == 0) throw SizeMismatch("w1_empirical: empty cloud");

  if (a.dim == 1) {
    if (a.weights.empty() && b.weights.empty() && a.size() == b.size()) {
      Vec xs(a.points), ys(b.points);
      std::sort(xs.begin(), xs.end());
      std::sort(ys.begin(), ys.end());
      Vec diffs(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) diffs[i] = std::abs(xs[i] - ys[i]);
      return mean_of(diffs);
    }
    std::vector<std::pair<double, double>> wa(a.size()), wb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) wa[i] = {a.points[i], a.weight(i)};
    for (std::size_t i = 0; i < b.size(); ++i) wb[i] = {b.points[i], b.weight(i)};
    return w1_sorted_weighted(wa, wb);
  }

  if (a.size() != b.size())
    throw SizeMismatch("w1_empirical: exact multi-d path needs equal sample counts");
  if (!a.weights.empty() || !b.weights.empty())
    throw SizeMismatch("w1_empirical: exact multi-d path needs uniform weights");
  std::size_t n = a.size();
  if (n > 4096) throw SizeMismatch("w1_empirical: exact multi-d path capped at n = 4096");
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    auto pa = a.point(i);
    for (std::size_t j = 0; j < n; ++j) {
      auto pb = b.point(j);
      double s = 0.0;
      for (int k = 0; k < a.dim; ++k) {
        double d = pa[k] - pb[k];
        s += d * d;
      }
      cost[i * n + j] = std::sqrt(s);
    }
  }
  return solve_assignment(cost, n) / static_cast<double>(n);
}

McEstimate w_phi_coupled(const PairFunction& phi,
                         const std::vector<CoupledTerminal>& pairs) {
  if (pairs.empty()) throw Error("w_phi_coupled: empty ensemble");
  Vec vals(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) vals[i] = phi(pairs[i].x, pairs[i].y);
  return {mean_of(vals), se_of_mean(vals)};
}

SurvivalCurve tv_upper_from_coupling(const SurvivalCurve& survival) {
  SurvivalCurve out = survival;
  for (auto& v : out.survival) v *= 2.0;
  for (auto& v : out.se) v *= 2.0;
  return out;
}

DecayFit decay_fit(const Vec& times, const Vec& values, double burn_in_fraction) {
  if (times.size() != values.size()) throw SizeMismatch("decay_fit: length mismatch");
  if (times.size() < 4) throw Error("decay_fit: at least 4 points required");
  double t_lo = times.front(), t_hi = times.back();
  double cut = t_lo + burn_in_fraction * (t_hi - t_lo);

  std::vector<std::size_t> bad;
  Vec ts, ys;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < cut) continue;
    if (!(values[i] > 0.0)) {
      bad.push_back(i);
      continue;
    }
    ts.push_back(times[i]);
    ys.push_back(std::log(values[i]));
  }
  if (!bad.empty()) {
    std::string msg = "decay_fit: nonpositive values at indices";
    for (auto i : bad) msg += " " + std::to_string(i);
    throw NonPositiveValues(msg);
  }
  std::size_t n = ts.size();
  if (n < 4) throw Error("decay_fit: fewer than 4 points after burn-in");

  double tm = mean_of(ts), ym = mean_of(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (ts[i] - tm) * (ts[i] - tm);
    sxy += (ts[i] - tm) * (ys[i] - ym);
  }
  if (sxx == 0.0) throw Error("decay_fit: degenerate time grid");
  double slope = sxy / sxx;
  double intercept = ym - slope * tm;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double fit = intercept + slope * ts[i];
    ss_res += (ys[i] - fit) * (ys[i] - fit);
    ss_tot += (ys[i] - ym) * (ys[i] - ym);
  }
  DecayFit out;
  out.rate = -slope;
  out.intercept = intercept;
  out.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  out.n_points = n;
  double sigma2 = n > 2 ? ss_res / static_cast<double>(n - 2) : 0.0;
  out.rate_se = std::sqrt(sigma2 / sxx);
  return out;
}

}  // namespace lvc
