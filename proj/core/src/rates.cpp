#include "levycouple/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lvc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RateEntry entry(const std::string& name, double value, const std::string& formula) {
  RateEntry e;
  e.name = name;
  e.value = value;
  e.log_value = value > 0.0 ? std::log(value) : -kInf;
  e.formula = formula;
  return e;
}

RateEntry entry_log(const std::string& name, double log_value, const std::string& formula) {
  RateEntry e;
  e.name = name;
  e.value = std::exp(log_value);
  e.log_value = log_value;
  e.formula = formula;
  return e;
}

}  // namespace

double RateReport::get(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return e.value;
  throw Error("RateReport: no constant named " + name);
}

std::string RateReport::to_text() const {
  std::ostringstream os;
  os << "theorem: " << theorem << "\n";
  for (const auto& e : entries) {
    os << e.name << " = " << fmt(e.value);
    if (e.value == 0.0 && std::isfinite(e.log_value))
      os << "  (log = " << fmt(e.log_value) << ")";
    os << "\n";
  }
  for (const auto& n : notes) os << "# " << n << "\n";
  return os.str();
}

std::vector<std::vector<std::string>> RateReport::to_csv_rows() const {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : entries)
    rows.push_back({e.name, fmt(e.value), e.formula, theorem});
  return rows;
}

ThtpwRates thtpw_rates(double K1, double K2, double l0, double K3,
                       const SigmaMinorant& sigma) {
  if (!(K2 > 0.0)) throw Error("thtpw_rates: K2 > 0 required");
  if (K1 < 0.0 || K3 < 0.0 || l0 < 0.0) throw Error("thtpw_rates: negative constant");

  ThtpwRates out;
  out.report.theorem = "contractivity_at_infinity";
  double c1, c2;
  if (l0 == 0.0) {
    // convention g1(0) = 0, g1(2 l0)^{-1} = +inf
    c2 = 2.0 * K2;
    c1 = 1.0;
    out.psi = make_concave_integral_psi(c1, 0.0, 0.5, 0.0);
  } else {
    if (!(sigma.c0 > 0.0)) throw InvalidSigma("thtpw_rates: sigma minorant not positive");
    double g1_end = sigma.g1(2.0 * l0);
    c2 = std::min(2.0 * K2, 1.0 / g1_end);
    double B = (c2 + 2.0 * K1) / (sigma.c0 * sigma.alpha);  // c2 g(s) = B s^alpha
    c1 = std::exp(-B * std::pow(2.0 * l0, sigma.alpha));
    out.psi = make_concave_integral_psi(c1, B, sigma.alpha, l0);
  }
  double lambda0 = c1 * c2 / (1.0 + c1);
  double lambda = lambda0 - (1.0 + c1) * K3 / (2.0 * c1);
  double C = (1.0 + c1) / (2.0 * c1);

  out.c1 = c1;
  out.c2 = c2;
  out.lambda0 = lambda0;
  out.lambda = lambda;
  out.C = C;
  out.report.lambda_nonpositive = !(lambda > 0.0);
  out.report.entries = {
      entry("c0", sigma.c0, "sigma(r) = c0 r^(1-alpha)"),
      entry("sigma_alpha", sigma.alpha, "exponent of the sigma minorant"),
      entry("g1_2l0", l0 == 0.0 ? 0.0 : sigma.g1(2.0 * l0), "g1(r) = r^alpha/(c0 alpha)"),
      entry("c2", c2, "c2 = min(2 K2, 1/g1(2 l0))"),
      entry("c1", c1, "c1 = exp(-c2 g(2 l0)), g = (1 + 2 K1/c2) g1"),
      entry("lambda0", lambda0, "lambda0 = c1 c2/(1 + c1)"),
      entry("lambda", lambda, "lambda = lambda0 - (1 + c1) K3/(2 c1)"),
      entry("C", C, "C = (1 + c1)/(2 c1)"),
      entry("K1", K1, "input"),
      entry("K2", K2, "input"),
      entry("K3", K3, "input"),
      entry("l0", l0, "input"),
  };
  if (out.report.lambda_nonpositive)
    out.report.notes.push_back("lambda <= 0: pre-rate constants still valid, rate claim void");
  return out;
}

AdditiveRates additive_rates(double K1, const LevyMeasureSpec& levy, double kappa,
                             double lambda_lyap, double C_lyap, const LyapunovSpec& V,
                             const QuadratureConfig& cfg) {
  if (!(kappa > 0.0)) throw Error("additive_rates: kappa > 0 required");
  if (!(lambda_lyap > 0.0 && C_lyap > 0.0))
    throw Error("additive_rates: Lyapunov pair must be positive");
  double Jk = J(levy, kappa, cfg).value;
  if (!(Jk > 1e-14)) throw DegenerateOverlap("additive_rates: J(kappa) vanishes");

  AdditiveRates out;
  out.report.theorem = "additive_metric";

  // S0 = { lambda (V(x)+V(y)) <= 16 C }; for V = 1 + |x| away from the unit
  // ball the diameter is closed-form: sup |x-y| = 2 (8 C/lambda - 1).
  double budget = 8.0 * C_lyap / lambda_lyap;  // per-marginal V budget
  double l0;
  if (budget < V.v_origin) {
    out.s0_empty = true;
    l0 = 1.0;  // empty-set convention: floor value
  } else {
    l0 = 2.0 * (budget - 1.0) + 1.0;
  }
  double c = 4.0 * K1 * l0 / (Jk * kappa * kappa) + 1.0;
  double log_ecl0 = -c * l0;
  double a = 4.0 * K1 * c / Jk + kappa * kappa * c * c * std::exp(log_ecl0);
  double log_eps = std::log(Jk * kappa * kappa * c * c / (16.0 * C_lyap)) + log_ecl0;
  double eps = std::exp(log_eps);

  // both lambda0 branches in log space; the linear-space denominators stay
  // O(1) because eps and e^{-c l0} only help them
  double den1 = 8.0 * (lambda_lyap + a * lambda_lyap + 16.0 * C_lyap * eps);
  double log_t1 = std::log(lambda_lyap * Jk * kappa * kappa * c * c) + log_ecl0 -
                  std::log(den1);
  double den2 = 16.0 * C_lyap * eps +
                lambda_lyap * (1.0 + a + c * std::exp(2.0 * log_ecl0));
  double log_t2 = std::log(4.0 * lambda_lyap * C_lyap) + log_eps - std::log(den2);
  double log_lambda0 = std::min(log_t1, log_t2);
  double lambda0 = std::exp(log_lambda0);

  out.psi = make_exp_rational_psi(c, l0);
  out.l0 = l0;
  out.c = c;
  out.a = a;
  out.eps = eps;
  out.lambda0 = lambda0;
  out.log_eps = log_eps;
  out.log_lambda0 = log_lambda0;
  out.report.entries = {
      entry("J_kappa", Jk, "J(kappa)"),
      entry("kappa", kappa, "input"),
      entry("l0", l0, "l0 = sup_{S0} |x-y| + 1, S0 = {lambda(V(x)+V(y)) <= 16 C}"),
      entry("c", c, "c = 4 K1 l0/(J(kappa) kappa^2) + 1"),
      entry("a", a, "a = 4 K1 c/J(kappa) + kappa^2 c^2 e^{-c l0}"),
      entry_log("eps", log_eps, "eps = J(kappa) kappa^2 c^2 e^{-c l0}/(16 C)"),
      entry_log("lambda0", log_lambda0,
                "lambda0 = min(lambda J k^2 c^2 e^{-c l0}/(8(lambda + a lambda + 16 C eps)), "
                "4 eps lambda C/(16 C eps + lambda(1 + a + c e^{-2 c l0})))"),
      entry("lambda_lyap", lambda_lyap, "input"),
      entry("C_lyap", C_lyap, "input"),
      entry("K1", K1, "input"),
  };
  if (out.s0_empty)
    out.report.notes.push_back("S0 empty: l0 clipped to 1 by convention");
  if (lambda0 == 0.0)
    out.report.notes.push_back("lambda0 underflows; see its log entry");
  return out;
}

double poc_threshold(double K2b1, double lambda0, double c1) {
  if (!(K2b1 > 0.0 && lambda0 > 0.0 && c1 > 0.0))
    throw Error("poc_threshold: positive inputs required");
  return std::min(2.0 * K2b1 / 5.0, lambda0 * c1 / (2.0 * (1.0 + c1)));
}

std::vector<Vec> lyapunov_default_grid(int dim, double r_max, int n) {
  std::vector<Vec> grid;
  for (int i = 0; i <= n; ++i) {
    double r = r_max * i / n;
    for (int axis = 0; axis < dim; ++axis) {
      Vec x(dim, 0.0);
      x[axis] = r;
      grid.push_back(x);
      if (r > 0.0) {
        x[axis] = -r;
        grid.push_back(x);
      }
    }
  }
  return grid;
}

LyapunovCert lyapunov_drift_bound(const DriftSpec& drift, double B0,
                                  const LevyMeasureSpec& levy, const LyapunovSpec& V,
                                  const std::vector<Vec>& grid,
                                  const QuadratureConfig& cfg) {
  const auto& c = drift.constants;
  if (!c.lambda_dissip || !c.C0_dissip)
    throw CertificationFailed("lyapunov_drift_bound: declare (lambda_dissip, C0_dissip)");
  if (B0 < 0.0) throw Error("lyapunov_drift_bound: B0 >= 0 required");

  double tail1 = tail_abs_moment(levy, 1.0, cfg);
  if (!std::isfinite(tail1))
    throw CertificationFailed("lyapunov_drift_bound: int_{|z|>1} |z| nu(dz) diverges");

  double lam = *c.lambda_dissip;
  double C0 = *c.C0_dissip;
  double lambda_eff = lam - 2.0 * V.grad_norm_inf * B0;
  if (!(lambda_eff > 0.0))
    throw CertificationFailed("lyapunov_drift_bound: lambda - 2 ||grad V|| B0 <= 0");

  double C1 = 0.5 * V.hess_norm_inf * small_square_moment(levy, cfg) +
              V.grad_norm_inf * tail1;
  const DriftFn& b1 = drift.mean_field() ? drift.b1() : drift.b();
  double b1_at_0 = norm(b1(Vec(drift.dim, 0.0)));
  double K1 = c.K1.value_or(0.0);
  double C_eff = std::max(V.grad_norm_inf,
                          C1 + C0 + (K1 + b1_at_0) * V.grad_norm_inf +
                              lam * (1.0 + V.sup_unit_ball));

  ScalarC2 vf;
  vf.f = [&V](const Vec& x) { return V(x); };
  vf.grad = [&V](const Vec& x) { return V.grad(x); };

  LyapunovCert cert;
  cert.lambda_eff = lambda_eff;
  cert.C_eff = C_eff;
  cert.worst_margin = -kInf;
  double tol = 1e-7 * (1.0 + std::abs(C_eff));
  for (const auto& x : grid) {
    double lv = generator_apply(drift, levy, vf, x, cfg).value;
    double margin = lv + lambda_eff * V(x) - C_eff;
    if (margin > cert.worst_margin) {
      cert.worst_margin = margin;
      cert.worst_point = x;
    }
    if (margin > tol) {
      std::string msg = "lyapunov_drift_bound: LV + lambda_eff V > C_eff at |x| = " +
                        std::to_string(norm(x)) + " (margin " + std::to_string(margin) + ")";
      throw CertificationFailed(msg);
    }
  }
  return cert;
}

PsiCheckResult psi_properties_check(const PsiFunction& psi, double l0,
                                    int n_samples, std::uint64_t seed) {
  RngStream rng(seed, 0x9511);
  PsiCheckResult out;
  double r_max = l0 > 0.0 ? 3.0 * l0 : 10.0;
  for (int k = 0; k < n_samples; ++k) {
    // part (i): any 0 <= delta <= r
    double r = r_max * rng.uniform01();
    double d = r * rng.uniform01();
    double lhs = psi(r + d) + psi(r - d) - 2.0 * psi(r);
    out.max_violation_i = std::max(out.max_violation_i, lhs);
    // part (ii): 0 <= delta <= r <= l0
    if (l0 > 0.0) {
      double r2 = l0 * rng.uniform01();
      double d2 = r2 * rng.uniform01();
      double lhs2 = psi(r2 + d2) + psi(r2 - d2) - 2.0 * psi(r2);
      double rhs2 = psi.d2(r2) * d2 * d2;
      out.max_violation_ii = std::max(out.max_violation_ii, lhs2 - rhs2);
    }
  }
  if (l0 <= 0.0) out.max_violation_ii = 0.0;
  return out;
}

}  // namespace lvc
