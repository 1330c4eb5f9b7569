#pragma once

#include <optional>
#include <string>
#include <vector>

#include "levycouple/drift.hpp"
#include "levycouple/levy.hpp"
#include "levycouple/lyapunov.hpp"
#include "levycouple/psi.hpp"
#include "levycouple/sde.hpp"

namespace lvc {

struct RateEntry {
  std::string name;
  double value = 0.0;
  double log_value = 0.0;  // natural log, finite even when value underflows
  std::string formula;
};

struct RateReport {
  std::string theorem;
  std::vector<RateEntry> entries;
  bool lambda_nonpositive = false;
  std::vector<std::string> notes;

  double get(const std::string& name) const;
  std::string to_text() const;
  // rows: (constant name, value, formula, theorem)
  std::vector<std::vector<std::string>> to_csv_rows() const;
};

// Contractivity-at-infinity rate chain:
//   g1(r) = r^alpha/(c0 alpha),   c2 = (2 K2) ^ g1(2 l0)^{-1},
//   g = (1 + 2 K1 / c2) g1,       c1 = exp(-c2 g(2 l0)),
//   lambda0 = c1 c2 / (1 + c1),   lambda = lambda0 - (1 + c1) K3 / (2 c1),
//   C = (1 + c1) / (2 c1).
// l0 = 0 degenerates to c2 = 2 K2, c1 = 1 (uniformly dissipative drift).
struct ThtpwRates {
  PsiFunction psi;
  RateReport report;
  double c1 = 0.0, c2 = 0.0, lambda0 = 0.0, lambda = 0.0, C = 0.0;
};

ThtpwRates thtpw_rates(double K1, double K2, double l0, double K3,
                       const SigmaMinorant& sigma);

// Additive-metric rate chain with the exp/rational psi:
//   l0 from the sublevel set {lambda_lyap (V(x)+V(y)) <= 16 C_lyap},
//   c = 4 K1 l0 / (J(kappa) kappa^2) + 1,
//   a = 4 K1 c / J(kappa) + kappa^2 c^2 e^{-c l0},
//   eps = J(kappa) kappa^2 c^2 e^{-c l0} / (16 C_lyap),
//   lambda0 = min of the two displayed ratios.
// All exponentially small quantities carry log-domain companions.
struct AdditiveRates {
  PsiFunction psi;
  RateReport report;
  double l0 = 0.0, c = 0.0, a = 0.0, eps = 0.0, lambda0 = 0.0;
  double log_eps = 0.0, log_lambda0 = 0.0;
  bool s0_empty = false;
};

AdditiveRates additive_rates(double K1, const LevyMeasureSpec& levy, double kappa,
                             double lambda_lyap, double C_lyap, const LyapunovSpec& V,
                             const QuadratureConfig& cfg = {});

// K*_{b2} = min(2 K_{2,b1} / 5, lambda0 c1 / (2 (1 + c1))).
double poc_threshold(double K2b1, double lambda0, double c1);

struct LyapunovCert {
  double lambda_eff = 0.0;
  double C_eff = 0.0;
  double worst_margin = 0.0;  // max over grid of LV + lambda_eff V - C_eff
  Vec worst_point;
};

// Certifies L V(x) <= C_eff - lambda_eff V(x) on the grid, with
// lambda_eff = lambda_dissip - 2 ||grad V|| B0 and C_eff assembled from the
// declared constants and the nu moments. Throws CertificationFailed on a
// violating grid point.
LyapunovCert lyapunov_drift_bound(const DriftSpec& drift, double B0,
                                  const LevyMeasureSpec& levy, const LyapunovSpec& V,
                                  const std::vector<Vec>& grid,
                                  const QuadratureConfig& cfg = {});

// Radial default grid for the certification.
std::vector<Vec> lyapunov_default_grid(int dim, double r_max = 25.0, int n = 60);

struct PsiCheckResult {
  double max_violation_i = -kInf;   // max of psi(r+d)+psi(r-d)-2 psi(r)
  double max_violation_ii = -kInf;  // max of the same minus psi''(r) d^2, r <= l0
};

PsiCheckResult psi_properties_check(const PsiFunction& psi, double l0,
                                    int n_samples, std::uint64_t seed);

}  // namespace lvc
