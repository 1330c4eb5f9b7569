#include "levycouple/psi.hpp"

#include <algorithm>
#include <cmath>

#include "levycouple/quadrature.hpp"

namespace lvc {

namespace {

// Cumulative table of I(r) = int_0^r exp(-B s^alpha) ds on a graded mesh of
// [0, 2 l0]; a partial adaptive panel finishes each evaluation.
struct SegmentTable {
  std::vector<double> node;
  std::vector<double> cum;
  double B, alpha;

  double integral(double r) const {
    if (r <= 0.0) return 0.0;
    r = std::min(r, node.back());
    auto it = std::upper_bound(node.begin(), node.end(), r);
    std::size_t i = static_cast<std::size_t>(it - node.begin());
    if (i == 0) return 0.0;
    --i;
    double base = cum[i];
    if (r <= node[i]) return base;
    QuadratureConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.abs_tol = 1e-15;
    double Bv = B, av = alpha;
    Integrand f = [Bv, av](double s) { return std::exp(-Bv * std::pow(s, av)); };
    return base + integrate_finite(f, node[i], r, cfg);
  }
};

std::shared_ptr<SegmentTable> build_table(double B, double alpha, double two_l0) {
  auto t = std::make_shared<SegmentTable>();
  t->B = B;
  t->alpha = alpha;
  const int n = 1024;
  t->node.resize(n + 1);
  t->cum.resize(n + 1);
  for (int i = 0; i <= n; ++i) {
    double u = static_cast<double>(i) / n;
    t->node[i] = two_l0 * u * u;  // graded toward the s^alpha kink at 0
  }
  t->cum[0] = 0.0;
  QuadratureConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.abs_tol = 1e-16;
  Integrand f = [B, alpha](double s) { return std::exp(-B * std::pow(s, alpha)); };
  for (int i = 1; i <= n; ++i)
    t->cum[i] = t->cum[i - 1] + integrate_finite(f, t->node[i - 1], t->node[i], cfg);
  return t;
}

}  // namespace

PsiFunction make_concave_integral_psi(double c1, double B, double alpha, double l0) {
  double two_l0 = 2.0 * l0;
  std::map<std::string, double> consts{{"c1", c1}, {"B", B}, {"alpha", alpha}, {"l0", l0}};
  if (two_l0 <= 0.0) {
    double slope = c1 + 1.0;
    return PsiFunction([slope](double r) { return slope * r; },
                       [slope](double) { return slope; },
                       [](double) { return 0.0; },
                       {}, "concave_integral", consts);
  }
  auto table = build_table(B, alpha, two_l0);
  auto seg_d1 = [c1, B, alpha](double r) { return c1 + std::exp(-B * std::pow(r, alpha)); };
  double psi_end = c1 * two_l0 + table->integral(two_l0);
  double slope_end = seg_d1(two_l0);

  auto f = [=](double r) {
    if (r <= 0.0) return 0.0;
    if (r <= two_l0) return c1 * r + table->integral(r);
    return psi_end + slope_end * (r - two_l0);
  };
  auto d1 = [=](double r) {
    if (r < 0.0) return 0.0;
    if (r <= two_l0) return seg_d1(r);
    return slope_end;
  };
  auto d2 = [=](double r) {
    if (r <= 0.0 || r > two_l0) return 0.0;
    return -B * alpha * std::pow(r, alpha - 1.0) * std::exp(-B * std::pow(r, alpha));
  };
  return PsiFunction(f, d1, d2, {0.0, two_l0}, "concave_integral", consts);
}

PsiFunction make_concave_integral_psi_bounded(double c1, double B, double alpha, double l0) {
  double two_l0 = 2.0 * l0;
  std::map<std::string, double> consts{{"c1", c1}, {"B", B}, {"alpha", alpha}, {"l0", l0}};
  if (two_l0 <= 0.0) throw Error("bounded psi needs l0 > 0");
  auto table = build_table(B, alpha, two_l0);
  auto seg_d1 = [c1, B, alpha](double r) { return c1 + std::exp(-B * std::pow(r, alpha)); };
  double psi_end = c1 * two_l0 + table->integral(two_l0);
  double slope_end = seg_d1(two_l0);

  auto f = [=](double r) {
    if (r <= 0.0) return 0.0;
    if (r <= two_l0) return c1 * r + table->integral(r);
    double u = r - two_l0;
    return psi_end + slope_end * u / (1.0 + u);
  };
  auto d1 = [=](double r) {
    if (r < 0.0) return 0.0;
    if (r <= two_l0) return seg_d1(r);
    double u = r - two_l0;
    return slope_end / ((1.0 + u) * (1.0 + u));
  };
  auto d2 = [=](double r) {
    if (r <= 0.0) return 0.0;
    if (r <= two_l0)
      return -B * alpha * std::pow(r, alpha - 1.0) * std::exp(-B * std::pow(r, alpha));
    double u = r - two_l0;
    return -2.0 * slope_end / ((1.0 + u) * (1.0 + u) * (1.0 + u));
  };
  return PsiFunction(f, d1, d2, {0.0, two_l0}, "concave_integral_bounded", consts);
}

PsiFunction make_exp_rational_psi(double c, double l0) {
  double two_l0 = 2.0 * l0;
  std::map<std::string, double> consts{{"c", c}, {"l0", l0}};
  double e_end = std::exp(-c * two_l0);
  auto f = [=](double r) {
    if (r <= 0.0) return 0.0;
    if (r <= two_l0) return 1.0 - std::exp(-c * r);
    double u = r - two_l0;
    return 1.0 - e_end + c * e_end * u / (1.0 + u);
  };
  auto d1 = [=](double r) {
    if (r < 0.0) return 0.0;
    if (r <= two_l0) return c * std::exp(-c * r);
    double u = r - two_l0;
    return c * e_end / ((1.0 + u) * (1.0 + u));
  };
  auto d2 = [=](double r) {
    if (r <= 0.0) return 0.0;
    if (r <= two_l0) return -c * c * std::exp(-c * r);
    double u = r - two_l0;
    return -2.0 * c * e_end / ((1.0 + u) * (1.0 + u) * (1.0 + u));
  };
  return PsiFunction(f, d1, d2, {0.0, two_l0}, "exp_rational", consts);
}

PsiFunction make_custom_psi(PsiFunction::Eval f, PsiFunction::Eval d1, PsiFunction::Eval d2,
                            std::string name) {
  return PsiFunction(std::move(f), std::move(d1), std::move(d2), {}, std::move(name), {});
}

}  // namespace lvc
