#include "conefrac/quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "conefrac/errors.hpp"

namespace conefrac {

namespace {

// Gauss-Legendre nodes/weights on [-1,1], generated by Newton iteration on
// the Legendre recurrence (no table transcription).
struct GaussRule {
  std::vector<double> x, w;
};

GaussRule make_rule(int n) {
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.w[i] = w;
    r.w[n - 1 - i] = w;
  }
  return r;
}

const GaussRule& rule7() {
  static const GaussRule r = make_rule(7);
  return r;
}

const GaussRule& rule15() {
  static const GaussRule r = make_rule(15);
  return r;
}

double apply_rule(const GaussRule& r, const ScalarFn& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double acc = 0;
  for (size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * f(c + h * r.x[i]);
  return acc * h;
}

double adaptive(const ScalarFn& f, double a, double b, double tol, int depth, int max_depth) {
  const double coarse = apply_rule(rule7(), f, a, b);
  const double fine = apply_rule(rule15(), f, a, b);
  const double err = std::abs(fine - coarse);
  if (err <= tol || depth >= max_depth) {
    if (!std::isfinite(fine)) throw NonfiniteIntegrand("quadrature: non-finite integrand");
    return fine;
  }
  const double mid = 0.5 * (a + b);
  return adaptive(f, a, mid, 0.5 * tol, depth + 1, max_depth) +
         adaptive(f, mid, b, 0.5 * tol, depth + 1, max_depth);
}

}  // namespace

Quadrature::Quadrature(double abs_tol, int max_depth) : tol_(abs_tol), max_depth_(max_depth) {}

double Quadrature::integrate(const ScalarFn& f, double a, double b) const {
  if (a == b) return 0.0;
  return adaptive(f, a, b, tol_, 0, max_depth_);
}

double Quadrature::integrate_to_inf(const ScalarFn& f, double a) const {
  // t = a + u/(1-u); the integrand must decay fast enough that the mapped
  // integrand vanishes at u -> 1 (Gauss nodes never touch the endpoint).
  auto mapped = [&](double u) {
    const double om = 1.0 - u;
    const double t = a + u / om;
    const double v = f(t);
    return v == 0.0 ? 0.0 : v / (om * om);
  };
  return adaptive(mapped, 0.0, 1.0, tol_, 0, max_depth_);
}

double Quadrature::beta_weighted(const ScalarFn& g, double a, double b) const {
  if (!(a > 0) || !(b > 0)) throw DomainError("beta_weighted: exponents must be positive");
  // Left half: y = v^{1/a} removes the y^{a-1} singularity.
  auto left = [&](double v) {
    const double y = std::pow(v, 1.0 / a);
    return std::pow(1.0 - y, b - 1.0) * g(y);
  };
  // Right half: 1-y = w^{1/b}.
  auto right = [&](double w) {
    const double y = 1.0 - std::pow(w, 1.0 / b);
    return std::pow(y, a - 1.0) * g(y);
  };
  const double va = std::pow(0.5, a);
  const double wb = std::pow(0.5, b);
  return adaptive(left, 0.0, va, 0.5 * tol_ * a, 0, max_depth_) / a +
         adaptive(right, 0.0, wb, 0.5 * tol_ * b, 0, max_depth_) / b;
}

double Quadrature::power_weighted_to_inf(const ScalarFn& g, double a) const {
  if (!(a > 0)) throw DomainError("power_weighted_to_inf: exponent must be positive");
  auto head = [&](double v) { return g(std::pow(v, 1.0 / a)); };  // s = v^{1/a} on (0,1)
  auto tail = [&](double s) { return std::pow(s, a - 1.0) * g(s); };
  Quadrature half(0.5 * tol_, max_depth_);
  return adaptive(head, 0.0, 1.0, 0.5 * tol_ * a, 0, max_depth_) / a +
         half.integrate_to_inf(tail, 1.0);
}

}  // namespace conefrac
