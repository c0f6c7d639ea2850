#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conefrac/densities.hpp"
#include "conefrac/pdcore.hpp"
#include "conefrac/quadrature.hpp"
#include "conefrac/sampling.hpp"
#include "conefrac/zonal.hpp"

namespace conefrac {

// What the fractional operators integrate: a log-valued function of a PD
// matrix, optionally backed by a catalog density (sampler + decay hint).
struct Integrand {
  int p = 1;
  std::string label;
  std::function<double(const PDMatrix&)> log_value;
  std::optional<MatrixDensity> density;

  static Integrand from_density(const MatrixDensity& d);
  static Integrand from_log_fn(int p, std::function<double(const PDMatrix&)> fn,
                               std::string label);
  // f(X) = |X|^lambda
  static Integrand det_power(int p, double lambda);

  // exp(log_value); 0 off support.  Throws NonfiniteIntegrand on NaN.
  double value(const PDMatrix& x) const;
  // Scalar view for the p = 1 quadrature paths.
  double value1(double x) const;
};

enum class OperatorKind { KoberII, KoberI, WeylRight, RLLeft, PathwayII, PathwayI, HyperII };

std::string to_string(OperatorKind k);

struct OperatorSpec {
  OperatorKind kind = OperatorKind::KoberII;
  double zeta = 0;
  double alpha = 0;
  // pathway parameters
  double gamma = 0;
  double eta = 0;
  double q = 0;
  double a = 1;
  std::optional<PDMatrix> matrix_scale;
  // hypergeometric weight parameters
  std::vector<double> hyper_a, hyper_b;
  std::optional<SymMatrix> hyper_weight;
  int kmax = 8;

  void validate(int p) const;
  PathwayParams pathway_params(int p) const;  // kind from operator kind
};

struct OperatorEvaluation {
  double value = 0;
  double std_error = 0;    // 0 on the quadrature path
  long long n = 0;
  std::string method;      // "mc-exact", "mc-importance", "quadrature"
  bool heavy_tail = false; // importance weights look divergent (not fatal)
  std::map<std::string, double> diagnostics;
};

// ---- Monte Carlo evaluation (any p) -------------------------------------
//
// Every evaluator uses the exact-expectation representation obtained by the
// beta substitution in the defining cone integral; the raw integrals are
// never discretized for p >= 2.

// K_U^{zeta,alpha} f(U), kernel over {T > U}.  Exact type-2 beta expectation
// when zeta > (p-1)/2, shifted matrix-gamma importance otherwise.
OperatorEvaluation kober2_apply(const OperatorSpec& spec, const Integrand& f,
                                const PDMatrix& u, const McPlan& plan);

// I_X^{zeta,alpha} f(X), kernel over {V < X}; exact type-1 beta expectation.
OperatorEvaluation kober1_apply(const OperatorSpec& spec, const Integrand& f,
                                const PDMatrix& x, const McPlan& plan);

// (1/Gamma_p(alpha)) int_{T>X} |T-X|^{alpha-(p+1)/2} f(T) dT via the shifted
// matrix-gamma proposal T = X + S.
OperatorEvaluation weyl_right_apply(double alpha, const Integrand& f, const PDMatrix& x,
                                    const McPlan& plan,
                                    std::optional<double> proposal_rate = std::nullopt);

// Left-sided Riemann-Liouville integral |X|^alpha I_X^{0,alpha} f(X).
OperatorEvaluation rl_left_apply(double alpha, const Integrand& f, const PDMatrix& x,
                                 const McPlan& plan);

// Pathway extensions.  value is on the operator scale that reduces exactly
// (same seeds, same estimator) to the plain Kober operators at q = 0, a = 1;
// the product/ratio density value and the printed-vs-derived normalizing
// constants are reported in diagnostics.
OperatorEvaluation pathway2_apply(const OperatorSpec& spec, const Integrand& f,
                                  const PDMatrix& u, const McPlan& plan);
OperatorEvaluation pathway1_apply(const OperatorSpec& spec, const Integrand& f,
                                  const PDMatrix& u, const McPlan& plan);

// q -> 1 limit operators (density scale).
OperatorEvaluation pathway2_limit_apply(int p, double gamma, double a_eta, const Integrand& f,
                                        const PDMatrix& u, const McPlan& plan);
OperatorEvaluation pathway2_limit_apply_matrix(double gamma, double eta, const PDMatrix& a,
                                               const Integrand& f, const PDMatrix& u,
                                               const McPlan& plan);
OperatorEvaluation pathway1_limit_apply(int p, double gamma, double a_eta, const Integrand& f,
                                        const PDMatrix& u, const McPlan& plan);

// Zonal-hypergeometric generalization (Saigo-type weight).  value is on the
// operator scale (equals kober2 exactly when the weight matrix is zero);
// diagnostics carry the density value and the series truncation tail.
OperatorEvaluation hyper2_apply(const OperatorSpec& spec, const Integrand& f,
                                const PDMatrix& u, const McPlan& plan,
                                std::shared_ptr<const ZonalTable> table);

// Dispatch on spec.kind (CLI entry point).
OperatorEvaluation apply_operator(const OperatorSpec& spec, const Integrand& f,
                                  const PDMatrix& u, const McPlan& plan,
                                  std::shared_ptr<const ZonalTable> table = nullptr);

// ---- p = 1 quadrature oracles --------------------------------------------
//
// Deterministic evaluations of the raw scalar integrals (independent of the
// expectation representations above).

double kober2_quad(double zeta, double alpha, const ScalarFn& f, double x,
                   const Quadrature& quad);
double kober1_quad(double zeta, double alpha, const ScalarFn& f, double x,
                   const Quadrature& quad);
double weyl_right_quad(double alpha, const ScalarFn& f, double x, const Quadrature& quad);
double rl_left_quad(double alpha, const ScalarFn& f, double x, const Quadrature& quad);
// Product/ratio density values g_q(u) for the scalar-scale pathway family.
double pathway2_density_quad(const PathwayParams& params, const ScalarFn& f, double u,
                             const Quadrature& quad);
double pathway1_density_quad(const PathwayParams& params, const ScalarFn& f, double u,
                             const Quadrature& quad);
double pathway2_limit_quad(double gamma, double a_eta, const ScalarFn& f, double u,
                           const Quadrature& quad);
double pathway1_limit_quad(double gamma, double a_eta, const ScalarFn& f, double u,
                           const Quadrature& quad);
// Scalar Saigo-type weighted operator (ordinary rFs weight).
double hyper2_quad(double zeta, double alpha, const std::vector<double>& a_list,
                   const std::vector<double>& b_list, double weight_a, const ScalarFn& f,
                   double x, const Quadrature& quad, int kmax = 200);

// Operator-scale pathway values via quadrature (reduction-consistent).
double pathway2_operator_quad(const PathwayParams& params, const ScalarFn& f, double u,
                              const Quadrature& quad);
double pathway1_operator_quad(const PathwayParams& params, const ScalarFn& f, double u,
                              const Quadrature& quad);

// Scale factors between operator values and product/ratio density values:
// g(U) = exp(log_pathway2_density_scale(params)) * operator_value, and
// likewise for the first kind.
double log_pathway2_density_scale(const PathwayParams& params);
double log_pathway1_density_scale(const PathwayParams& params);

}  // namespace conefrac
