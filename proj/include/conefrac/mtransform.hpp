#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conefrac/densities.hpp"
#include "conefrac/operators.hpp"
#include "conefrac/quadrature.hpp"
#include "conefrac/sampling.hpp"

namespace conefrac {

enum class MTransformMethod { ClosedForm, Quadrature, MonteCarlo };

// M-transform f*(s) = int_{X>O} |X|^{s-(p+1)/2} f(X) dX.
struct MTransformQuery {
  double s = 0;
  Integrand f;
  MTransformMethod method = MTransformMethod::MonteCarlo;
  McPlan plan;
};

// Closed-form path returns the catalog value exactly (SE 0); the Monte Carlo
// path uses E_f[|X|^{s-(p+1)/2}] when f is a sampleable density and a
// matrix-gamma importance proposal with shape s otherwise.
EstimatorResult m_transform(const MTransformQuery& query);

struct VerificationCase {
  std::map<std::string, double> params;
  double lhs = 0;
  double rhs = 0;
  double se = 0;
  bool pass = false;
  std::string note;
};

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<VerificationCase> cases;
  bool all_pass() const;
};

// Pass threshold: |lhs - rhs| <= 3 * se with an absolute floor of 1e-10.
bool verification_pass(double lhs, double rhs, double se);

// M{K^{zeta,alpha} f; s} = Gamma_p(zeta+s)/Gamma_p(alpha+zeta+s) f*(s).
// Monte Carlo for p >= 2 (outer matrix-gamma importance over U, inner exact
// expectation), quadrature at p = 1.
VerificationCase verify_kober2_mtransform(double zeta, double alpha, const MatrixDensity& f,
                                          double s, const McPlan& plan,
                                          bool use_quadrature = false);

// M{I^{zeta,alpha} f; s} = Gamma_p(zeta+(p+1)/2-s)/Gamma_p(alpha+zeta+(p+1)/2-s) f*(s),
// for s < zeta + 1.
VerificationCase verify_kober1_mtransform(double zeta, double alpha, const MatrixDensity& f,
                                          double s, const McPlan& plan,
                                          bool use_quadrature = false);

// M{W(|X|^{-alpha} f); s} = Gamma_p(s)/Gamma_p(alpha+s) f*(s).
VerificationCase verify_weyl_mtransform(double alpha, const MatrixDensity& f, double s,
                                        const McPlan& plan, bool use_quadrature = false);

// M{|X|^{-alpha} D^{-alpha} f; s} = Gamma_p((p+1)/2-s)/Gamma_p((p+1)/2+alpha-s) f*(s),
// for s < 1.
VerificationCase verify_rl_mtransform(double alpha, const MatrixDensity& f, double s,
                                      const McPlan& plan, bool use_quadrature = false);

// Mellin-convolution factorization: E|U|^{s-(p+1)/2} for the product
// U = X2^{1/2} X1 X2^{1/2}, X1 ~ type-1 beta(zeta+(p+1)/2, alpha), against
// the closed-form Gamma_p ratio times f*(s).
VerificationCase verify_mellin_convolution(double zeta, double alpha, const MatrixDensity& f,
                                           double s, const McPlan& plan);

// Same factorization for the ratio U = X2^{1/2} X1^{-1} X2^{1/2},
// X1 ~ type-1 beta(zeta, alpha) with zeta > (p-1)/2, s < zeta + 1.
VerificationCase verify_mellin_ratio(double zeta, double alpha, const MatrixDensity& f,
                                     double s, const McPlan& plan);

// Normalization of the operator-as-density reading: the integral over U of
// [Gamma_p(alpha+zeta+(p+1)/2)/Gamma_p(zeta+(p+1)/2)] K_U^{zeta,alpha} f(U)
// estimated by outer importance; should be 1.
VerificationCase verify_operator_density_normalization(double zeta, double alpha,
                                                       const MatrixDensity& f,
                                                       const McPlan& plan);

}  // namespace conefrac
