#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "conefrac/partition.hpp"
#include "conefrac/pdcore.hpp"
#include "conefrac/rng.hpp"
#include "conefrac/sampling.hpp"
#include "conefrac/special.hpp"

namespace conefrac {

// Zonal polynomials C_K in the monomial symmetric basis, C-normalized so that
// sum_K C_K(Z) = (tr Z)^k.  Coefficients are built once in exact rational
// arithmetic via the Laplace-Beltrami eigenvalue recurrence and then frozen
// as doubles; the table is immutable and safe to share across workers.
class ZonalTable {
 public:
  // Build for degrees k <= kmax and partitions with at most max_parts parts
  // (evaluation dimension p requires max_parts >= p for nonvanishing C_K).
  // Throws ConstructionError if the built table violates the sum identity.
  static std::shared_ptr<const ZonalTable> build(int kmax, int max_parts);

  int kmax() const { return kmax_; }
  int max_parts() const { return max_parts_; }

  const std::vector<Partition>& partitions(int k) const;
  // Coefficient of m_lambda in C_kappa (both of degree k, indices into
  // partitions(k)); coefficient matrix row = kappa, column = lambda.
  double coefficient(int k, int kappa_idx, int lambda_idx) const;
  const std::string& coefficient_rational(int k, int kappa_idx, int lambda_idx) const;

  // C_K at the eigenvalue multiset of Z.  Returns 0 when K has more than
  // eig.size() nonzero parts; throws CapExceeded when weight(K) > kmax.
  double eval(const Partition& k, const Eigen::VectorXd& eig) const;
  double eval(const Partition& k, const SymMatrix& z) const;
  double eval(const Partition& k, const PDMatrix& z) const { return eval(k, z.sym()); }

  // All C_K of one degree at the given eigenvalues (shared monomial work).
  std::vector<double> eval_degree(int k, const Eigen::VectorXd& eig) const;

 private:
  ZonalTable() = default;
  int kmax_ = 0;
  int max_parts_ = 0;
  std::vector<std::vector<Partition>> parts_by_k_;
  std::vector<Eigen::MatrixXd> coef_by_k_;
  std::vector<std::vector<std::string>> rational_by_k_;  // row-major per k
};

// Monomial symmetric function m_lambda at the given values (test oracle and
// evaluation kernel; sums over distinct permutations).
double monomial_symmetric(const Partition& lambda, const Eigen::VectorXd& y);

struct SeriesResult {
  double value = 0;
  double last_term_magnitude = 0;  // |degree-kmax contribution|
  int kmax = 0;
};

// Truncated hypergeometric function of matrix argument (zonal expansion).
// Throws PoleError when some (b)_K vanishes.
SeriesResult hypergeometric_matrix(const std::vector<double>& a_list,
                                   const std::vector<double>& b_list, const SymMatrix& z,
                                   int kmax, const ZonalTable& table);

// Monte Carlo check of the beta-weighted zonal integral
//   int_0^I |X|^{alpha-(p+1)/2} |I-X|^{beta-(p+1)/2} C_K(TX) dX
//     = Gamma_p(alpha,K) Gamma_p(beta) / Gamma_p(alpha+beta,K) C_K(T).
struct ZonalIntegralCheck {
  EstimatorResult lhs;
  double rhs = 0;
  double standardized_discrepancy = 0;  // |lhs-rhs| / max(se, floor)
};

ZonalIntegralCheck lemma_beta_zonal_check(const ZonalTable& table, double alpha, double beta,
                                          const Partition& k, const PDMatrix& t,
                                          const McPlan& plan);

// Monte Carlo check of the sub-cone zonal integral
//   int_{O<S<A} |S|^{alpha-(p+1)/2} C_K(ZS) dS
//     = Gamma_p(alpha,K) Gamma_p((p+1)/2) / Gamma_p(alpha+(p+1)/2,K) |A|^alpha C_K(ZA).
ZonalIntegralCheck lemma_cone_zonal_check(const ZonalTable& table, double alpha,
                                          const Partition& k, const PDMatrix& a,
                                          const SymMatrix& z, const McPlan& plan);

}  // namespace conefrac
