#pragma once

#include <Eigen/Dense>
#include <vector>

#include "conefrac/errors.hpp"

namespace conefrac {

// Real symmetric p x p matrix.  The constructor symmetrizes (M + M')/2 and
// rejects inputs whose asymmetry exceeds 1e-8 * (1 + max|entry|).
class SymMatrix {
 public:
  SymMatrix(int p, const std::vector<double>& row_major);
  explicit SymMatrix(const Eigen::MatrixXd& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Eigen::MatrixXd& mat() const { return m_; }
  std::vector<double> row_major() const;
  double trace() const { return m_.trace(); }
  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

  static SymMatrix identity(int p) { return SymMatrix(Eigen::MatrixXd::Identity(p, p)); }
  static SymMatrix diagonal(const std::vector<double>& d);

 private:
  Eigen::MatrixXd m_;
};

// Strict positive definiteness: smallest eigenvalue must exceed
// 1e-12 * max(largest eigenvalue, 1).
bool is_strictly_pd(const SymMatrix& s);

// Positive definite matrix with cached spectral decomposition (eigenvalues
// descending).  All derived quantities (square root, inverse, log-det) come
// from the one spectral kernel.  Immutable after construction.
class PDMatrix {
 public:
  explicit PDMatrix(const SymMatrix& s);
  explicit PDMatrix(const Eigen::MatrixXd& m) : PDMatrix(SymMatrix(m)) {}

  int dim() const { return sym_.dim(); }
  const SymMatrix& sym() const { return sym_; }
  const Eigen::MatrixXd& mat() const { return sym_.mat(); }
  const Eigen::VectorXd& eigenvalues() const { return eigval_; }  // descending
  const Eigen::MatrixXd& eigenvectors() const { return eigvec_; }

  PDMatrix sqrt_pd() const { return power_pd(0.5); }
  PDMatrix inverse_pd() const { return power_pd(-1.0); }
  PDMatrix power_pd(double t) const;  // Q diag(lambda^t) Q'
  double logdet() const;
  double trace() const { return sym_.trace(); }

  static PDMatrix identity(int p) { return PDMatrix(SymMatrix::identity(p)); }
  static PDMatrix diagonal(const std::vector<double>& d) { return PDMatrix(SymMatrix::diagonal(d)); }
  static PDMatrix scalar(double x) { return PDMatrix(SymMatrix(1, {x})); }

  // 1x1 convenience for the scalar (p = 1) reductions.
  double value() const;

 private:
  SymMatrix sym_;
  Eigen::VectorXd eigval_;
  Eigen::MatrixXd eigvec_;
};

// Loewner order: true iff A - B is strictly positive definite under the
// tolerance policy above.  Throws DimensionMismatch.
bool loewner_gt(const SymMatrix& a, const SymMatrix& b);
inline bool loewner_gt(const PDMatrix& a, const SymMatrix& b) { return loewner_gt(a.sym(), b); }
inline bool loewner_gt(const PDMatrix& a, const PDMatrix& b) { return loewner_gt(a.sym(), b.sym()); }

// C^{1/2} A C^{1/2}; |result| = |A| |C|.
PDMatrix congruence(const PDMatrix& a, const PDMatrix& c);

// L A L' for a general square factor L (samplers' workhorse).
SymMatrix conjugate(const SymMatrix& a, const Eigen::MatrixXd& l);

double logdet(const PDMatrix& a);

}  // namespace conefrac
