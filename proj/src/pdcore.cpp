#include "conefrac/pdcore.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace conefrac {

namespace {
constexpr double kAsymmetryTol = 1e-8;
constexpr double kReconstructionTol = 1e-10;
constexpr double kPdStrictness = 1e-12;
}  // namespace

SymMatrix::SymMatrix(int p, const std::vector<double>& row_major) {
  if (p <= 0) throw DimensionMismatch("SymMatrix: dimension must be positive");
  if (row_major.size() != static_cast<size_t>(p) * p)
    throw DimensionMismatch("SymMatrix: data length does not match p*p");
  Eigen::MatrixXd m(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) m(i, j) = row_major[static_cast<size_t>(i) * p + j];
  *this = SymMatrix(m);
}

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionMismatch("SymMatrix: matrix must be square");
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol * scale) {
    std::ostringstream msg;
    msg << "SymMatrix: asymmetry " << asym << " exceeds tolerance " << kAsymmetryTol * scale;
    throw DomainError(msg.str());
  }
  m_ = 0.5 * (m + m.transpose());
}

std::vector<double> SymMatrix::row_major() const {
  const int p = dim();
  std::vector<double> out(static_cast<size_t>(p) * p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) out[static_cast<size_t>(i) * p + j] = m_(i, j);
  return out;
}

SymMatrix SymMatrix::diagonal(const std::vector<double>& d) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d.size(), d.size());
  for (size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return SymMatrix(m);
}

bool is_strictly_pd(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.mat(), Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return lo > kPdStrictness * std::max(hi, 1.0);
}

PDMatrix::PDMatrix(const SymMatrix& s) : sym_(s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.mat());
  if (es.info() != Eigen::Success)
    throw ConstructionError("PDMatrix: eigendecomposition failed");
  // Eigen returns ascending order; store descending.
  const int p = s.dim();
  eigval_.resize(p);
  eigvec_.resize(p, p);
  for (int i = 0; i < p; ++i) {
    eigval_(i) = es.eigenvalues()(p - 1 - i);
    eigvec_.col(i) = es.eigenvectors().col(p - 1 - i);
  }
  const double hi = eigval_(0);
  if (!(eigval_(p - 1) > kPdStrictness * std::max(hi, 1.0))) {
    std::ostringstream msg;
    msg << "PDMatrix: smallest eigenvalue " << eigval_(p - 1)
        << " fails strict positivity (largest " << hi << ")";
    throw NotPositiveDefinite(msg.str());
  }
  const double scale = 1.0 + s.max_abs();
  const double recon =
      (eigvec_ * eigval_.asDiagonal() * eigvec_.transpose() - s.mat()).cwiseAbs().maxCoeff();
  if (recon > kReconstructionTol * scale)
    throw ConstructionError("PDMatrix: spectral reconstruction error exceeds tolerance");
}

PDMatrix PDMatrix::power_pd(double t) const {
  Eigen::VectorXd powered = eigval_.array().pow(t);
  Eigen::MatrixXd m = eigvec_ * powered.asDiagonal() * eigvec_.transpose();
  return PDMatrix(SymMatrix(m));
}

double PDMatrix::logdet() const {
  return eigval_.array().log().sum();
}

double PDMatrix::value() const {
  if (dim() != 1) throw DimensionMismatch("PDMatrix::value: defined only for p = 1");
  return sym_.mat()(0, 0);
}

bool loewner_gt(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("loewner_gt: dimension mismatch");
  return is_strictly_pd(SymMatrix(a.mat() - b.mat()));
}

PDMatrix congruence(const PDMatrix& a, const PDMatrix& c) {
  if (a.dim() != c.dim()) throw DimensionMismatch("congruence: dimension mismatch");
  const Eigen::MatrixXd r = c.sqrt_pd().mat();
  return PDMatrix(SymMatrix(r * a.mat() * r));
}

SymMatrix conjugate(const SymMatrix& a, const Eigen::MatrixXd& l) {
  return SymMatrix(l * a.mat() * l.transpose());
}

double logdet(const PDMatrix& a) { return a.logdet(); }

}  // namespace conefrac
