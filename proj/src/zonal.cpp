#include "conefrac/zonal.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <map>
#include <sstream>

#include "conefrac/errors.hpp"
#include "conefrac/special.hpp"

namespace conefrac {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

BigInt factorial(int n) {
  BigInt acc = 1;
  for (int i = 2; i <= n; ++i) acc *= i;
  return acc;
}

// Coefficient of the monomial basis element m_lambda in (y_1+...+y_n)^k.
BigInt multinomial(const Partition& lambda) {
  BigInt acc = factorial(lambda.weight());
  for (int part : lambda.parts()) acc /= factorial(part);
  return acc;
}

double ipow(double base, int e) {
  double acc = 1.0;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

Eigen::VectorXd sym_eigenvalues(const SymMatrix& z) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

double monomial_symmetric(const Partition& lambda, const Eigen::VectorXd& y) {
  const int p = static_cast<int>(y.size());
  if (lambda.num_parts() > p) return 0.0;
  std::vector<int> expo(static_cast<size_t>(p), 0);
  for (int j = 0; j < lambda.num_parts(); ++j) expo[j] = lambda.parts()[j];
  std::sort(expo.begin(), expo.end());
  double acc = 0.0;
  do {
    double term = 1.0;
    for (int i = 0; i < p; ++i)
      if (expo[i] > 0) term *= ipow(y(i), expo[i]);
    acc += term;
  } while (std::next_permutation(expo.begin(), expo.end()));
  return acc;
}

// Build the monomial coefficients of C_kappa degree by degree.  Within a
// degree the partitions are held in reverse-lexicographic order and, writing
// C_kappa = sum_lambda c_{kappa,lambda} m_lambda, the coefficients satisfy
// the Laplace-Beltrami recurrence
//
//   c_{kappa,lambda} = sum_moves (l_i - l_j + 2t) c_{kappa,mu} / (rho_kappa - rho_lambda)
//
// where a move adds t to part i and removes t from part j > i of lambda and
// mu is the re-sorted result.  The top coefficient of each C_kappa is then
// fixed by the sum identity sum_kappa C_kappa = (tr)^k, matched monomial by
// monomial, which the finished table must satisfy exactly.
std::shared_ptr<const ZonalTable> ZonalTable::build(int kmax, int max_parts) {
  if (kmax < 0 || max_parts < 1) throw DomainError("ZonalTable::build: bad arguments");
  auto table = std::shared_ptr<ZonalTable>(new ZonalTable());
  table->kmax_ = kmax;
  table->max_parts_ = max_parts;
  table->parts_by_k_.resize(kmax + 1);
  table->coef_by_k_.resize(kmax + 1);
  table->rational_by_k_.resize(kmax + 1);

  for (int k = 0; k <= kmax; ++k) {
    auto parts = enumerate_partitions(k, max_parts);
    const int m = static_cast<int>(parts.size());
    std::map<std::vector<int>, int> index;
    for (int i = 0; i < m; ++i) index[parts[i].parts()] = i;

    std::vector<std::vector<Rational>> coef(m, std::vector<Rational>(m, Rational(0)));

    for (int ki = 0; ki < m; ++ki) {
      const Partition& kappa = parts[ki];
      const long long rho_kappa = kappa.rho();
      std::vector<Rational> ratio(m, Rational(0));
      ratio[ki] = 1;

      for (int li = ki + 1; li < m; ++li) {
        const Partition& lambda = parts[li];
        Rational num = 0;
        const auto& lp = lambda.parts();
        const int len = lambda.num_parts();
        for (int j = 1; j < len; ++j) {
          for (int i = 0; i < j; ++i) {
            for (int t = 1; t <= lp[j]; ++t) {
              std::vector<int> moved(lp);
              moved[i] += t;
              moved[j] -= t;
              const int weight = lp[i] - lp[j] + 2 * t;
              std::sort(moved.begin(), moved.end(), std::greater<int>());
              while (!moved.empty() && moved.back() == 0) moved.pop_back();
              auto it = index.find(moved);
              if (it == index.end()) continue;  // more parts than the table keeps
              num += Rational(weight) * ratio[it->second];
            }
          }
        }
        const long long denom = rho_kappa - lambda.rho();
        if (denom == 0) {
          if (num != 0)
            throw ConstructionError("ZonalTable: recurrence hit a zero eigenvalue gap");
          ratio[li] = 0;
        } else {
          ratio[li] = num / Rational(denom);
        }
      }

      Rational top = Rational(multinomial(kappa));
      for (int vi = 0; vi < ki; ++vi) top -= coef[vi][ki];
      if (top <= 0) throw ConstructionError("ZonalTable: nonpositive leading coefficient");
      for (int li = ki; li < m; ++li) coef[ki][li] = top * ratio[li];
    }

    // Hard postcondition: column sums reproduce the expansion of (tr)^k.
    for (int li = 0; li < m; ++li) {
      Rational col = 0;
      for (int ki = 0; ki < m; ++ki) col += coef[ki][li];
      if (col != Rational(multinomial(parts[li])))
        throw ConstructionError("ZonalTable: sum identity violated at degree " +
                                std::to_string(k));
    }

    Eigen::MatrixXd dcoef(m, m);
    std::vector<std::string> rat(static_cast<size_t>(m) * m);
    for (int ki = 0; ki < m; ++ki)
      for (int li = 0; li < m; ++li) {
        dcoef(ki, li) = coef[ki][li].convert_to<double>();
        rat[static_cast<size_t>(ki) * m + li] = coef[ki][li].str();
      }
    table->parts_by_k_[k] = std::move(parts);
    table->coef_by_k_[k] = std::move(dcoef);
    table->rational_by_k_[k] = std::move(rat);
  }
  return table;
}

const std::vector<Partition>& ZonalTable::partitions(int k) const {
  if (k < 0 || k > kmax_) throw CapExceeded("ZonalTable: degree beyond table cap");
  return parts_by_k_[k];
}

double ZonalTable::coefficient(int k, int kappa_idx, int lambda_idx) const {
  return coef_by_k_.at(k)(kappa_idx, lambda_idx);
}

const std::string& ZonalTable::coefficient_rational(int k, int kappa_idx, int lambda_idx) const {
  const int m = static_cast<int>(parts_by_k_.at(k).size());
  return rational_by_k_.at(k).at(static_cast<size_t>(kappa_idx) * m + lambda_idx);
}

double ZonalTable::eval(const Partition& k, const Eigen::VectorXd& eig) const {
  if (k.weight() > kmax_) throw CapExceeded("ZonalTable::eval: partition weight beyond cap");
  if (k.num_parts() > eig.size()) return 0.0;
  const auto& parts = parts_by_k_[k.weight()];
  const auto& coef = coef_by_k_[k.weight()];
  int row = -1;
  for (size_t i = 0; i < parts.size(); ++i)
    if (parts[i] == k) {
      row = static_cast<int>(i);
      break;
    }
  if (row < 0) return 0.0;  // partition has more parts than the table keeps
  double acc = 0.0;
  for (size_t li = 0; li < parts.size(); ++li) {
    const double c = coef(row, static_cast<int>(li));
    if (c != 0.0) acc += c * monomial_symmetric(parts[li], eig);
  }
  return acc;
}

double ZonalTable::eval(const Partition& k, const SymMatrix& z) const {
  return eval(k, sym_eigenvalues(z));
}

std::vector<double> ZonalTable::eval_degree(int k, const Eigen::VectorXd& eig) const {
  if (k > kmax_) throw CapExceeded("ZonalTable::eval_degree: degree beyond cap");
  const auto& parts = parts_by_k_[k];
  const auto& coef = coef_by_k_[k];
  const int m = static_cast<int>(parts.size());
  std::vector<double> mono(m);
  for (int i = 0; i < m; ++i) mono[i] = monomial_symmetric(parts[i], eig);
  std::vector<double> out(m, 0.0);
  for (int ki = 0; ki < m; ++ki) {
    double acc = 0.0;
    for (int li = 0; li < m; ++li) acc += coef(ki, li) * mono[li];
    out[ki] = acc;
  }
  return out;
}

SeriesResult hypergeometric_matrix(const std::vector<double>& a_list,
                                   const std::vector<double>& b_list, const SymMatrix& z,
                                   int kmax, const ZonalTable& table) {
  if (kmax > table.kmax())
    throw CapExceeded("hypergeometric_matrix: kmax beyond table cap");
  const Eigen::VectorXd eig = sym_eigenvalues(z);
  const int p = static_cast<int>(eig.size());

  double total = 0.0;
  double last_degree = 0.0;
  for (int k = 0; k <= kmax; ++k) {
    const auto& parts = table.partitions(k);
    const std::vector<double> c_vals = table.eval_degree(k, eig);
    const double log_kfact = std::lgamma(k + 1.0);
    double degree_sum = 0.0;
    for (size_t i = 0; i < parts.size(); ++i) {
      const Partition& part = parts[i];
      if (part.num_parts() > p) continue;
      SignedLog coef{1, 0.0};
      for (double a : a_list) coef = coef * pochhammer_partition_log(a, part);
      for (double b : b_list) {
        const SignedLog bp = pochhammer_partition_log(b, part);
        if (bp.sign == 0)
          throw PoleError("hypergeometric_matrix: (b)_K vanished at K = " + part.label());
        coef = coef / bp;
      }
      if (coef.sign == 0 || c_vals[i] == 0.0) continue;
      const double mag = std::exp(coef.log_abs + std::log(std::abs(c_vals[i])) - log_kfact);
      degree_sum += coef.sign * (c_vals[i] > 0 ? 1 : -1) * mag;
    }
    total += degree_sum;
    if (k == kmax) last_degree = std::abs(degree_sum);
  }
  return SeriesResult{total, last_degree, kmax};
}

namespace {

ZonalIntegralCheck finish_check(EstimatorResult lhs, double rhs) {
  const double floor = 1e-10 * (1.0 + std::abs(rhs));
  const double disc = std::abs(lhs.estimate - rhs) / std::max(lhs.std_error, floor);
  return ZonalIntegralCheck{std::move(lhs), rhs, disc};
}

}  // namespace

ZonalIntegralCheck lemma_beta_zonal_check(const ZonalTable& table, double alpha, double beta,
                                          const Partition& k, const PDMatrix& t,
                                          const McPlan& plan) {
  const int p = t.dim();
  if (!(alpha > 0.5 * (p - 1)) || !(beta > 0.5 * (p - 1)))
    throw DomainError("lemma_beta_zonal_check: beta-integral conditions violated");
  const double bp = std::exp(log_beta_p(p, alpha, beta));

  auto stats = mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& s) {
    for (long long i = 0; i < count; ++i) {
      const PDMatrix x = sample_type1_beta(p, alpha, beta, rng);
      s[0].push(table.eval(k, congruence(x, t)));
    }
  });
  EstimatorResult lhs{bp * stats[0].mean, bp * stats[0].se(), stats[0].n, plan.seed,
                      "lemma_beta_zonal[" + k.label() + "]"};

  const SignedLog ratio = log_gamma_p_partition(p, alpha, k) *
                          SignedLog::positive(log_gamma_p(p, beta)) /
                          log_gamma_p_partition(p, alpha + beta, k);
  const double rhs = ratio.value() * table.eval(k, t);
  return finish_check(std::move(lhs), rhs);
}

ZonalIntegralCheck lemma_cone_zonal_check(const ZonalTable& table, double alpha,
                                          const Partition& k, const PDMatrix& a,
                                          const SymMatrix& z, const McPlan& plan) {
  const int p = a.dim();
  if (!(alpha > 0.5 * (p - 1)))
    throw DomainError("lemma_cone_zonal_check: alpha must exceed (p-1)/2");
  const double half = 0.5 * (p + 1);
  const SymMatrix t = conjugate(z, a.sqrt_pd().mat());  // eig(Z S) = eig(T X)
  const double scale = std::exp(alpha * a.logdet() + log_beta_p(p, alpha, half));

  auto stats = mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& s) {
    for (long long i = 0; i < count; ++i) {
      const PDMatrix x = sample_type1_beta(p, alpha, half, rng);
      s[0].push(table.eval(k, conjugate(t, x.sqrt_pd().mat())));
    }
  });
  EstimatorResult lhs{scale * stats[0].mean, scale * stats[0].se(), stats[0].n, plan.seed,
                      "lemma_cone_zonal[" + k.label() + "]"};

  const SignedLog ratio = log_gamma_p_partition(p, alpha, k) *
                          SignedLog::positive(log_gamma_p(p, half)) /
                          log_gamma_p_partition(p, alpha + half, k);
  const double rhs = ratio.value() * std::exp(alpha * a.logdet()) * table.eval(k, t);
  return finish_check(std::move(lhs), rhs);
}

}  // namespace conefrac
