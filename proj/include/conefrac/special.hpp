#pragma once

#include <cmath>

#include "conefrac/partition.hpp"

namespace conefrac {

// Sign/log-magnitude pair for quantities that may be zero or negative but
// whose magnitude can overflow double (Pochhammer products, series terms).
struct SignedLog {
  int sign = 0;         // -1, 0, +1
  double log_abs = 0;   // meaningless when sign == 0

  static SignedLog of(double v);
  static SignedLog positive(double log_value) { return {1, log_value}; }
  double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
  SignedLog operator*(const SignedLog& o) const;
  SignedLog operator/(const SignedLog& o) const;
};

// log Gamma_p(alpha) = p(p-1)/4 log pi + sum_{j=0}^{p-1} log Gamma(alpha - j/2).
// Throws DomainError unless alpha > (p-1)/2.
double log_gamma_p(int p, double alpha);

// log B_p(a, b) = log Gamma_p(a) + log Gamma_p(b) - log Gamma_p(a+b).
double log_beta_p(int p, double a, double b);

// Rising factorial (a)_k = a(a+1)...(a+k-1); (a)_0 = 1.  Exact product form,
// so zero and negative values are representable.
double rising_factorial(double a, int k);

// Generalized Pochhammer symbol (a)_K = prod_j (a - (j-1)/2)_{k_j}.
double pochhammer_partition(double a, const Partition& K);
SignedLog pochhammer_partition_log(double a, const Partition& K);

// Gamma_p(alpha, K) = Gamma_p(alpha) (alpha)_K, as a signed log.
SignedLog log_gamma_p_partition(int p, double alpha, const Partition& K);

// First Stirling term log[sqrt(2 pi) z^{z+shift-1/2} e^{-z}], z > 0.  Used to
// reproduce the q->1 limit of the pathway normalizing constants numerically.
double stirling_log_gamma(double z, double shift);

}  // namespace conefrac
