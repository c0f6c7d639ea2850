#include "conefrac/special.hpp"

#include <cmath>
#include <sstream>

#include "conefrac/errors.hpp"

namespace conefrac {

namespace {
constexpr double kLogPi = 1.1447298858494001741;
}

SignedLog SignedLog::of(double v) {
  if (v == 0) return {0, 0};
  return {v > 0 ? 1 : -1, std::log(std::abs(v))};
}

SignedLog SignedLog::operator*(const SignedLog& o) const {
  if (sign == 0 || o.sign == 0) return {0, 0};
  return {sign * o.sign, log_abs + o.log_abs};
}

SignedLog SignedLog::operator/(const SignedLog& o) const {
  if (sign == 0) return {0, 0};
  return {sign * o.sign, log_abs - o.log_abs};
}

double log_gamma_p(int p, double alpha) {
  if (p < 1) throw DomainError("log_gamma_p: dimension must be positive");
  if (!(alpha > 0.5 * (p - 1))) {
    std::ostringstream msg;
    msg << "log_gamma_p: alpha = " << alpha << " violates alpha > (p-1)/2 at p = " << p;
    throw DomainError(msg.str());
  }
  double acc = 0.25 * p * (p - 1) * kLogPi;
  for (int j = 0; j < p; ++j) acc += std::lgamma(alpha - 0.5 * j);
  return acc;
}

double log_beta_p(int p, double a, double b) {
  return log_gamma_p(p, a) + log_gamma_p(p, b) - log_gamma_p(p, a + b);
}

double rising_factorial(double a, int k) {
  double acc = 1.0;
  for (int i = 0; i < k; ++i) acc *= a + i;
  return acc;
}

double pochhammer_partition(double a, const Partition& k) {
  double acc = 1.0;
  for (int j = 1; j <= k.num_parts(); ++j) acc *= rising_factorial(a - 0.5 * (j - 1), k.part(j));
  return acc;
}

SignedLog pochhammer_partition_log(double a, const Partition& k) {
  SignedLog acc{1, 0.0};
  for (int j = 1; j <= k.num_parts(); ++j) {
    const double base = a - 0.5 * (j - 1);
    for (int i = 0; i < k.part(j); ++i) acc = acc * SignedLog::of(base + i);
  }
  return acc;
}

SignedLog log_gamma_p_partition(int p, double alpha, const Partition& k) {
  return SignedLog::positive(log_gamma_p(p, alpha)) * pochhammer_partition_log(alpha, k);
}

double stirling_log_gamma(double z, double shift) {
  if (!(z > 0)) throw DomainError("stirling_log_gamma: z must be positive");
  return 0.5 * std::log(2.0 * M_PI) + (z + shift - 0.5) * std::log(z) - z;
}

}  // namespace conefrac
