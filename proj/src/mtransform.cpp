#include "conefrac/mtransform.hpp"

#include <cmath>
#include <limits>

#include "conefrac/errors.hpp"
#include "conefrac/special.hpp"

namespace conefrac {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kQuadBudgetSe = 1e-6 / 3.0;  // quadrature cases: pass iff |diff| <= 1e-6
constexpr long long kInnerN = 256;

double half_dim(int p) { return 0.5 * (p + 1); }

double logdet_i_plus(const PDMatrix& x) {
  double acc = 0;
  for (int i = 0; i < x.dim(); ++i) acc += std::log1p(x.eigenvalues()(i));
  return acc;
}

// Inner-estimate plan with a stream drawn from the outer block stream; the
// derivation is deterministic, so results do not depend on the worker count.
McPlan inner_plan(const McPlan& outer, RngStream& rng) {
  McPlan ip = outer;
  ip.stream = rng.next_u64();
  ip.n = kInnerN;
  ip.workers = 1;
  ip.block_size = kInnerN;
  return ip;
}

VerificationCase make_case(std::map<std::string, double> params, double lhs, double rhs,
                           double se, std::string note = {}) {
  VerificationCase c;
  c.params = std::move(params);
  c.lhs = lhs;
  c.rhs = rhs;
  c.se = se;
  c.pass = verification_pass(lhs, rhs, se);
  c.note = std::move(note);
  return c;
}

}  // namespace

bool verification_pass(double lhs, double rhs, double se) {
  return std::abs(lhs - rhs) <= 3.0 * std::max(se, 1e-10);
}

bool VerificationReport::all_pass() const {
  for (const auto& c : cases)
    if (!c.pass) return false;
  return true;
}

EstimatorResult m_transform(const MTransformQuery& query) {
  const int p = query.f.p;
  const double h = half_dim(p);
  const double s = query.s;
  switch (query.method) {
    case MTransformMethod::ClosedForm: {
      if (!query.f.density || !query.f.density->has_m_transform())
        throw DomainError("m_transform: no closed form attached to this integrand");
      const double v = std::exp(query.f.density->log_m_transform(s));
      return EstimatorResult{v, 0.0, 0, query.plan.seed, "m_transform/closed_form"};
    }
    case MTransformMethod::Quadrature: {
      if (p != 1) throw DomainError("m_transform: quadrature path requires p = 1");
      if (!(s > 0)) throw DomainError("m_transform: quadrature needs s > 0");
      Quadrature quad(1e-10);
      const double v =
          quad.power_weighted_to_inf([&](double x) { return query.f.value1(x); }, s);
      return EstimatorResult{v, 0.0, 0, query.plan.seed, "m_transform/quadrature"};
    }
    case MTransformMethod::MonteCarlo: {
      if (query.f.density && query.f.density->has_sampler()) {
        return det_moment(query.f.density->sample, s - h, query.plan);
      }
      if (!(s > 0.5 * (p - 1)))
        throw DomainError("m_transform: importance proposal needs s > (p-1)/2");
      const double rate =
          (query.f.density && query.f.density->decay_rate > 0)
              ? 0.5 * query.f.density->decay_rate
              : 0.5;
      const PDMatrix b = PDMatrix(SymMatrix(rate * Eigen::MatrixXd::Identity(p, p)));
      const double log_front = log_gamma_p(p, s) - s * b.logdet();
      auto stats = mc_run(query.plan, 1,
                          [&](RngStream& rng, long long count, std::vector<RunningStats>& st) {
                            for (long long i = 0; i < count; ++i) {
                              const PDMatrix x = sample_matrix_gamma(p, s, b, rng);
                              const double lf = query.f.log_value(x);
                              st[0].push(lf == kNegInf ? 0.0
                                                       : std::exp(log_front + rate * x.trace() + lf));
                            }
                          });
      return EstimatorResult{stats[0].mean, stats[0].se(), stats[0].n, query.plan.seed,
                             "m_transform/importance"};
    }
  }
  throw DomainError("m_transform: unknown method");
}

// ---- Theorem 3.1 ------------------------------------------------------------

VerificationCase verify_kober2_mtransform(double zeta, double alpha, const MatrixDensity& f,
                                          double s, const McPlan& plan, bool use_quadrature) {
  const int p = f.p;
  if (!(zeta + s > 0.5 * (p - 1)))
    throw DomainError("verify_kober2: requires zeta + s > (p-1)/2");
  if (!(alpha > 0.5 * (p - 1))) throw DomainError("verify_kober2: alpha out of domain");
  const double rhs = std::exp(log_gamma_p(p, zeta + s) - log_gamma_p(p, alpha + zeta + s) +
                              f.log_m_transform(s));
  std::map<std::string, double> params{
      {"p", double(p)}, {"zeta", zeta}, {"alpha", alpha}, {"s", s}};

  if (use_quadrature) {
    if (p != 1) throw DomainError("verify_kober2: quadrature path requires p = 1");
    Quadrature inner(1e-11), outer(1e-9);
    auto f1 = [&](double t) { return std::exp(f.log_pdf(PDMatrix::scalar(t))); };
    const double lhs = outer.power_weighted_to_inf(
        [&](double u) { return kober2_quad(zeta, alpha, f1, u, inner); }, s);
    return make_case(std::move(params), lhs, rhs, kQuadBudgetSe, "quadrature budget 1e-6");
  }

  if (!(s > 0.5 * (p - 1)))
    throw DomainError("verify_kober2: outer proposal needs s > (p-1)/2");
  const double rate = f.decay_rate > 0 ? 0.5 * f.decay_rate : 0.5;
  const PDMatrix b = PDMatrix(SymMatrix(rate * Eigen::MatrixXd::Identity(p, p)));
  const double log_front = log_gamma_p(p, s) - s * b.logdet();
  const Integrand fi = Integrand::from_density(f);
  OperatorSpec spec;
  spec.kind = OperatorKind::KoberII;
  spec.zeta = zeta;
  spec.alpha = alpha;
  auto stats =
      mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& st) {
        for (long long i = 0; i < count; ++i) {
          const PDMatrix u = sample_matrix_gamma(p, s, b, rng);
          const McPlan ip = inner_plan(plan, rng);
          const double inner_est = kober2_apply(spec, fi, u, ip).value;
          st[0].push(std::exp(log_front + rate * u.trace()) * inner_est);
        }
      });
  return make_case(std::move(params), stats[0].mean, rhs, stats[0].se());
}

// ---- Theorem 5.1 ------------------------------------------------------------

VerificationCase verify_kober1_mtransform(double zeta, double alpha, const MatrixDensity& f,
                                          double s, const McPlan& plan, bool use_quadrature) {
  const int p = f.p;
  const double h = half_dim(p);
  if (!(s < zeta + 1)) throw DomainError("verify_kober1: requires s < zeta + 1");
  if (!(alpha > 0.5 * (p - 1))) throw DomainError("verify_kober1: alpha out of domain");
  const double rhs =
      std::exp(log_gamma_p(p, zeta + h - s) - log_gamma_p(p, alpha + zeta + h - s) +
               f.log_m_transform(s));
  std::map<std::string, double> params{
      {"p", double(p)}, {"zeta", zeta}, {"alpha", alpha}, {"s", s}};

  if (use_quadrature) {
    if (p != 1) throw DomainError("verify_kober1: quadrature path requires p = 1");
    Quadrature inner(1e-11), outer(1e-9);
    auto f1 = [&](double v) { return std::exp(f.log_pdf(PDMatrix::scalar(v))); };
    const double lhs = outer.power_weighted_to_inf(
        [&](double u) { return kober1_quad(zeta, alpha, f1, u, inner); }, s);
    return make_case(std::move(params), lhs, rhs, kQuadBudgetSe, "quadrature budget 1e-6");
  }

  // Outer proposal: type-2 beta(s, zeta+(p+1)/2-s), matching both the s-power
  // at the origin and the polynomial tail of the Kober-I output.
  if (!(s > 0.5 * (p - 1)))
    throw DomainError("verify_kober1: outer proposal needs s > (p-1)/2");
  const double b0 = zeta + h - s;
  const double log_bp = log_beta_p(p, s, b0);
  const Integrand fi = Integrand::from_density(f);
  OperatorSpec spec;
  spec.kind = OperatorKind::KoberI;
  spec.zeta = zeta;
  spec.alpha = alpha;
  auto stats =
      mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& st) {
        for (long long i = 0; i < count; ++i) {
          const PDMatrix u = sample_type2_beta(p, s, b0, rng);
          const McPlan ip = inner_plan(plan, rng);
          const double inner_est = kober1_apply(spec, fi, u, ip).value;
          st[0].push(std::exp(log_bp + (zeta + h) * logdet_i_plus(u)) * inner_est);
        }
      });
  return make_case(std::move(params), stats[0].mean, rhs, stats[0].se());
}

// ---- Corollary 3.1.1 ---------------------------------------------------------

VerificationCase verify_weyl_mtransform(double alpha, const MatrixDensity& f, double s,
                                        const McPlan& plan, bool use_quadrature) {
  const int p = f.p;
  if (!(s > 0.5 * (p - 1)) || !(alpha > 0.5 * (p - 1)))
    throw DomainError("verify_weyl: s and alpha must exceed (p-1)/2");
  const double rhs =
      std::exp(log_gamma_p(p, s) - log_gamma_p(p, alpha + s) + f.log_m_transform(s));
  std::map<std::string, double> params{{"p", double(p)}, {"alpha", alpha}, {"s", s}};

  // W acts on |T|^{-alpha} f(T).
  const auto log_pdf = f.log_pdf;
  Integrand f2 = Integrand::from_log_fn(
      p, [log_pdf, alpha](const PDMatrix& t) { return -alpha * t.logdet() + log_pdf(t); },
      "det^-alpha*" + f.label);

  if (use_quadrature) {
    if (p != 1) throw DomainError("verify_weyl: quadrature path requires p = 1");
    Quadrature inner(1e-11), outer(1e-9);
    auto fn2 = [&](double t) { return f2.value1(t); };
    const double lhs = outer.power_weighted_to_inf(
        [&](double u) { return weyl_right_quad(alpha, fn2, u, inner); }, s);
    return make_case(std::move(params), lhs, rhs, kQuadBudgetSe, "quadrature budget 1e-6");
  }

  const double rate = f.decay_rate > 0 ? 0.5 * f.decay_rate : 0.5;
  const PDMatrix b = PDMatrix(SymMatrix(rate * Eigen::MatrixXd::Identity(p, p)));
  const double log_front = log_gamma_p(p, s) - s * b.logdet();
  auto stats =
      mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& st) {
        for (long long i = 0; i < count; ++i) {
          const PDMatrix u = sample_matrix_gamma(p, s, b, rng);
          const McPlan ip = inner_plan(plan, rng);
          const double inner_est =
              weyl_right_apply(alpha, f2, u, ip, f.decay_rate > 0 ? f.decay_rate : 1.0).value;
          st[0].push(std::exp(log_front + rate * u.trace()) * inner_est);
        }
      });
  return make_case(std::move(params), stats[0].mean, rhs, stats[0].se());
}

// ---- Corollary 5.1.1 ---------------------------------------------------------

VerificationCase verify_rl_mtransform(double alpha, const MatrixDensity& f, double s,
                                      const McPlan& plan, bool use_quadrature) {
  const int p = f.p;
  const double h = half_dim(p);
  if (!(s < 1)) throw DomainError("verify_rl: requires s < 1");
  if (!(alpha > 0.5 * (p - 1))) throw DomainError("verify_rl: alpha out of domain");
  const double rhs = std::exp(log_gamma_p(p, h - s) - log_gamma_p(p, h + alpha - s) +
                              f.log_m_transform(s));
  std::map<std::string, double> params{{"p", double(p)}, {"alpha", alpha}, {"s", s}};

  if (use_quadrature) {
    if (p != 1) throw DomainError("verify_rl: quadrature path requires p = 1");
    Quadrature inner(1e-11), outer(1e-9);
    auto f1 = [&](double v) { return std::exp(f.log_pdf(PDMatrix::scalar(v))); };
    const double lhs = outer.power_weighted_to_inf(
        [&](double u) { return kober1_quad(0.0, alpha, f1, u, inner); }, s);
    return make_case(std::move(params), lhs, rhs, kQuadBudgetSe, "quadrature budget 1e-6");
  }

  if (!(s > 0.5 * (p - 1)))
    throw DomainError("verify_rl: outer proposal needs s > (p-1)/2");
  const double b0 = h - s;
  const double log_bp = log_beta_p(p, s, b0);
  const Integrand fi = Integrand::from_density(f);
  OperatorSpec spec;
  spec.kind = OperatorKind::KoberI;
  spec.zeta = 0;
  spec.alpha = alpha;
  auto stats =
      mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& st) {
        for (long long i = 0; i < count; ++i) {
          const PDMatrix u = sample_type2_beta(p, s, b0, rng);
          const McPlan ip = inner_plan(plan, rng);
          const double inner_est = kober1_apply(spec, fi, u, ip).value;
          st[0].push(std::exp(log_bp + h * logdet_i_plus(u)) * inner_est);
        }
      });
  return make_case(std::move(params), stats[0].mean, rhs, stats[0].se());
}

// ---- Theorem 3.2 (Mellin factorization, product) -----------------------------

VerificationCase verify_mellin_convolution(double zeta, double alpha, const MatrixDensity& f,
                                           double s, const McPlan& plan) {
  const int p = f.p;
  const double h = half_dim(p);
  if (!(zeta + s > 0.5 * (p - 1)))
    throw DomainError("verify_mellin_convolution: requires zeta + s > (p-1)/2");
  if (!f.has_sampler()) throw DomainError("verify_mellin_convolution: f needs a sampler");
  const double rhs =
      std::exp(log_gamma_p(p, zeta + s) + log_gamma_p(p, zeta + alpha + h) -
               log_gamma_p(p, alpha + zeta + s) - log_gamma_p(p, zeta + h) +
               f.log_m_transform(s));
  const MatrixSampler beta_sampler = [p, zeta, alpha, h](RngStream& rng) {
    return sample_type1_beta(p, zeta + h, alpha, rng);
  };
  const MatrixSampler f_sampler = f.sample;
  const MatrixSampler product = [beta_sampler, f_sampler](RngStream& rng) {
    return sample_product(beta_sampler, f_sampler, rng);
  };
  const EstimatorResult lhs = det_moment(product, s - h, plan);
  return make_case({{"p", double(p)}, {"zeta", zeta}, {"alpha", alpha}, {"s", s}},
                   lhs.estimate, rhs, lhs.std_error);
}

// ---- Ratio construction (Kober first kind statistical view) -------------------

VerificationCase verify_mellin_ratio(double zeta, double alpha, const MatrixDensity& f,
                                     double s, const McPlan& plan) {
  const int p = f.p;
  const double h = half_dim(p);
  if (!(zeta > 0.5 * (p - 1)))
    throw DomainError("verify_mellin_ratio: requires zeta > (p-1)/2");
  if (!(s < zeta + 1)) throw DomainError("verify_mellin_ratio: requires s < zeta + 1");
  if (!f.has_sampler()) throw DomainError("verify_mellin_ratio: f needs a sampler");
  const double rhs =
      std::exp(log_gamma_p(p, zeta + h - s) + log_gamma_p(p, zeta + alpha) -
               log_gamma_p(p, zeta + alpha + h - s) - log_gamma_p(p, zeta) +
               f.log_m_transform(s));
  const MatrixSampler beta_sampler = [p, zeta, alpha](RngStream& rng) {
    return sample_type1_beta(p, zeta, alpha, rng);
  };
  const MatrixSampler f_sampler = f.sample;
  const MatrixSampler ratio = [beta_sampler, f_sampler](RngStream& rng) {
    return sample_ratio(beta_sampler, f_sampler, rng);
  };
  const EstimatorResult lhs = det_moment(ratio, s - h, plan);
  return make_case({{"p", double(p)}, {"zeta", zeta}, {"alpha", alpha}, {"s", s}},
                   lhs.estimate, rhs, lhs.std_error);
}

// ---- Operator-as-density normalization ----------------------------------------

VerificationCase verify_operator_density_normalization(double zeta, double alpha,
                                                       const MatrixDensity& f,
                                                       const McPlan& plan) {
  const int p = f.p;
  const double h = half_dim(p);
  const double norm =
      std::exp(log_gamma_p(p, alpha + zeta + h) - log_gamma_p(p, zeta + h));
  const double rate = f.decay_rate > 0 ? 0.5 * f.decay_rate : 0.5;
  const PDMatrix b = PDMatrix(SymMatrix(rate * Eigen::MatrixXd::Identity(p, p)));
  const double log_front = log_gamma_p(p, h) - h * b.logdet();
  const Integrand fi = Integrand::from_density(f);
  OperatorSpec spec;
  spec.kind = OperatorKind::KoberII;
  spec.zeta = zeta;
  spec.alpha = alpha;
  auto stats =
      mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& st) {
        for (long long i = 0; i < count; ++i) {
          const PDMatrix u = sample_matrix_gamma(p, h, b, rng);
          const McPlan ip = inner_plan(plan, rng);
          const double inner_est = kober2_apply(spec, fi, u, ip).value;
          st[0].push(norm * std::exp(log_front + rate * u.trace()) * inner_est);
        }
      });
  return make_case({{"p", double(p)}, {"zeta", zeta}, {"alpha", alpha}}, stats[0].mean, 1.0,
                   stats[0].se());
}

}  // namespace conefrac
