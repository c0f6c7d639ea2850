#include "conefrac/suites.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "conefrac/densities.hpp"
#include "conefrac/errors.hpp"
#include "conefrac/operators.hpp"
#include "conefrac/report.hpp"
#include "conefrac/special.hpp"
#include "conefrac/zonal.hpp"

namespace conefrac {

namespace {

double param_or(const std::map<std::string, double>& m, const std::string& k, double dflt) {
  auto it = m.find(k);
  return it == m.end() ? dflt : it->second;
}

PDMatrix test_point(int p) {
  switch (p) {
    case 1: return PDMatrix::scalar(1.3);
    case 2: return PDMatrix(SymMatrix(2, {1.2, 0.3, 0.3, 0.9}));
    case 3:
      return PDMatrix(SymMatrix(3, {1.5, 0.2, 0.1, 0.2, 1.0, 0.15, 0.1, 0.15, 0.6}));
    default: return PDMatrix::identity(p);
  }
}

MatrixDensity suite_density(int p) {
  // Matrix-gamma test function with closed-form M-transform; at p = 1 and
  // shape 1 this is e^{-x}.
  const double shape = p == 1 ? 1.0 : 2.0;
  return matrix_gamma(p, shape, PDMatrix::identity(p));
}

McPlan plan_for(const SuiteRequest& req, std::uint64_t salt) {
  McPlan plan;
  plan.seed = req.seed;
  plan.stream = mix64(salt);
  plan.n = req.n;
  plan.workers = req.workers;
  return plan;
}

VerificationCase budget_case(std::map<std::string, double> params, double lhs, double rhs,
                             double abs_budget, std::string note) {
  VerificationCase c;
  c.params = std::move(params);
  c.lhs = lhs;
  c.rhs = rhs;
  c.se = abs_budget / 3.0;
  c.pass = verification_pass(lhs, rhs, c.se);
  c.note = std::move(note);
  return c;
}

// ---- M-transform theorem suites ---------------------------------------------

VerificationReport suite_thm31(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "thm31";
  rep.seed = req.seed;
  const MatrixDensity f1 = suite_density(1);
  for (double s : {0.75, 1.0, 1.5})
    rep.cases.push_back(verify_kober2_mtransform(1.0, 1.0, f1, s, plan_for(req, 31), true));
  const MatrixDensity f2 = suite_density(2);
  for (double s : {1.75, 2.25})
    rep.cases.push_back(verify_kober2_mtransform(1.0, 1.5, f2, s, plan_for(req, 32)));
  return rep;
}

VerificationReport suite_thm51(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "thm51";
  rep.seed = req.seed;
  const MatrixDensity f1 = suite_density(1);
  for (double s : {0.5, 1.0, 1.5})
    rep.cases.push_back(verify_kober1_mtransform(1.0, 1.0, f1, s, plan_for(req, 51), true));
  // The scalar reduction case: ratio Gamma(1/2)/Gamma(3/2) = 2.
  rep.cases.push_back(verify_kober1_mtransform(0.0, 1.0, f1, 0.5, plan_for(req, 52), true));
  const MatrixDensity f2 = suite_density(2);
  for (double s : {1.2, 1.8})
    rep.cases.push_back(verify_kober1_mtransform(1.5, 1.5, f2, s, plan_for(req, 53)));
  return rep;
}

VerificationReport suite_cor311(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "cor311";
  rep.seed = req.seed;
  const MatrixDensity f1 = suite_density(1);
  for (double s : {0.75, 1.0, 1.5})
    rep.cases.push_back(verify_weyl_mtransform(1.0, f1, s, plan_for(req, 311), true));
  const MatrixDensity f2 = suite_density(2);
  for (double s : {1.75, 2.25})
    rep.cases.push_back(verify_weyl_mtransform(1.5, f2, s, plan_for(req, 312)));
  return rep;
}

VerificationReport suite_cor511(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "cor511";
  rep.seed = req.seed;
  const MatrixDensity f1 = suite_density(1);
  for (double s : {0.25, 0.5, 0.75})
    rep.cases.push_back(verify_rl_mtransform(1.0, f1, s, plan_for(req, 511), true));
  const MatrixDensity f2 = suite_density(2);
  for (double s : {0.6, 0.8})
    rep.cases.push_back(verify_rl_mtransform(1.5, f2, s, plan_for(req, 512)));
  return rep;
}

VerificationReport suite_thm32(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "thm32";
  rep.seed = req.seed;
  for (int p : {1, 2}) {
    const MatrixDensity f = matrix_gamma(p, 1.5 + 0.5 * (p - 1), PDMatrix::identity(p));
    for (double s : {1.0, 1.5, 2.0}) {
      rep.cases.push_back(
          verify_mellin_convolution(0.5, 1.0, f, s, plan_for(req, 320 + p)));
      rep.cases.push_back(verify_mellin_ratio(1.5, 1.0, f, s, plan_for(req, 325 + p)));
    }
  }
  // Operator-as-density normalization (Thm 2.1 / Eq 2.2 reading).
  for (int p : {1, 2}) {
    const MatrixDensity f = suite_density(p);
    SuiteRequest outer = req;
    outer.n = std::max<long long>(req.n / 100, 500);
    rep.cases.push_back(
        verify_operator_density_normalization(1.0, 1.0, f, plan_for(outer, 328 + p)));
  }
  return rep;
}

// ---- Eigenfunction laws -------------------------------------------------------

VerificationReport suite_eigenfn(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "eigenfn";
  rep.seed = req.seed;
  struct Triple {
    double zeta, alpha, lambda;
  };
  const std::vector<Triple> kober1_triples{{0.5, 1.5, 1.0}, {1.0, 2.5, 0.5}, {2.0, 2.0, 1.5}};
  const std::vector<Triple> kober2_triples{{1.5, 1.5, 1.0}, {2.0, 2.5, 0.5}, {2.5, 2.0, 1.5}};
  const Quadrature quad(1e-11);

  int salt = 600;
  for (int p : {1, 2, 3}) {
    const PDMatrix x = test_point(p);
    const double h = 0.5 * (p + 1);
    for (const auto& t : kober1_triples) {
      const double rhs = std::exp(log_gamma_p(p, t.zeta + t.lambda + h) -
                                  log_gamma_p(p, t.zeta + t.alpha + t.lambda + h) +
                                  t.lambda * x.logdet());
      std::map<std::string, double> params{{"p", double(p)},      {"op", 1.0},
                                           {"zeta", t.zeta},       {"alpha", t.alpha},
                                           {"lambda", t.lambda}};
      if (p == 1) {
        const double lhs = kober1_quad(
            t.zeta, t.alpha, [&](double v) { return std::pow(v, t.lambda); }, x.value(), quad);
        rep.cases.push_back(budget_case(std::move(params), lhs, rhs, 1e-8 * (1.0 + rhs),
                                        "quadrature budget 1e-8"));
      } else {
        OperatorSpec spec;
        spec.kind = OperatorKind::KoberI;
        spec.zeta = t.zeta;
        spec.alpha = t.alpha;
        const OperatorEvaluation ev = kober1_apply(
            spec, Integrand::det_power(p, t.lambda), x, plan_for(req, ++salt));
        VerificationCase c;
        c.params = std::move(params);
        c.lhs = ev.value;
        c.rhs = rhs;
        c.se = ev.std_error;
        c.pass = verification_pass(c.lhs, c.rhs, c.se);
        rep.cases.push_back(std::move(c));
      }
    }
    for (const auto& t : kober2_triples) {
      const double rhs = std::exp(log_gamma_p(p, t.zeta + t.lambda) -
                                  log_gamma_p(p, t.zeta + t.alpha + t.lambda) -
                                  t.lambda * x.logdet());
      std::map<std::string, double> params{{"p", double(p)},      {"op", 2.0},
                                           {"zeta", t.zeta},       {"alpha", t.alpha},
                                           {"lambda", t.lambda}};
      if (p == 1) {
        const double lhs = kober2_quad(
            t.zeta, t.alpha, [&](double v) { return std::pow(v, -t.lambda); }, x.value(), quad);
        rep.cases.push_back(budget_case(std::move(params), lhs, rhs, 1e-8 * (1.0 + rhs),
                                        "quadrature budget 1e-8"));
      } else {
        OperatorSpec spec;
        spec.kind = OperatorKind::KoberII;
        spec.zeta = t.zeta;
        spec.alpha = t.alpha;
        const OperatorEvaluation ev = kober2_apply(
            spec, Integrand::det_power(p, -t.lambda), x, plan_for(req, ++salt));
        VerificationCase c;
        c.params = std::move(params);
        c.lhs = ev.value;
        c.rhs = rhs;
        c.se = ev.std_error;
        c.pass = verification_pass(c.lhs, c.rhs, c.se);
        rep.cases.push_back(std::move(c));
      }
    }
  }
  return rep;
}

// ---- Zonal integral lemmas ----------------------------------------------------

VerificationReport suite_lemma41(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "lemma41";
  rep.seed = req.seed;
  const auto table = ZonalTable::build(4, 4);
  const double alpha = param_or(req.params, "alpha", 3.0);
  const double beta = param_or(req.params, "beta", 3.0);
  const std::vector<Partition> ks{Partition{}, Partition{{1}}, Partition{{2}},
                                  Partition{{1, 1}}};
  int salt = 410;
  for (const PDMatrix& t : {PDMatrix::identity(2), test_point(2)}) {
    for (const auto& k : ks) {
      const ZonalIntegralCheck chk =
          lemma_beta_zonal_check(*table, alpha, beta, k, t, plan_for(req, ++salt));
      VerificationCase c;
      c.params = {{"p", 2.0}, {"alpha", alpha}, {"beta", beta},
                  {"k", double(k.weight())}, {"parts", double(k.num_parts())}};
      c.lhs = chk.lhs.estimate;
      c.rhs = chk.rhs;
      c.se = chk.lhs.std_error;
      c.pass = verification_pass(c.lhs, c.rhs, c.se);
      rep.cases.push_back(std::move(c));
    }
  }
  return rep;
}

VerificationReport suite_lemma42(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "lemma42";
  rep.seed = req.seed;
  const auto table = ZonalTable::build(4, 4);
  const double alpha = param_or(req.params, "alpha", 3.0);
  const PDMatrix a = PDMatrix(SymMatrix(2, {0.8, 0.2, 0.2, 1.1}));
  const SymMatrix z(2, {0.9, -0.1, -0.1, 0.5});
  const std::vector<Partition> ks{Partition{}, Partition{{1}}, Partition{{2}},
                                  Partition{{1, 1}}};
  int salt = 420;
  for (const auto& k : ks) {
    const ZonalIntegralCheck chk =
        lemma_cone_zonal_check(*table, alpha, k, a, z, plan_for(req, ++salt));
    VerificationCase c;
    c.params = {{"p", 2.0}, {"alpha", alpha}, {"k", double(k.weight())},
                {"parts", double(k.num_parts())}};
    c.lhs = chk.lhs.estimate;
    c.rhs = chk.rhs;
    c.se = chk.lhs.std_error;
    c.pass = verification_pass(c.lhs, c.rhs, c.se);
    rep.cases.push_back(std::move(c));
  }
  return rep;
}

// ---- Pathway lemmas and limits -------------------------------------------------

namespace {

// Exact log of the self-derived second-kind pathway constant C1.
double log_c1_exact(int p, double gamma, double a, double eta, double q) {
  const double h = 0.5 * (p + 1);
  const double bt = eta / (1 - q);
  return (p * gamma + 0.5 * p * (p + 1)) * std::log(a * (1 - q)) -
         log_beta_p(p, gamma + h, bt + h);
}

// The same constant with every scalar gamma of the beta_tilde-dependent ratio
// replaced by its first Stirling term (the limit-argument device).
double log_c1_stirling(int p, double gamma, double a, double eta, double q) {
  const double h = 0.5 * (p + 1);
  const double bt = eta / (1 - q);
  double ratio = 0;  // log Gamma_p(gamma+bt+p+1) - log Gamma_p(bt+h)
  for (int j = 0; j < p; ++j) {
    ratio += stirling_log_gamma(bt, gamma + (p + 1) - 0.5 * j) -
             stirling_log_gamma(bt, h - 0.5 * j);
  }
  return (p * gamma + 0.5 * p * (p + 1)) * std::log(a * (1 - q)) + ratio -
         log_gamma_p(p, gamma + h);
}

double log_c1_limit(int p, double gamma, double a, double eta) {
  const double h = 0.5 * (p + 1);
  return (p * gamma + 0.5 * p * (p + 1)) * std::log(a * eta) - log_gamma_p(p, gamma + h);
}

}  // namespace

VerificationReport suite_lemma21(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "lemma21";
  rep.seed = req.seed;
  const double q = 1.0 - param_or(req.params, "one_minus_q", 1e-4);
  for (int p : {1, 2, 3}) {
    for (double gamma : {0.5, 1.0, 2.0}) {
      for (double eta : {1.0, 2.0}) {
        const double limit = std::exp(log_c1_limit(p, gamma, 1.0, eta));
        const double exact = std::exp(log_c1_exact(p, gamma, 1.0, eta, q));
        rep.cases.push_back(budget_case(
            {{"p", double(p)}, {"gamma", gamma}, {"eta", eta}, {"route", 0.0}}, exact, limit,
            0.01 * limit, "1% budget at 1-q=1e-4"));
        const double stirling = std::exp(log_c1_stirling(p, gamma, 1.0, eta, q));
        rep.cases.push_back(budget_case(
            {{"p", double(p)}, {"gamma", gamma}, {"eta", eta}, {"route", 1.0}}, stirling,
            limit, 0.01 * limit, "Stirling device, 1% budget"));
      }
    }
  }
  return rep;
}

namespace {

double pathway_kernel(const Eigen::VectorXd& eig, double a, double eta, double q) {
  const double bt = eta / (1 - q);
  double acc = 0;
  for (int i = 0; i < eig.size(); ++i) acc += std::log1p(-a * (1 - q) * eig(i));
  return std::exp(bt * acc);
}

}  // namespace

VerificationReport suite_lemma22(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "lemma22";
  rep.seed = req.seed;
  struct Setup {
    int p;
    Eigen::VectorXd eig;
    double a, eta;
  };
  std::vector<Setup> setups;
  Eigen::VectorXd e1(1);
  e1 << 1.0;
  setups.push_back({1, e1, 1.0, 1.0});
  const PDMatrix x2 = PDMatrix(SymMatrix(2, {1.0, 0.25, 0.25, 0.7}));
  setups.push_back({2, x2.eigenvalues(), 0.8, 1.3});

  for (const auto& st : setups) {
    double tr = st.eig.sum();
    const double limit = std::exp(-st.a * st.eta * tr);
    std::vector<double> errs;
    for (int m = 1; m <= 8; ++m) {
      const double q = 1.0 - std::pow(2.0, -m);
      errs.push_back(std::abs(pathway_kernel(st.eig, st.a, st.eta, q) - limit));
    }
    for (int m = 1; m < 8; ++m) {
      const double ratio = errs[m - 1] / errs[m];
      rep.cases.push_back(budget_case(
          {{"p", double(st.p)}, {"m", double(m)}, {"a", st.a}, {"eta", st.eta}}, ratio, 2.0,
          0.4, "error halving, 2 +/- 0.4"));
    }
  }
  return rep;
}

VerificationReport suite_pathway_limit(const SuiteRequest& req) {
  VerificationReport rep;
  rep.suite = "pathway-limit";
  rep.seed = req.seed;
  const Quadrature quad(1e-12);
  const double gamma = param_or(req.params, "gamma", 1.0);
  const double a = param_or(req.params, "a", 1.0);
  const double eta = param_or(req.params, "eta", 1.0);
  const double u = param_or(req.params, "u", 1.3);
  auto f = [](double v) { return std::exp(-v); };

  for (int kind = 2; kind >= 1; --kind) {
    const double limit = kind == 2 ? pathway2_limit_quad(gamma, a * eta, f, u, quad)
                                   : pathway1_limit_quad(gamma, a * eta, f, u, quad);
    std::vector<double> errs;
    const int m_lo = 2, m_hi = 10;
    for (int m = m_lo; m <= m_hi; ++m) {
      PathwayParams pp;
      pp.p = 1;
      pp.kind = kind == 2 ? PathwayKind::SecondKind : PathwayKind::FirstKind;
      pp.gamma = gamma;
      pp.eta = eta;
      pp.a = a;
      pp.q = 1.0 - std::pow(2.0, -m);
      const double g = kind == 2 ? pathway2_density_quad(pp, f, u, quad)
                                 : pathway1_density_quad(pp, f, u, quad);
      errs.push_back(std::abs(g - limit));
    }
    for (size_t i = 0; i + 1 < errs.size(); ++i) {
      rep.cases.push_back(budget_case({{"kind", double(kind)},
                                       {"m", double(m_lo + static_cast<int>(i))},
                                       {"gamma", gamma},
                                       {"u", u}},
                                      errs[i] / errs[i + 1], 2.0, 0.4,
                                      "operator value error halving, 2 +/- 0.4"));
    }
  }
  // Lemma 2.1 constant at 1-q = 1e-4 (1% budget).
  const double q = 1.0 - 1e-4;
  for (int p : {1, 2}) {
    const double limit = std::exp(log_c1_limit(p, gamma, a, eta));
    const double exact = std::exp(log_c1_exact(p, gamma, a, eta, q));
    rep.cases.push_back(budget_case({{"p", double(p)}, {"gamma", gamma}}, exact, limit,
                                    0.01 * limit, "1% budget at 1-q=1e-4"));
  }
  return rep;
}

}  // namespace

std::vector<std::string> known_suites() {
  return {"thm31",   "thm51",   "cor311",  "cor511",        "thm32", "lemma21",
          "lemma22", "lemma41", "lemma42", "eigenfn",       "pathway-limit"};
}

VerificationReport run_suite(const SuiteRequest& req) {
  if (req.name == "thm31") return suite_thm31(req);
  if (req.name == "thm51") return suite_thm51(req);
  if (req.name == "cor311") return suite_cor311(req);
  if (req.name == "cor511") return suite_cor511(req);
  if (req.name == "thm32") return suite_thm32(req);
  if (req.name == "lemma21") return suite_lemma21(req);
  if (req.name == "lemma22") return suite_lemma22(req);
  if (req.name == "lemma41") return suite_lemma41(req);
  if (req.name == "lemma42") return suite_lemma42(req);
  if (req.name == "eigenfn") return suite_eigenfn(req);
  if (req.name == "pathway-limit") return suite_pathway_limit(req);
  throw ConfigError("unknown suite '" + req.name + "'");
}

std::vector<ConvergenceTable> run_pathway_study(int m_min, int m_max,
                                                const std::map<std::string, double>& params) {
  if (m_min < 1 || m_max < m_min) throw ConfigError("pathway study: bad m range");
  const double gamma = param_or(params, "gamma", 1.0);
  const double a = param_or(params, "a", 1.0);
  const double eta = param_or(params, "eta", 1.0);
  const double u = param_or(params, "u", 1.3);
  const double x = param_or(params, "x", 1.0);
  const Quadrature quad(1e-12);
  auto f = [](double v) { return std::exp(-v); };

  std::vector<ConvergenceTable> tables;

  auto push_rows = [&](ConvergenceTable& t, const std::function<double(double)>& value_at_q,
                       double limit) {
    double prev = 0;
    for (int m = m_min; m <= m_max; ++m) {
      const double q = 1.0 - std::pow(2.0, -m);
      ConvergenceRow row;
      row.m = m;
      row.q = q;
      row.value = value_at_q(q);
      row.limit_value = limit;
      row.abs_error = std::abs(row.value - limit);
      row.ratio_vs_prev = prev > 0 ? prev / row.abs_error : 0.0;
      prev = row.abs_error;
      t.rows.push_back(row);
    }
  };

  {
    ConvergenceTable t;
    t.label = "lemma22_kernel_scalar";
    Eigen::VectorXd e1(1);
    e1 << x;
    push_rows(t, [&](double q) { return pathway_kernel(e1, a, eta, q); },
              std::exp(-a * eta * x));
    tables.push_back(std::move(t));
  }
  {
    ConvergenceTable t;
    t.label = "lemma21_constant_p2";
    push_rows(t, [&](double q) { return std::exp(log_c1_exact(2, gamma, a, eta, q)); },
              std::exp(log_c1_limit(2, gamma, a, eta)));
    tables.push_back(std::move(t));
  }
  {
    ConvergenceTable t;
    t.label = "pathway2_operator_p1";
    const double limit = pathway2_limit_quad(gamma, a * eta, f, u, quad);
    push_rows(t,
              [&](double q) {
                PathwayParams pp;
                pp.p = 1;
                pp.kind = PathwayKind::SecondKind;
                pp.gamma = gamma;
                pp.eta = eta;
                pp.a = a;
                pp.q = q;
                return pathway2_density_quad(pp, f, u, quad);
              },
              limit);
    tables.push_back(std::move(t));
  }
  {
    ConvergenceTable t;
    t.label = "pathway1_operator_p1";
    const double limit = pathway1_limit_quad(gamma, a * eta, f, u, quad);
    push_rows(t,
              [&](double q) {
                PathwayParams pp;
                pp.p = 1;
                pp.kind = PathwayKind::FirstKind;
                pp.gamma = gamma;
                pp.eta = eta;
                pp.a = a;
                pp.q = q;
                return pathway1_density_quad(pp, f, u, quad);
              },
              limit);
    tables.push_back(std::move(t));
  }
  return tables;
}

std::string pathway_study_csv(const std::vector<ConvergenceTable>& tables) {
  std::ostringstream os;
  os << "table,m,q,value,limit,abs_error,error_ratio_vs_prev\n";
  for (const auto& t : tables)
    for (const auto& r : t.rows)
      os << t.label << ',' << r.m << ',' << format_double(r.q) << ','
         << format_double(r.value) << ',' << format_double(r.limit_value) << ','
         << format_double(r.abs_error) << ',' << format_double(r.ratio_vs_prev) << '\n';
  return os.str();
}

std::string gamma_grid_csv(const std::vector<int>& dims, const std::vector<double>& alphas) {
  std::ostringstream os;
  os << "p,alpha,log_gamma_p,status\n";
  for (int p : dims)
    for (double alpha : alphas) {
      os << p << ',' << format_double(alpha) << ',';
      try {
        os << format_double(log_gamma_p(p, alpha)) << ",ok\n";
      } catch (const DomainError&) {
        os << ",domain_error\n";
      }
    }
  return os.str();
}

std::string zonal_table_csv(int kmax, int max_parts) {
  const auto table = ZonalTable::build(kmax, max_parts);
  std::ostringstream os;
  os << "k,partition,monomial,coefficient\n";
  for (int k = 0; k <= kmax; ++k) {
    const auto& parts = table->partitions(k);
    for (size_t ki = 0; ki < parts.size(); ++ki)
      for (size_t li = 0; li < parts.size(); ++li) {
        const std::string& c =
            table->coefficient_rational(k, static_cast<int>(ki), static_cast<int>(li));
        if (c == "0") continue;
        os << k << ',' << parts[ki].label() << ',' << parts[li].label() << ',' << c << '\n';
      }
  }
  return os.str();
}

}  // namespace conefrac
