#include "conefrac/densities.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "conefrac/errors.hpp"
#include "conefrac/special.hpp"

namespace conefrac {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double half_dim(int p) { return 0.5 * (p + 1); }

// log det(I - X) and log det(I + X) from the cached spectrum.
double logdet_i_minus(const PDMatrix& x) {
  double acc = 0;
  for (int i = 0; i < x.dim(); ++i) acc += std::log1p(-x.eigenvalues()(i));
  return acc;
}

double logdet_i_plus(const PDMatrix& x) {
  double acc = 0;
  for (int i = 0; i < x.dim(); ++i) acc += std::log1p(x.eigenvalues()(i));
  return acc;
}

bool inside_unit_interval(const PDMatrix& x) {
  return is_strictly_pd(SymMatrix(Eigen::MatrixXd::Identity(x.dim(), x.dim()) - x.mat()));
}

void require_beta_params(int p, double a, double b, const char* who) {
  if (!(a > 0.5 * (p - 1)) || !(b > 0.5 * (p - 1))) {
    std::ostringstream msg;
    msg << who << ": parameters (" << a << ", " << b << ") must exceed (p-1)/2 = "
        << 0.5 * (p - 1);
    throw DomainError(msg.str());
  }
}

}  // namespace

MatrixDensity type1_beta(int p, double a, double b) {
  require_beta_params(p, a, b, "type1_beta");
  const double h = half_dim(p);
  const double log_norm = log_beta_p(p, a, b);
  MatrixDensity d;
  d.p = p;
  {
    std::ostringstream os;
    os << "type1_beta(p=" << p << ",a=" << a << ",b=" << b << ")";
    d.label = os.str();
  }
  d.in_support = [](const PDMatrix& x) { return inside_unit_interval(x); };
  d.log_pdf = [=](const PDMatrix& x) {
    if (!inside_unit_interval(x)) return kNegInf;
    return -log_norm + (a - h) * x.logdet() + (b - h) * logdet_i_minus(x);
  };
  d.log_m_transform = [=](double s) {
    if (!(a + s - h > 0.5 * (p - 1)))
      throw DomainError("type1_beta m-transform: s out of domain");
    return log_beta_p(p, a + s - h, b) - log_norm;
  };
  d.sample = [=](RngStream& rng) { return sample_type1_beta(p, a, b, rng); };
  return d;
}

MatrixDensity type2_beta(int p, double a, double b) {
  require_beta_params(p, a, b, "type2_beta");
  const double h = half_dim(p);
  const double log_norm = log_beta_p(p, a, b);
  MatrixDensity d;
  d.p = p;
  {
    std::ostringstream os;
    os << "type2_beta(p=" << p << ",a=" << a << ",b=" << b << ")";
    d.label = os.str();
  }
  d.in_support = [](const PDMatrix&) { return true; };
  d.log_pdf = [=](const PDMatrix& u) {
    return -log_norm + (a - h) * u.logdet() - (a + b) * logdet_i_plus(u);
  };
  d.log_m_transform = [=](double s) {
    if (!(a + s - h > 0.5 * (p - 1)) || !(b - s + h > 0.5 * (p - 1)))
      throw DomainError("type2_beta m-transform: s out of domain");
    return log_beta_p(p, a + s - h, b - s + h) - log_norm;
  };
  d.sample = [=](RngStream& rng) { return sample_type2_beta(p, a, b, rng); };
  return d;
}

MatrixDensity matrix_gamma(int p, double shape, const PDMatrix& b) {
  if (!(shape > 0.5 * (p - 1)))
    throw DomainError("matrix_gamma: shape must exceed (p-1)/2");
  if (b.dim() != p) throw DimensionMismatch("matrix_gamma: scale dimension mismatch");
  const double h = half_dim(p);
  const double log_norm = shape * b.logdet() - log_gamma_p(p, shape);
  const Eigen::MatrixXd bm = b.mat();
  MatrixDensity d;
  d.p = p;
  {
    std::ostringstream os;
    os << "matrix_gamma(p=" << p << ",shape=" << shape << ")";
    d.label = os.str();
  }
  d.in_support = [](const PDMatrix&) { return true; };
  d.log_pdf = [=](const PDMatrix& x) {
    return log_norm + (shape - h) * x.logdet() - (bm * x.mat()).trace();
  };
  d.log_m_transform = [=](double s) {
    if (!(shape + s - h > 0.5 * (p - 1)))
      throw DomainError("matrix_gamma m-transform: s out of domain");
    return log_gamma_p(p, shape + s - h) - log_gamma_p(p, shape) - (s - h) * b.logdet();
  };
  PDMatrix scale = b;
  d.sample = [p, shape, scale](RngStream& rng) {
    return sample_matrix_gamma(p, shape, scale, rng);
  };
  d.decay_rate = b.eigenvalues()(p - 1);  // smallest eigenvalue of the rate
  return d;
}

double PathwayParams::beta_shape1() const {
  return kind == PathwayKind::SecondKind ? gamma + half_dim(p) : gamma;
}

void PathwayParams::validate() const {
  if (p < 1) throw DomainError("PathwayParams: dimension must be positive");
  if (!(q < 1)) throw DomainError("PathwayParams: pathway parameter requires q < 1");
  if (!(eta > 0)) throw DomainError("PathwayParams: eta must be positive");
  if (has_matrix_scale()) {
    if (matrix_scale->dim() != p) throw DimensionMismatch("PathwayParams: scale dimension");
  } else if (!(a > 0)) {
    throw DomainError("PathwayParams: scale a must be positive");
  }
  if (!(beta_shape1() > 0.5 * (p - 1))) {
    throw DomainError(kind == PathwayKind::SecondKind
                          ? "PathwayParams: second kind requires gamma > -1"
                          : "PathwayParams: first kind requires gamma > (p-1)/2");
  }
}

namespace {

// log of the self-derived pathway normalizing constant (from the scaled
// type-1 beta representation; the printed constants are not transcribed).
double pathway_log_norm(const PathwayParams& pp) {
  const double h = half_dim(pp.p);
  const double log_bp = log_beta_p(pp.p, pp.beta_shape1(), pp.beta_shape2());
  const double gamma_power = pp.kind == PathwayKind::SecondKind
                                 ? pp.p * pp.gamma + 0.5 * pp.p * (pp.p + 1)
                                 : pp.p * pp.gamma;
  if (pp.has_matrix_scale()) {
    const double det_power = pp.kind == PathwayKind::SecondKind ? pp.gamma + h : pp.gamma;
    return gamma_power * std::log1p(-pp.q) + det_power * pp.matrix_scale->logdet() - log_bp;
  }
  return gamma_power * std::log(pp.a * (1 - pp.q)) - log_bp;
}

}  // namespace

MatrixDensity pathway_density(const PathwayParams& params) {
  params.validate();
  const PathwayParams pp = params;
  const int p = pp.p;
  const double h = half_dim(p);
  const double log_norm = pathway_log_norm(pp);
  const double det_exp = pp.kind == PathwayKind::SecondKind ? pp.gamma : pp.gamma - h;
  const double bt = pp.beta_tilde();
  const double c = (1 - pp.q) * pp.a;

  // Eigenvalues of the scaled argument (1-q) S^{1/2} X S^{1/2}.
  auto scaled_eigs = [pp, c](const PDMatrix& x) -> Eigen::VectorXd {
    if (!pp.has_matrix_scale()) return c * x.eigenvalues();
    const SymMatrix w = conjugate(x.sym(), pp.matrix_scale->sqrt_pd().mat());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((1 - pp.q) * w.mat(),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  };

  MatrixDensity d;
  d.p = p;
  {
    std::ostringstream os;
    os << "pathway(" << (pp.kind == PathwayKind::SecondKind ? "II" : "I") << ",p=" << p
       << ",gamma=" << pp.gamma << ",eta=" << pp.eta << ",q=" << pp.q;
    if (pp.has_matrix_scale())
      os << ",A)";
    else
      os << ",a=" << pp.a << ")";
    d.label = os.str();
  }
  d.in_support = [scaled_eigs](const PDMatrix& x) {
    const Eigen::VectorXd w = scaled_eigs(x);
    return w.minCoeff() > 0 && w.maxCoeff() < 1.0 - 1e-12;
  };
  d.log_pdf = [=](const PDMatrix& x) {
    const Eigen::VectorXd w = scaled_eigs(x);
    if (!(w.minCoeff() > 0) || !(w.maxCoeff() < 1.0 - 1e-12)) return kNegInf;
    double kernel = 0;
    for (int i = 0; i < p; ++i) kernel += std::log1p(-w(i));
    return log_norm + det_exp * x.logdet() + bt * kernel;
  };
  d.log_m_transform = [pp, p, h](double s) {
    const double w_shift =
        pp.has_matrix_scale()
            ? p * std::log1p(-pp.q) + pp.matrix_scale->logdet()
            : p * std::log(pp.a * (1 - pp.q));
    const double a1 = pp.beta_shape1();
    if (!(a1 + s - h > 0.5 * (p - 1)))
      throw DomainError("pathway m-transform: s out of domain");
    return log_beta_p(p, a1 + s - h, pp.beta_shape2()) - log_beta_p(p, a1, pp.beta_shape2()) -
           (s - h) * w_shift;
  };
  d.sample = [pp](RngStream& rng) { return sample_pathway(pp, rng); };
  return d;
}

MatrixDensity pathway_limit_density(int p, double gamma, double a_eta, PathwayKind kind) {
  if (!(a_eta > 0)) throw DomainError("pathway_limit_density: a*eta must be positive");
  const double shape = kind == PathwayKind::SecondKind ? gamma + half_dim(p) : gamma;
  if (!(shape > 0.5 * (p - 1)))
    throw DomainError("pathway_limit_density: gamma out of domain for this kind");
  Eigen::MatrixXd b = a_eta * Eigen::MatrixXd::Identity(p, p);
  MatrixDensity d = matrix_gamma(p, shape, PDMatrix(SymMatrix(b)));
  std::ostringstream os;
  os << "pathway_limit(" << (kind == PathwayKind::SecondKind ? "II" : "I") << ",p=" << p
     << ",gamma=" << gamma << ",a_eta=" << a_eta << ")";
  d.label = os.str();
  return d;
}

PDMatrix sample_pathway(const PathwayParams& params, RngStream& rng) {
  params.validate();
  const PDMatrix w =
      sample_type1_beta(params.p, params.beta_shape1(), params.beta_shape2(), rng);
  if (!params.has_matrix_scale()) {
    const double inv = 1.0 / (params.a * (1 - params.q));
    return PDMatrix(SymMatrix(inv * w.mat()));
  }
  const Eigen::MatrixXd r = params.matrix_scale->power_pd(-0.5).mat();
  return PDMatrix(SymMatrix((r * w.mat() * r) / (1 - params.q)));
}

HyperWeightedBeta hyper_weighted_beta(int p, double zeta, double alpha, const SymMatrix& a_matrix,
                                      const std::vector<double>& a_list,
                                      const std::vector<double>& b_list,
                                      std::shared_ptr<const ZonalTable> table, int kmax) {
  if (!(zeta > -1)) throw DomainError("hyper_weighted_beta: zeta must exceed -1");
  if (!(alpha > 0.5 * (p - 1)))
    throw DomainError("hyper_weighted_beta: alpha must exceed (p-1)/2");
  if (a_matrix.dim() != p) throw DimensionMismatch("hyper_weighted_beta: weight dimension");
  if (!table || table->kmax() < kmax)
    throw CapExceeded("hyper_weighted_beta: zonal table does not cover kmax");
  const double h = 0.5 * (p + 1);

  // Series weight at a point: rFs(a; b; A X) with symmetric argument
  // X^{1/2} A X^{1/2} (same eigenvalue multiset as A X).
  auto weight = [=](const PDMatrix& x) {
    const SymMatrix arg = conjugate(a_matrix, x.sqrt_pd().mat());
    return hypergeometric_matrix(a_list, b_list, arg, kmax, *table);
  };

  // Normalizing constant by term-wise beta integration of the series: a
  // (r+1)F(s+1) at the weight matrix itself.
  std::vector<double> ca = a_list, cb = b_list;
  ca.push_back(zeta + h);
  cb.push_back(zeta + alpha + h);
  const SeriesResult cf_series = hypergeometric_matrix(ca, cb, a_matrix, kmax, *table);
  if (!(cf_series.value > 0))
    throw DomainError("hyper_weighted_beta: normalizing series is not positive");
  const double log_cf = log_beta_p(p, zeta + h, alpha) + std::log(cf_series.value);

  // Probe the support for weight positivity and the rejection envelope.
  constexpr int kProbes = 1000;
  RngStream probe(0x5A17C0DEull, 0);
  double max_weight = 0;
  for (int i = 0; i < kProbes; ++i) {
    const PDMatrix x = sample_type1_beta(p, zeta + h, alpha, probe);
    const double w = weight(x).value;
    if (!(w > 0))
      throw DomainError("hyper_weighted_beta: series weight is not positive on the support");
    max_weight = std::max(max_weight, w);
  }
  const double envelope = 1.5 * max_weight;

  MatrixDensity d;
  d.p = p;
  {
    std::ostringstream os;
    os << "hyper_weighted_beta(p=" << p << ",zeta=" << zeta << ",alpha=" << alpha
       << ",r=" << a_list.size() << ",s=" << b_list.size() << ")";
    d.label = os.str();
  }
  d.in_support = [](const PDMatrix& x) { return inside_unit_interval(x); };
  d.log_pdf = [=](const PDMatrix& x) {
    if (!inside_unit_interval(x)) return kNegInf;
    const double w = weight(x).value;
    if (!(w > 0))
      throw DomainError("hyper_weighted_beta: series weight went nonpositive at evaluation");
    return std::log(w) + zeta * x.logdet() + (alpha - h) * logdet_i_minus(x) - log_cf;
  };
  d.sample = [=](RngStream& rng) {
    for (long long trial = 0; trial < 10'000'000; ++trial) {
      const PDMatrix x = sample_type1_beta(p, zeta + h, alpha, rng);
      const double w = weight(x).value;
      if (w > envelope)
        throw EnvelopeError("hyper_weighted_beta: rejection envelope violated");
      if (rng.uniform() * envelope < w) return x;
    }
    throw EnvelopeError("hyper_weighted_beta: rejection budget exhausted");
  };

  HyperWeightedBeta out;
  out.density = std::move(d);
  out.log_c_f = log_cf;
  out.c_f_tail = cf_series.last_term_magnitude;
  out.envelope_log = std::log(envelope);
  return out;
}

}  // namespace conefrac
