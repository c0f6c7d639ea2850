#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conefrac/pdcore.hpp"
#include "conefrac/sampling.hpp"
#include "conefrac/zonal.hpp"

namespace conefrac {

// Catalog entry: log-density evaluator + support predicate, optionally a
// closed-form M-transform, an exact sampler and an exponential decay-rate
// hint for importance proposals.  Immutable evaluator object.
struct MatrixDensity {
  int p = 1;
  std::string label;
  std::function<double(const PDMatrix&)> log_pdf;   // -inf exactly off support
  std::function<bool(const PDMatrix&)> in_support;
  // log M(s) = log integral |X|^{s-(p+1)/2} f(X) dX; empty when no closed form.
  std::function<double(double)> log_m_transform;
  MatrixSampler sample;                             // empty when no sampler
  double decay_rate = 0;  // b > 0 when f(X) ~ e^{-b tr X} at infinity

  bool has_m_transform() const { return static_cast<bool>(log_m_transform); }
  bool has_sampler() const { return static_cast<bool>(sample); }
};

enum class PathwayKind { FirstKind, SecondKind };

// Pathway family |X|^(gamma or gamma-(p+1)/2) |I - (1-q) S^{1/2} X S^{1/2}|^{eta/(1-q)}
// with scalar scale S = aI or matrix scale S = A; q < 1.
struct PathwayParams {
  int p = 1;
  PathwayKind kind = PathwayKind::SecondKind;
  double gamma = 1;
  double eta = 1;
  double q = 0;
  double a = 1;
  std::optional<PDMatrix> matrix_scale;  // replaces a when present

  double beta_tilde() const { return eta / (1 - q); }
  bool has_matrix_scale() const { return matrix_scale.has_value(); }
  // Shape parameters of the equivalent type-1 beta law of W = (1-q) S^{1/2} X S^{1/2}.
  double beta_shape1() const;
  double beta_shape2() const { return beta_tilde() + (p + 1) * 0.5; }
  void validate() const;  // throws DomainError
};

MatrixDensity type1_beta(int p, double a, double b);
MatrixDensity type2_beta(int p, double a, double b);
MatrixDensity matrix_gamma(int p, double shape, const PDMatrix& b);

// Pathway density with self-derived normalizing constant (computed from the
// scaled type-1 beta representation, never transcribed).
MatrixDensity pathway_density(const PathwayParams& params);

// q -> 1 limit kernel: matrix-gamma form |X|^{...} e^{-a_eta tr X}.
MatrixDensity pathway_limit_density(int p, double gamma, double a_eta, PathwayKind kind);

// Draw from pathway_density(params) through the scaled-beta reduction.
PDMatrix sample_pathway(const PathwayParams& params, RngStream& rng);

// Hypergeometric-weighted type-1 beta
//   f(X) = (1/c_f) rFs(a; b; A X) |X|^zeta |I - X|^{alpha-(p+1)/2}
// with c_f = B_p(zeta+(p+1)/2, alpha) *
//            (r+1)F(s+1)(a, zeta+(p+1)/2; b, zeta+alpha+(p+1)/2; A)
// truncated at the table's cap.  The constructor probes the support and
// rejects parameterizations with a negative weight; the sampler is rejection
// against the plain type-1 beta with a probed envelope.
struct HyperWeightedBeta {
  MatrixDensity density;
  double log_c_f = 0;
  double c_f_tail = 0;        // magnitude of the last series degree in c_f
  double envelope_log = 0;    // log of the rejection envelope constant
};

HyperWeightedBeta hyper_weighted_beta(int p, double zeta, double alpha, const SymMatrix& a_matrix,
                                      const std::vector<double>& a_list,
                                      const std::vector<double>& b_list,
                                      std::shared_ptr<const ZonalTable> table, int kmax);

}  // namespace conefrac
