#pragma once

#include <functional>
#include <string>
#include <vector>

#include "conefrac/pdcore.hpp"
#include "conefrac/rng.hpp"

namespace conefrac {

// Point estimate with standard error; the unit of every Monte Carlo output.
struct EstimatorResult {
  double estimate = 0;
  double std_error = 0;
  long long n = 0;
  std::uint64_t seed = 0;
  std::string label;
};

// Welford accumulator with exact (order-fixed) merging.
struct RunningStats {
  long long n = 0;
  double mean = 0;
  double m2 = 0;

  void push(double x);
  void merge(const RunningStats& o);
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double se() const;
};

// Execution plan for a Monte Carlo estimate.  Samples are partitioned into
// fixed-size blocks; block b always draws from stream substream(b) of the
// plan's base stream, so results are independent of the worker count.
struct McPlan {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  long long n = 100000;
  int workers = 1;
  long long block_size = 4096;

  RngStream base_stream() const { return RngStream(seed, stream); }
  McPlan with_stream(std::uint64_t s) const;
  McPlan with_n(long long m) const;
};

// Runs `kernel(stream, count, stats)` over the plan's blocks (possibly in
// worker threads) and merges the per-block accumulators in block order.
// `dims` independent statistics are accumulated side by side.
std::vector<RunningStats> mc_run(
    const McPlan& plan, int dims,
    const std::function<void(RngStream&, long long, std::vector<RunningStats>&)>& kernel);

using MatrixSampler = std::function<PDMatrix(RngStream&)>;

// Draw from the matrix-gamma density |B|^g/Gamma_p(g) |X|^{g-(p+1)/2} e^{-tr(BX)}
// via the Bartlett factorization, conjugated by B^{-1/2}.
PDMatrix sample_matrix_gamma(int p, double shape, const PDMatrix& b, RngStream& rng);

// Type-1 beta(a, b) on O < X < I via X = (G1+G2)^{-1/2} G1 (G1+G2)^{-1/2}.
PDMatrix sample_type1_beta(int p, double a, double b, RngStream& rng);

// Type-2 beta(a, b) on U > O via U = G2^{-1/2} G1 G2^{-1/2}.
PDMatrix sample_type2_beta(int p, double a, double b, RngStream& rng);

// Product U = X2^{1/2} X1 X2^{1/2} of independent draws.
PDMatrix sample_product(const MatrixSampler& f1, const MatrixSampler& f2, RngStream& rng);

// Ratio U = X2^{1/2} X1^{-1} X2^{1/2} of independent draws.
PDMatrix sample_ratio(const MatrixSampler& f1, const MatrixSampler& f2, RngStream& rng);

// Sample mean and SE of |X|^h under the given sampler.
EstimatorResult det_moment(const MatrixSampler& sampler, double h, const McPlan& plan);

// Same for a general per-draw statistic.
EstimatorResult mc_expectation(const MatrixSampler& sampler,
                               const std::function<double(const PDMatrix&)>& stat,
                               const McPlan& plan, const std::string& label);

}  // namespace conefrac
