#include "conefrac/sampling.hpp"

#include <cmath>
#include <thread>

#include "conefrac/errors.hpp"
#include "conefrac/special.hpp"

namespace conefrac {

void RunningStats::push(double x) {
  ++n;
  const double delta = x - mean;
  mean += delta / n;
  m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n == 0) return;
  if (n == 0) {
    *this = o;
    return;
  }
  const double delta = o.mean - mean;
  const long long total = n + o.n;
  mean += delta * static_cast<double>(o.n) / total;
  m2 += o.m2 + delta * delta * (static_cast<double>(n) / total) * o.n;
  n = total;
}

double RunningStats::se() const {
  return n > 1 ? std::sqrt(variance() / n) : 0.0;
}

McPlan McPlan::with_stream(std::uint64_t s) const {
  McPlan out = *this;
  out.stream = s;
  return out;
}

McPlan McPlan::with_n(long long m) const {
  McPlan out = *this;
  out.n = m;
  return out;
}

std::vector<RunningStats> mc_run(
    const McPlan& plan, int dims,
    const std::function<void(RngStream&, long long, std::vector<RunningStats>&)>& kernel) {
  if (plan.n < 1) throw DomainError("mc_run: sample count must be positive");
  const long long bs = std::max<long long>(plan.block_size, 1);
  const long long nblocks = (plan.n + bs - 1) / bs;
  std::vector<std::vector<RunningStats>> per_block(nblocks);
  const RngStream base = plan.base_stream();

  auto run_block = [&](long long b) {
    RngStream rng = base.substream(static_cast<std::uint64_t>(b));
    const long long count = std::min(bs, plan.n - b * bs);
    std::vector<RunningStats> stats(dims);
    kernel(rng, count, stats);
    per_block[b] = std::move(stats);
  };

  const int workers = std::max(plan.workers, 1);
  if (workers == 1 || nblocks == 1) {
    for (long long b = 0; b < nblocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        for (long long b = w; b < nblocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Merge in block order: the result is independent of the worker count.
  std::vector<RunningStats> out(dims);
  for (long long b = 0; b < nblocks; ++b)
    for (int d = 0; d < dims; ++d) out[d].merge(per_block[b][d]);
  return out;
}

PDMatrix sample_matrix_gamma(int p, double shape, const PDMatrix& b, RngStream& rng) {
  if (!(shape > 0.5 * (p - 1)))
    throw DomainError("sample_matrix_gamma: shape must exceed (p-1)/2");
  if (b.dim() != p) throw DimensionMismatch("sample_matrix_gamma: scale dimension mismatch");
  // Bartlett factor of the unit-rate law: A lower triangular, A_jj^2 ~
  // Gamma(shape-(j-1)/2), A_ij ~ N(0, 1/2); X = A A' then conjugated by
  // B^{-1/2}.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p, p);
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  for (int j = 0; j < p; ++j) {
    a(j, j) = std::sqrt(rng.gamma(shape - 0.5 * j));
    for (int i = j + 1; i < p; ++i) a(i, j) = rng.normal() * kInvSqrt2;
  }
  const Eigen::MatrixXd x = a * a.transpose();
  if (p == 1) return PDMatrix(SymMatrix(x / b.mat()(0, 0)));
  const Eigen::MatrixXd r = b.power_pd(-0.5).mat();
  return PDMatrix(SymMatrix(r * x * r));
}

PDMatrix sample_type1_beta(int p, double a, double b, RngStream& rng) {
  if (!(a > 0.5 * (p - 1)) || !(b > 0.5 * (p - 1)))
    throw DomainError("sample_type1_beta: parameters must exceed (p-1)/2");
  const PDMatrix id = PDMatrix::identity(p);
  const PDMatrix g1 = sample_matrix_gamma(p, a, id, rng);
  const PDMatrix g2 = sample_matrix_gamma(p, b, id, rng);
  const PDMatrix sum = PDMatrix(SymMatrix(g1.mat() + g2.mat()));
  const Eigen::MatrixXd r = sum.power_pd(-0.5).mat();
  return PDMatrix(SymMatrix(r * g1.mat() * r));
}

PDMatrix sample_type2_beta(int p, double a, double b, RngStream& rng) {
  if (!(a > 0.5 * (p - 1)) || !(b > 0.5 * (p - 1)))
    throw DomainError("sample_type2_beta: parameters must exceed (p-1)/2");
  const PDMatrix id = PDMatrix::identity(p);
  const PDMatrix g1 = sample_matrix_gamma(p, a, id, rng);
  const PDMatrix g2 = sample_matrix_gamma(p, b, id, rng);
  const Eigen::MatrixXd r = g2.power_pd(-0.5).mat();
  return PDMatrix(SymMatrix(r * g1.mat() * r));
}

PDMatrix sample_product(const MatrixSampler& f1, const MatrixSampler& f2, RngStream& rng) {
  const PDMatrix x1 = f1(rng);
  const PDMatrix x2 = f2(rng);
  return congruence(x1, x2);
}

PDMatrix sample_ratio(const MatrixSampler& f1, const MatrixSampler& f2, RngStream& rng) {
  const PDMatrix x1 = f1(rng);
  const PDMatrix x2 = f2(rng);
  return congruence(x1.inverse_pd(), x2);
}

EstimatorResult det_moment(const MatrixSampler& sampler, double h, const McPlan& plan) {
  return mc_expectation(
      sampler, [h](const PDMatrix& x) { return h == 0.0 ? 1.0 : std::exp(h * x.logdet()); },
      plan, "det_moment");
}

EstimatorResult mc_expectation(const MatrixSampler& sampler,
                               const std::function<double(const PDMatrix&)>& stat,
                               const McPlan& plan, const std::string& label) {
  auto stats = mc_run(plan, 1, [&](RngStream& rng, long long count, std::vector<RunningStats>& s) {
    for (long long i = 0; i < count; ++i) s[0].push(stat(sampler(rng)));
  });
  return EstimatorResult{stats[0].mean, stats[0].se(), stats[0].n, plan.seed, label};
}

}  // namespace conefrac
