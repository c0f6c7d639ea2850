#pragma once

#include <map>
#include <string>
#include <vector>

#include "conefrac/mtransform.hpp"

namespace conefrac {

// A named verification suite run: fixed case grids, caller-controlled sample
// budget and seed.  For nested (outer x inner) Monte Carlo suites, n is the
// outer sample count.
struct SuiteRequest {
  std::string name;
  long long n = 4000;
  std::uint64_t seed = 1;
  int workers = 1;
  std::map<std::string, double> params;
};

std::vector<std::string> known_suites();
VerificationReport run_suite(const SuiteRequest& req);

// q -> 1 convergence tables (deterministic: kernels, constants, and the p=1
// quadrature path of the pathway operators).
struct ConvergenceRow {
  int m = 0;              // q = 1 - 2^{-m}
  double q = 0;
  double value = 0;
  double limit_value = 0;
  double abs_error = 0;
  double ratio_vs_prev = 0;  // 0 on the first row
};

struct ConvergenceTable {
  std::string label;
  std::vector<ConvergenceRow> rows;
};

std::vector<ConvergenceTable> run_pathway_study(int m_min, int m_max,
                                                const std::map<std::string, double>& params = {});
std::string pathway_study_csv(const std::vector<ConvergenceTable>& tables);

// CSV helpers for the plain CLI subcommands.
std::string gamma_grid_csv(const std::vector<int>& dims, const std::vector<double>& alphas);
std::string zonal_table_csv(int kmax, int max_parts);

}  // namespace conefrac
