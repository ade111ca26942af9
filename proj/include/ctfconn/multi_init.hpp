#pragma once

#include <vector>

#include "ctfconn/connectivity.hpp"
#include "ctfconn/factorization.hpp"

namespace ctfconn {

struct MultiInitOptions {
  int n_runs = 10;
  int n_inits = 10;
  int burn_in = 20;  // iterations per candidate start
  /// max_iters is the total budget of the refined candidate, burn-in included;
  /// fit.seed is the base seed and fit.n_starts is ignored.
  FitOptions fit;
  BinRange band{0, 0};  // bins over which component coupling is scored
};

struct MultiInitResult {
  AnyModel model;
  FitReport report;                 // of the selected run
  std::vector<double> run_coupling; // strongest-pair coupling per run, NaN where the run failed
  int selected_run = 0;
  ComponentPair pair;               // strongest pair of the selected model
};

/// Seed of candidate `init` in run `run`.
std::uint64_t candidate_seed(std::uint64_t base, int run, int n_inits, int init);

/// Per run, n_inits candidates are fitted for burn_in iterations; the lowest-loss
/// candidate is refined to convergence. The run whose strongest component pair
/// couples most within the band is returned (lowest run index on ties). Runs
/// that fail numerically are skipped with a warning; if all fail the last
/// error is rethrown.
MultiInitResult multi_init_fit(const ComplexTensor& x, Index rank, Algorithm algo, const MultiInitOptions& opts);

double explained_variance(const ComplexTensor& x, const AnyModel& model);

}  // namespace ctfconn
