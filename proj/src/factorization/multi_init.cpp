#include "ctfconn/multi_init.hpp"

#include <exception>
#include <limits>
#include <string>

#include "als_common.hpp"
#include "ctfconn/errors.hpp"
#include "ctfconn/log.hpp"

namespace ctfconn {

namespace {

struct RunOutcome {
  AnyModel model;
  FitReport report;
};

template <typename Engine>
RunOutcome run_once(Engine& engine, const MultiInitOptions& opts, int run) {
  int best_init = 0;
  double best_loss = 0.0;
  const int burn_in = std::min(opts.burn_in, opts.fit.max_iters);
  if (opts.n_inits > 1) {
    for (int init = 0; init < opts.n_inits; ++init) {
      engine.initialize(candidate_seed(opts.fit.seed, run, opts.n_inits, init));
      FitReport scratch;
      engine.iterate(burn_in, opts.fit.tol, scratch);
      if (init == 0 || engine.loss() < best_loss) {
        best_loss = engine.loss();
        best_init = init;
      }
    }
  }
  // Replaying the winner from its seed reproduces the burn-in exactly and keeps
  // its full loss trajectory.
  RunOutcome out;
  engine.initialize(candidate_seed(opts.fit.seed, run, opts.n_inits, best_init));
  out.report.initial_loss = engine.loss();
  engine.iterate(opts.fit.max_iters, opts.fit.tol, out.report);
  out.model = engine.model();
  return out;
}

template <typename Engine>
MultiInitResult select_run(const ComplexTensor& x, Index rank, const MultiInitOptions& opts) {
  detail::Stopwatch clock;
  Engine engine(x, rank);
  MultiInitResult result;
  result.run_coupling.assign(static_cast<std::size_t>(opts.n_runs), std::numeric_limits<double>::quiet_NaN());
  bool have = false;
  std::exception_ptr last_error;
  for (int run = 0; run < opts.n_runs; ++run) {
    RunOutcome outcome;
    try {
      outcome = run_once(engine, opts, run);
    } catch (const NumericalFailure& e) {
      warn("multi-init run " + std::to_string(run) + " skipped: " + e.what());
      last_error = std::current_exception();
      continue;
    }
    const ComponentPair pair = strongest_pair(component_signals(outcome.model), opts.band);
    result.run_coupling[static_cast<std::size_t>(run)] = pair.coupling;
    if (!have || pair.coupling > result.pair.coupling) {
      have = true;
      result.model = std::move(outcome.model);
      result.report = std::move(outcome.report);
      result.pair = pair;
      result.selected_run = run;
    }
  }
  if (!have) std::rethrow_exception(last_error);
  result.report.explained_variance = explained_variance(x, result.model);
  result.report.wall_time_s = clock.seconds();
  return result;
}

}  // namespace

std::uint64_t candidate_seed(std::uint64_t base, int run, int n_inits, int init) {
  return base + static_cast<std::uint64_t>(run) * static_cast<std::uint64_t>(n_inits) + static_cast<std::uint64_t>(init);
}

MultiInitResult multi_init_fit(const ComplexTensor& x, Index rank, Algorithm algo, const MultiInitOptions& opts) {
  if (opts.n_runs < 1 || opts.n_inits < 1) throw InvalidInput("multi-init needs at least one run and one init");
  if (opts.burn_in < 0 || opts.fit.max_iters < 0) throw InvalidInput("iteration counts must be nonnegative");
  if (rank < 2) throw InvalidInput("multi-init selection scores component pairs and needs R >= 2");
  if (opts.band.first < 0 || opts.band.last >= x.frequencies() || opts.band.first > opts.band.last) {
    throw InvalidInput("coupling band outside the tensor's frequency range");
  }
  return algo == Algorithm::parafac ? select_run<ParafacAls>(x, rank, opts) : select_run<Parafac2Als>(x, rank, opts);
}

double explained_variance(const ComplexTensor& x, const AnyModel& model) {
  return std::visit([&](const auto& m) { return explained_variance(x, m); }, model);
}

}  // namespace ctfconn
