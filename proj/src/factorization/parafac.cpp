#include <algorithm>
#include <cmath>

#include "als_common.hpp"
#include "ctfconn/errors.hpp"
#include "ctfconn/linalg.hpp"

namespace ctfconn {

ParafacAls::ParafacAls(const ComplexTensor& x, Index rank) : x_(&x), rank_(rank), split_(x) {
  validate_rank(x.dims(), rank);
  x_norm2_ = x.squared_norm();
  slab_norm2_ = detail::slab_norms2(x);
  spatial_start_ = detail::spatial_warm_start(split_, rank);
}

// sum_f ||X(f)||^2 - 2 Re <A D_f Y^T, X(f)> + ||A D_f Y^T||^2, from A^T X only.
double ParafacAls::expanded_loss() const {
  const Index n_freq = x_->frequencies(), n_trials = x_->trials();
  const ComplexMatrix g = (a_.transpose() * a_).cast<cplx>().cwiseProduct(y_.adjoint() * y_);
  const ComplexMatrix y_conj_t = y_.transpose().conjugate();
  double total = 0.0;
  for (Index f = 0; f < n_freq; ++f) {
    const ComplexVector b = t_.middleCols(f * n_trials, n_trials).cwiseProduct(y_conj_t).rowwise().sum();
    const ComplexVector d = p_.row(f).transpose();
    total += slab_norm2_[static_cast<std::size_t>(f)] - 2.0 * d.dot(b).real() + d.dot(g * d).real();
  }
  return std::max(0.0, total);
}

void ParafacAls::initialize(std::uint64_t seed) {
  converged_ = false;
  iterations_ = 0;
  const Index m = x_->channels(), n_freq = x_->frequencies(), n_trials = x_->trials();
  if (x_norm2_ == 0.0) {
    a_ = RealMatrix::Zero(m, rank_);
    p_ = ComplexMatrix::Zero(n_freq, rank_);
    y_ = ComplexMatrix::Zero(n_trials, rank_);
    t_ = ComplexMatrix::Zero(rank_, n_trials * n_freq);
    loss_ = 0.0;
    converged_ = true;
    return;
  }
  Rng rng(seed);
  a_ = spatial_start_;
  p_ = detail::random_profiles(slab_norm2_, rank_, rng);
  y_ = detail::complex_gaussian(n_trials, rank_, 1.0 / std::sqrt(static_cast<double>(n_trials)), rng);
  t_ = split_.project(a_);
  loss_ = expanded_loss();
}

void ParafacAls::iterate(int n, double tol, FitReport& report) {
  const Index n_freq = x_->frequencies(), n_trials = x_->trials();
  for (int step = 0; step < n && !converged_; ++step) {
    // A: real least squares through its normal equations,
    // A Re(sum_f B_f B_f^H) = Re(sum_f X(f) B_f^H) with B_f = D_f Y^T.
    {
      const RealMatrix gram = (y_.transpose() * y_.conjugate()).cwiseProduct(p_.transpose() * p_.conjugate()).real();
      ComplexMatrix b_adj(n_trials * n_freq, rank_);
      const ComplexMatrix y_conj = y_.conjugate();
      for (Index f = 0; f < n_freq; ++f) {
        b_adj.middleRows(f * n_trials, n_trials) = y_conj * p_.row(f).conjugate().transpose().asDiagonal();
      }
      a_ = solve_gram_right(split_.real_product(b_adj), gram);
    }
    t_ = split_.project(a_);
    const ComplexMatrix gram_a = (a_.transpose() * a_).cast<cplx>();

    // P: one R x R normal system shared by every frequency.
    {
      const ComplexMatrix g = gram_a.cwiseProduct(y_.adjoint() * y_);
      const ComplexMatrix y_conj_t = y_.transpose().conjugate();
      ComplexMatrix rhs(n_freq, rank_);
      for (Index f = 0; f < n_freq; ++f) {
        rhs.row(f) = t_.middleCols(f * n_trials, n_trials).cwiseProduct(y_conj_t).rowwise().sum().transpose();
      }
      p_ = solve_gram_right(rhs, ComplexMatrix(g.transpose()));
    }

    // Y: sum_f X(f)^T A conj(D_f) against (A^T A) o (P^T conj(P)).
    {
      const ComplexMatrix g = gram_a.cwiseProduct(p_.transpose() * p_.conjugate());
      ComplexMatrix rhs = ComplexMatrix::Zero(n_trials, rank_);
      for (Index f = 0; f < n_freq; ++f) {
        rhs.noalias() +=
            t_.middleCols(f * n_trials, n_trials).transpose() * p_.row(f).conjugate().transpose().asDiagonal();
      }
      y_ = solve_gram_right(rhs, g);
    }

    const double previous = loss_;
    loss_ = expanded_loss();
    ++iterations_;
    report.loss.push_back(loss_);
    if (!std::isfinite(loss_) || !a_.allFinite() || !p_.allFinite() || !y_.allFinite()) {
      throw NumericalFailure("PARAFAC ALS produced non-finite values", iterations_);
    }
    converged_ = detail::has_converged(previous, loss_, tol, x_norm2_);
  }
  report.iterations = iterations_;
  report.converged = converged_;
}

ParafacModel ParafacAls::model() const {
  ParafacModel m{a_, p_, y_};
  normalize(m);
  return m;
}

Fit<ParafacModel> fit_parafac(const ComplexTensor& x, Index rank, const FitOptions& opts) {
  if (opts.n_starts < 1) throw InvalidInput("n_starts must be at least 1");
  detail::Stopwatch clock;
  ParafacAls als(x, rank);
  Fit<ParafacModel> best;
  double best_loss = 0.0;
  for (int s = 0; s < opts.n_starts; ++s) {
    als.initialize(detail::start_seed(opts.seed, s));
    FitReport report;
    report.initial_loss = als.loss();
    als.iterate(opts.max_iters, opts.tol, report);
    if (s == 0 || als.loss() < best_loss) {
      best_loss = als.loss();
      best.model = als.model();
      best.report = std::move(report);
    }
  }
  best.report.explained_variance = explained_variance(x, best.model);
  best.report.wall_time_s = clock.seconds();
  return best;
}

}  // namespace ctfconn
