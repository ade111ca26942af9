#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "als_common.hpp"
#include "ctfconn/errors.hpp"
#include "ctfconn/linalg.hpp"

namespace ctfconn {

namespace {

// Q(f) = polar factor of X(f)^H A D_f H, with A^T X given as t (R x K*F).
std::vector<ComplexMatrix> procrustes_from_projection(const ComplexMatrix& t, const ComplexMatrix& p,
                                                      const ComplexMatrix& h, Index n_trials) {
  std::vector<ComplexMatrix> q(static_cast<std::size_t>(p.rows()));
  for (Index f = 0; f < p.rows(); ++f) {
    const ComplexMatrix dh = p.row(f).transpose().asDiagonal() * h;
    q[static_cast<std::size_t>(f)] = procrustes(t.middleCols(f * n_trials, n_trials).adjoint() * dh);
  }
  return q;
}

}  // namespace

std::vector<ComplexMatrix> procrustes_update(const ComplexTensor& x, const RealMatrix& a, const ComplexMatrix& p,
                                             const ComplexMatrix& h) {
  if (a.rows() != x.channels() || p.rows() != x.frequencies() || a.cols() != p.cols() || h.rows() != a.cols() ||
      h.cols() != a.cols()) {
    throw InvalidInput("procrustes_update: factor shapes do not match the tensor");
  }
  return procrustes_from_projection(SplitTensor(x).project(a), p, h, x.trials());
}

Parafac2Als::Parafac2Als(const ComplexTensor& x, Index rank) : x_(&x), rank_(rank), split_(x) {
  validate_rank(x.dims(), rank);
  x_norm2_ = x.squared_norm();
  slab_norm2_ = detail::slab_norms2(x);
  spatial_start_ = detail::spatial_warm_start(split_, rank);
}

void Parafac2Als::update_q() {
  const Index n_trials = x_->trials();
  q_ = procrustes_from_projection(t_, p_, h_, n_trials);
  at_z_.resize(q_.size());
  for (Index f = 0; f < x_->frequencies(); ++f) {
    const auto fi = static_cast<std::size_t>(f);
    at_z_[fi].noalias() = t_.middleCols(f * n_trials, n_trials) * q_[fi];
  }
}

// ||X(f) - A D_f H Q(f)^H||^2 = ||X(f)||^2 - 2 Re <D_f H, A^T X(f) Q(f)> + ||A D_f H||^2.
double Parafac2Als::projected_loss() const {
  const ComplexMatrix gram_a = (a_.transpose() * a_).cast<cplx>();
  double total = 0.0;
  for (Index f = 0; f < x_->frequencies(); ++f) {
    const auto fi = static_cast<std::size_t>(f);
    const ComplexMatrix dh = p_.row(f).transpose().asDiagonal() * h_;
    const double cross = (dh.conjugate().cwiseProduct(at_z_[fi])).sum().real();
    const double model = (dh.adjoint() * gram_a * dh).trace().real();
    total += slab_norm2_[fi] - 2.0 * cross + model;
  }
  return std::max(0.0, total);
}

void Parafac2Als::start_from_factors() {
  const Index m = x_->channels(), n_freq = x_->frequencies(), n_trials = x_->trials();
  if (x_norm2_ == 0.0) {
    a_ = RealMatrix::Zero(m, rank_);
    p_ = ComplexMatrix::Zero(n_freq, rank_);
    h_ = ComplexMatrix::Zero(rank_, rank_);
    q_.assign(static_cast<std::size_t>(n_freq), ComplexMatrix::Identity(n_trials, rank_));
    t_ = ComplexMatrix::Zero(rank_, n_trials * n_freq);
    at_z_.assign(static_cast<std::size_t>(n_freq), ComplexMatrix::Zero(rank_, rank_));
    loss_ = 0.0;
    converged_ = true;
    return;
  }
  t_ = split_.project(a_);
  update_q();
  loss_ = projected_loss();
}

void Parafac2Als::initialize(std::uint64_t seed) {
  converged_ = false;
  iterations_ = 0;
  if (x_norm2_ > 0.0) {
    Rng rng(seed);
    a_ = spatial_start_;
    p_ = detail::random_profiles(slab_norm2_, rank_, rng);
    h_ = detail::complex_gaussian(rank_, rank_, 1.0 / std::sqrt(static_cast<double>(rank_)), rng);
  }
  start_from_factors();
}

void Parafac2Als::initialize(const ParafacModel& warm_start) {
  if (warm_start.A.rows() != x_->channels() || warm_start.P.rows() != x_->frequencies() ||
      warm_start.Y.rows() != x_->trials() || warm_start.rank() != rank_) {
    throw InvalidInput("PARAFAC warm start does not match the tensor and rank");
  }
  converged_ = false;
  iterations_ = 0;
  a_ = warm_start.A;
  p_ = warm_start.P;
  // conj(Y) = Q R gives Y^T = R^H Q^H, i.e. H = R^H.
  Eigen::HouseholderQR<ComplexMatrix> qr(warm_start.Y.conjugate());
  const ComplexMatrix r = qr.matrixQR().topRows(rank_).triangularView<Eigen::Upper>();
  h_ = r.adjoint();
  start_from_factors();
}

void Parafac2Als::iterate(int n, double tol, FitReport& report) {
  const Index n_freq = x_->frequencies(), n_trials = x_->trials();
  for (int step = 0; step < n && !converged_; ++step) {
    if (step > 0 || iterations_ > 0) update_q();

    // A: real least squares on the projected slabs X(f) Q(f) ~ A D_f H through
    // the normal equations A Re(sum_f B_f B_f^H) = Re(sum_f X(f) Q(f) B_f^H).
    {
      const RealMatrix gram = (h_ * h_.adjoint()).cwiseProduct(p_.transpose() * p_.conjugate()).real();
      ComplexMatrix b_adj(n_trials * n_freq, rank_);
      const ComplexMatrix h_adj = h_.adjoint();
      for (Index f = 0; f < n_freq; ++f) {
        b_adj.middleRows(f * n_trials, n_trials) =
            q_[static_cast<std::size_t>(f)] * (h_adj * p_.row(f).conjugate().transpose().asDiagonal());
      }
      a_ = solve_gram_right(split_.real_product(b_adj), gram);
    }
    t_ = split_.project(a_);
    for (Index f = 0; f < n_freq; ++f) {
      const auto fi = static_cast<std::size_t>(f);
      at_z_[fi].noalias() = t_.middleCols(f * n_trials, n_trials) * q_[fi];
    }
    const ComplexMatrix gram_a = (a_.transpose() * a_).cast<cplx>();

    // H: sum_f conj(D_f) A^T A D_f H = sum_f conj(D_f) A^T X(f) Q(f).
    {
      const ComplexMatrix g = gram_a.cwiseProduct(p_.adjoint() * p_);
      ComplexMatrix rhs = ComplexMatrix::Zero(rank_, rank_);
      for (Index f = 0; f < n_freq; ++f) {
        rhs.noalias() += p_.row(f).adjoint().asDiagonal() * at_z_[static_cast<std::size_t>(f)];
      }
      h_ = solve_gram_left(g, rhs);
    }

    // P: per-frequency normal system with Gram (A^T A) o (conj(H) H^T).
    {
      const ComplexMatrix g = gram_a.cwiseProduct(h_.conjugate() * h_.transpose());
      ComplexMatrix rhs(n_freq, rank_);
      for (Index f = 0; f < n_freq; ++f) {
        rhs.row(f) = (at_z_[static_cast<std::size_t>(f)] * h_.adjoint()).diagonal().transpose();
      }
      p_ = solve_gram_right(rhs, ComplexMatrix(g.transpose()));
    }

    const double previous = loss_;
    loss_ = projected_loss();
    ++iterations_;
    report.loss.push_back(loss_);
    if (!std::isfinite(loss_) || !a_.allFinite() || !p_.allFinite() || !h_.allFinite()) {
      throw NumericalFailure("PARAFAC2 ALS produced non-finite values", iterations_);
    }
    converged_ = detail::has_converged(previous, loss_, tol, x_norm2_);
  }
  report.iterations = iterations_;
  report.converged = converged_;
}

Parafac2Model Parafac2Als::model() const {
  Parafac2Model m{a_, p_, h_, q_};
  normalize(m);
  return m;
}

namespace {

template <typename Init>
Fit<Parafac2Model> run_starts(const ComplexTensor& x, Parafac2Als& als, const FitOptions& opts, Init&& init) {
  if (opts.n_starts < 1) throw InvalidInput("n_starts must be at least 1");
  detail::Stopwatch clock;
  Fit<Parafac2Model> best;
  double best_loss = 0.0;
  for (int s = 0; s < opts.n_starts; ++s) {
    init(s);
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

}  // namespace

Fit<Parafac2Model> fit_parafac2(const ComplexTensor& x, Index rank, const FitOptions& opts) {
  Parafac2Als als(x, rank);
  return run_starts(x, als, opts, [&](int s) { als.initialize(detail::start_seed(opts.seed, s)); });
}

Fit<Parafac2Model> fit_parafac2(const ComplexTensor& x, const ParafacModel& warm_start, const FitOptions& opts) {
  Parafac2Als als(x, warm_start.rank());
  FitOptions single = opts;
  single.n_starts = 1;
  return run_starts(x, als, single, [&](int) { als.initialize(warm_start); });
}

}  // namespace ctfconn
