#include <algorithm>
#include <cmath>
#include <string>

#include "ctfconn/errors.hpp"
#include "ctfconn/factorization.hpp"
#include "ctfconn/log.hpp"

namespace ctfconn {

namespace {

// Index of the largest-magnitude entry (first on ties).
template <typename Vec>
Index argmax_abs(const Vec& v) {
  Index best = 0;
  double best_abs = -1.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

template <typename Model>
double reconstruction_energy(const Model& model, Index n_freq) {
  double acc = 0.0;
  for (Index f = 0; f < n_freq; ++f) acc += reconstruct_slab(model, f).squaredNorm();
  return acc;
}

template <typename Model>
double error_of(const ComplexTensor& x, const Model& model) {
  if (model.P.rows() != x.frequencies() || model.A.rows() != x.channels()) {
    throw InvalidInput("model dimensions do not match the tensor");
  }
  double acc = 0.0;
  for (Index f = 0; f < x.frequencies(); ++f) acc += (x.slab(f) - reconstruct_slab(model, f)).squaredNorm();
  return acc;
}

template <typename Model>
double ev_of(const ComplexTensor& x, const Model& model) {
  if (model.P.rows() != x.frequencies() || model.A.rows() != x.channels()) {
    throw InvalidInput("model dimensions do not match the tensor");
  }
  const double denom = x.squared_norm();
  if (denom == 0.0) return 0.0;
  return reconstruction_energy(model, x.frequencies()) / denom;
}

// Moves unit-norm scaling and sign of A's columns into P.
void normalize_spatial(RealMatrix& a, ComplexMatrix& p) {
  for (Index r = 0; r < a.cols(); ++r) {
    const double n = a.col(r).norm();
    if (n == 0.0) continue;
    double scale = n;
    if (a(argmax_abs(a.col(r)), r) < 0.0) scale = -n;
    a.col(r) /= scale;
    p.col(r) *= scale;
  }
}

}  // namespace

void validate_rank(const TensorDims& dims, Index rank) {
  const Index limit = std::min({dims.channels, dims.frequencies, dims.trials});
  if (rank < 1 || rank > limit) {
    throw InvalidInput("rank " + std::to_string(rank) + " outside [1, min(m, F, K) = " + std::to_string(limit) + "]");
  }
  if (rank > kRecommendedMaxRank) {
    warn("rank " + std::to_string(rank) + " exceeds the recommended maximum of " +
         std::to_string(kRecommendedMaxRank) + "; components may not be unique");
  }
}

ComplexMatrix reconstruct_slab(const ParafacModel& model, Index f) {
  ComplexMatrix ad = model.A.cast<cplx>() * model.P.row(f).transpose().asDiagonal();
  return ad * model.Y.transpose();
}

ComplexMatrix reconstruct_slab(const Parafac2Model& model, Index f) {
  ComplexMatrix ad = model.A.cast<cplx>() * model.P.row(f).transpose().asDiagonal();
  return (ad * model.H) * model.Q[static_cast<std::size_t>(f)].adjoint();
}

ComplexTensor reconstruct(const ParafacModel& model) {
  ComplexTensor out(TensorDims{model.A.rows(), model.P.rows(), model.Y.rows()});
  for (Index f = 0; f < model.P.rows(); ++f) out.slab(f) = reconstruct_slab(model, f);
  return out;
}

ComplexTensor reconstruct(const Parafac2Model& model) {
  if (model.Q.empty()) throw InvalidInput("PARAFAC2 model has no Q factors");
  ComplexTensor out(TensorDims{model.A.rows(), model.P.rows(), model.Q.front().rows()});
  for (Index f = 0; f < model.P.rows(); ++f) out.slab(f) = reconstruct_slab(model, f);
  return out;
}

double squared_error(const ComplexTensor& x, const ParafacModel& model) { return error_of(x, model); }
double squared_error(const ComplexTensor& x, const Parafac2Model& model) { return error_of(x, model); }
double explained_variance(const ComplexTensor& x, const ParafacModel& model) { return ev_of(x, model); }
double explained_variance(const ComplexTensor& x, const Parafac2Model& model) { return ev_of(x, model); }

void normalize(ParafacModel& model) {
  normalize_spatial(model.A, model.P);
  for (Index r = 0; r < model.Y.cols(); ++r) {
    const double n = model.Y.col(r).norm();
    if (n == 0.0) continue;
    const cplx lead = model.Y(argmax_abs(model.Y.col(r)), r);
    const cplx scale = n * lead / std::abs(lead);
    model.Y.col(r) /= scale;
    model.P.col(r) *= scale;
  }
}

void normalize(Parafac2Model& model) {
  normalize_spatial(model.A, model.P);
  for (Index r = 0; r < model.H.rows(); ++r) {
    const double n = model.H.row(r).norm();
    if (n == 0.0) continue;
    const cplx lead = model.H(r, argmax_abs(model.H.row(r).transpose()));
    const cplx scale = n * lead / std::abs(lead);
    model.H.row(r) /= scale;
    model.P.col(r) *= scale;
  }
}

double cross_product_deviation(const Parafac2Model& model) {
  const ComplexMatrix hh = model.H * model.H.adjoint();
  const double ref = hh.norm();
  double worst = 0.0;
  for (Index f = 0; f < static_cast<Index>(model.Q.size()); ++f) {
    const ComplexMatrix y = model.trial_factors(f);
    const double dev = (y * y.adjoint() - hh).norm();
    worst = std::max(worst, ref > 0.0 ? dev / ref : dev);
  }
  return worst;
}

double tucker_congruence(const RealVector& a, const RealVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::min(1.0, std::abs(a.dot(b)) / (na * nb));
}

double Alignment::mean() const {
  if (congruence.empty()) return 0.0;
  double s = 0.0;
  for (double c : congruence) s += c;
  return s / static_cast<double>(congruence.size());
}

Alignment align_components(const RealMatrix& estimated, const RealMatrix& truth) {
  if (estimated.rows() != truth.rows()) throw InvalidInput("align_components: row mismatch");
  if (estimated.cols() < truth.cols()) throw InvalidInput("align_components: fewer estimated than true components");
  const Index rt = truth.cols(), re = estimated.cols();
  RealMatrix c(rt, re);
  for (Index t = 0; t < rt; ++t)
    for (Index e = 0; e < re; ++e) c(t, e) = tucker_congruence(truth.col(t), estimated.col(e));

  Alignment out;
  out.match.assign(static_cast<std::size_t>(rt), -1);
  out.congruence.assign(static_cast<std::size_t>(rt), 0.0);
  std::vector<bool> used_t(static_cast<std::size_t>(rt), false), used_e(static_cast<std::size_t>(re), false);
  for (Index step = 0; step < rt; ++step) {
    Index bt = -1, be = -1;
    double best = -1.0;
    for (Index t = 0; t < rt; ++t) {
      if (used_t[static_cast<std::size_t>(t)]) continue;
      for (Index e = 0; e < re; ++e) {
        if (used_e[static_cast<std::size_t>(e)]) continue;
        if (c(t, e) > best) {
          best = c(t, e);
          bt = t;
          be = e;
        }
      }
    }
    used_t[static_cast<std::size_t>(bt)] = true;
    used_e[static_cast<std::size_t>(be)] = true;
    out.match[static_cast<std::size_t>(bt)] = be;
    out.congruence[static_cast<std::size_t>(bt)] = best;
  }
  return out;
}

const char* to_string(Algorithm algo) { return algo == Algorithm::parafac ? "parafac" : "parafac2"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "parafac") return Algorithm::parafac;
  if (name == "parafac2") return Algorithm::parafac2;
  throw InvalidInput("unknown algorithm '" + name + "' (expected parafac or parafac2)");
}

}  // namespace ctfconn
