#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ctfconn/tensor.hpp"

namespace ctfconn {

/// Default upper bound on the number of components; larger ranks are allowed
/// but logged as a warning.
inline constexpr Index kRecommendedMaxRank = 8;

struct FitOptions {
  int max_iters = 500;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Independent random starts; the lowest final loss wins (first on ties).
  /// Start 0 uses seed itself, start s > 0 uses child_seed(seed, s).
  int n_starts = 1;
};

struct FitReport {
  double initial_loss = 0.0;
  std::vector<double> loss;  // squared error after each iteration
  int iterations = 0;
  bool converged = false;
  double explained_variance = 0.0;
  double wall_time_s = 0.0;
};

/// X(f) = A diag(P(f,:)) Y^T with a real spatial factor.
struct ParafacModel {
  RealMatrix A;     // m x R, unit-norm columns
  ComplexMatrix P;  // F x R
  ComplexMatrix Y;  // K x R, unit-norm columns

  Index rank() const { return A.cols(); }
  /// R x K trial activations, identical for every frequency.
  ComplexMatrix trial_factors(Index /*f*/) const { return Y.transpose(); }
};

/// X(f) = A diag(P(f,:)) H Q(f)^H with orthonormal Q(f), so the per-frequency
/// trial factors Y(f) = H Q(f)^H share the cross-product Y(f) Y(f)^H = H H^H.
struct Parafac2Model {
  RealMatrix A;                  // m x R, unit-norm columns
  ComplexMatrix P;               // F x R
  ComplexMatrix H;               // R x R, unit-norm rows
  std::vector<ComplexMatrix> Q;  // F entries, K x R

  Index rank() const { return A.cols(); }
  ComplexMatrix trial_factors(Index f) const { return H * Q[static_cast<std::size_t>(f)].adjoint(); }
};

template <typename Model>
struct Fit {
  Model model;
  FitReport report;
};

/// Rank check shared by both algorithms: 1 <= R <= min(m, F, K).
void validate_rank(const TensorDims& dims, Index rank);

/// Complex PARAFAC by ALS, cycling A (real-constrained), P and Y.
Fit<ParafacModel> fit_parafac(const ComplexTensor& x, Index rank, const FitOptions& opts = {});

/// Complex PARAFAC2 by direct fitting: per-frequency Procrustes update of Q(f)
/// followed by one PARAFAC sweep (A real, H, P) on the projected slabs X(f) Q(f).
Fit<Parafac2Model> fit_parafac2(const ComplexTensor& x, Index rank, const FitOptions& opts = {});

/// PARAFAC2 started from a PARAFAC solution (Y = conj(Q H^H) via thin QR).
Fit<Parafac2Model> fit_parafac2(const ComplexTensor& x, const ParafacModel& warm_start, const FitOptions& opts = {});

/// The tensor's real and imaginary parts as m x (K*F) matrices; slab f
/// occupies columns [f*K, (f+1)*K). Both engines work on this split so that
/// every large product is a real matrix product.
struct SplitTensor {
  explicit SplitTensor(const ComplexTensor& x);

  /// A^T X for a real A, as R x (K*F).
  ComplexMatrix project(const RealMatrix& a) const;
  /// Re(X G) = sum_f Re(X(f) G_f) for G stacked as (K*F) x R.
  RealMatrix real_product(const ComplexMatrix& g) const;

  RealMatrix re, im;
  Index channels, frequencies, trials;
};

/// Resumable ALS engines; the tensor must outlive the engine.
/// fit_parafac / fit_parafac2 are initialise + iterate + model.
class ParafacAls {
 public:
  ParafacAls(const ComplexTensor& x, Index rank);

  void initialize(std::uint64_t seed);
  /// Runs up to n iterations, stopping once the relative loss change drops below tol.
  void iterate(int n, double tol, FitReport& report);

  double loss() const { return loss_; }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }
  ParafacModel model() const;  // normalised copy

 private:
  double expanded_loss() const;

  const ComplexTensor* x_;
  Index rank_;
  SplitTensor split_;
  double x_norm2_ = 0.0;
  std::vector<double> slab_norm2_;
  RealMatrix spatial_start_;
  RealMatrix a_;
  ComplexMatrix p_, y_;
  ComplexMatrix t_;  // A^T X for the current A
  double loss_ = 0.0;
  bool converged_ = false;
  int iterations_ = 0;
};

class Parafac2Als {
 public:
  Parafac2Als(const ComplexTensor& x, Index rank);

  void initialize(std::uint64_t seed);
  void initialize(const ParafacModel& warm_start);
  void iterate(int n, double tol, FitReport& report);

  double loss() const { return loss_; }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }
  Parafac2Model model() const;

 private:
  void start_from_factors();
  void update_q();
  double projected_loss() const;

  const ComplexTensor* x_;
  Index rank_;
  SplitTensor split_;
  double x_norm2_ = 0.0;
  std::vector<double> slab_norm2_;
  RealMatrix spatial_start_;
  RealMatrix a_;
  ComplexMatrix p_, h_;
  std::vector<ComplexMatrix> q_;
  ComplexMatrix t_;                    // A^T X for the current A
  std::vector<ComplexMatrix> at_z_;    // A^T X(f) Q(f)
  double loss_ = 0.0;
  bool converged_ = false;
  int iterations_ = 0;
};

/// One Procrustes step: Q(f) = U V^H from X(f)^H A D(f) H = U S V^H.
std::vector<ComplexMatrix> procrustes_update(const ComplexTensor& x, const RealMatrix& a, const ComplexMatrix& p,
                                             const ComplexMatrix& h);

ComplexMatrix reconstruct_slab(const ParafacModel& model, Index f);
ComplexMatrix reconstruct_slab(const Parafac2Model& model, Index f);
ComplexTensor reconstruct(const ParafacModel& model);
ComplexTensor reconstruct(const Parafac2Model& model);

/// sum_f ||X(f) - Xhat(f)||_F^2
double squared_error(const ComplexTensor& x, const ParafacModel& model);
double squared_error(const ComplexTensor& x, const Parafac2Model& model);

/// sum_f ||Xhat(f)||^2 / sum_f ||X(f)||^2; 0 for an all-zero X.
double explained_variance(const ComplexTensor& x, const ParafacModel& model);
double explained_variance(const ComplexTensor& x, const Parafac2Model& model);

/// Rescales factors without changing the reconstruction: unit-norm, sign-fixed
/// A columns; unit-norm trial factors; scale and phase moved into P.
void normalize(ParafacModel& model);
void normalize(Parafac2Model& model);

/// max_f ||Y(f) Y(f)^H - H H^H||_F / ||H H^H||_F
double cross_product_deviation(const Parafac2Model& model);

/// |<a, b>| / (||a|| ||b||); 0 when either vector is zero.
double tucker_congruence(const RealVector& a, const RealVector& b);

struct Alignment {
  std::vector<Index> match;        // match[r] = estimated column paired with truth column r
  std::vector<double> congruence;  // per truth column, in [0, 1]

  double mean() const;
};

/// Greedy matching on absolute Tucker congruence of spatial factors.
Alignment align_components(const RealMatrix& estimated, const RealMatrix& truth);

enum class Algorithm { parafac, parafac2 };

const char* to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);

using AnyModel = std::variant<ParafacModel, Parafac2Model>;

}  // namespace ctfconn
