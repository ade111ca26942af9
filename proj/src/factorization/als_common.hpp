#pragma once

#include <chrono>
#include <cmath>

#include "ctfconn/factorization.hpp"
#include "ctfconn/random.hpp"

namespace ctfconn::detail {

/// Spatial warm start: leading left singular vectors of [Re X_(1), Im X_(1)],
/// a real basis of the dominant channel subspace.
RealMatrix spatial_warm_start(const SplitTensor& x, Index rank);

/// Circular complex Gaussian matrix with the given per-entry standard deviation.
ComplexMatrix complex_gaussian(Index rows, Index cols, double sd, Rng& rng);

/// Frequency profiles scaled so each modelled slab starts near ||X(f)||.
ComplexMatrix random_profiles(const std::vector<double>& slab_norm2, Index rank, Rng& rng);

std::vector<double> slab_norms2(const ComplexTensor& x);

/// Relative-change stopping rule shared by both engines.
inline bool has_converged(double previous, double current, double tol, double data_norm2) {
  if (previous <= 0.0 || current <= 1e-13 * data_norm2) return true;
  return (previous - current) / previous < tol;
}

/// Seed of start s under FitOptions::n_starts.
std::uint64_t start_seed(std::uint64_t seed, int start);

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace ctfconn::detail
