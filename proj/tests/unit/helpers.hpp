#pragma once

#include <cmath>
#include <random>

#include <Eigen/QR>

#include "ctfconn/factorization.hpp"
#include "ctfconn/random.hpp"

namespace testutil {

using namespace ctfconn;

inline RealMatrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  RealMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = n(rng);
  return out;
}

inline ComplexMatrix complex_gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) {
      const double re = n(rng);
      out(i, j) = cplx(re, n(rng));
    }
  return out;
}

inline ComplexMatrix random_orthonormal(Index rows, Index cols, Rng& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(complex_gaussian(rows, cols, rng));
  return qr.householderQ() * ComplexMatrix::Identity(rows, cols);
}

inline ComplexTensor random_tensor(TensorDims dims, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexTensor x(dims);
  for (auto& v : x.data()) {
    const double re = n(rng);
    v = cplx(re, n(rng));
  }
  return x;
}

inline ParafacModel random_parafac(Index m, Index f, Index k, Index r, Rng& rng) {
  return {gaussian(m, r, rng), complex_gaussian(f, r, rng), complex_gaussian(k, r, rng)};
}

inline Parafac2Model random_parafac2(Index m, Index f, Index k, Index r, Rng& rng) {
  Parafac2Model model{gaussian(m, r, rng), complex_gaussian(f, r, rng), complex_gaussian(r, r, rng), {}};
  for (Index q = 0; q < f; ++q) model.Q.push_back(random_orthonormal(k, r, rng));
  return model;
}

inline double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }
inline double max_abs(const RealMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double tensor_distance(const ComplexTensor& a, const ComplexTensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) acc += std::norm(a.data()[i] - b.data()[i]);
  return std::sqrt(acc);
}

inline bool monotone(const FitReport& r, double slack = 1e-9) {
  double prev = r.initial_loss;
  for (double l : r.loss) {
    if (l > prev + slack * r.initial_loss) return false;
    prev = l;
  }
  return true;
}

}  // namespace testutil
