#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ctfconn {

using cplx = std::complex<double>;
using Index = Eigen::Index;

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

struct TensorDims {
  Index channels = 0;     // m
  Index frequencies = 0;  // F
  Index trials = 0;       // K

  Index size() const { return channels * frequencies * trials; }
  friend bool operator==(const TensorDims&, const TensorDims&) = default;
};

/// Inclusive range [first, last] of frequency-bin indices.
struct BinRange {
  Index first = 0;
  Index last = 0;

  Index size() const { return last - first + 1; }
  friend bool operator==(const BinRange&, const BinRange&) = default;
};

/// Dense channels x frequencies x trials array of complex doubles.
///
/// Storage is frequency-major: slab f is a column-major m x K block, so
/// element (i, f, k) lives at i + m*k + m*K*f. Every per-frequency
/// operation reads one contiguous block.
class ComplexTensor {
 public:
  using SlabView = Eigen::Map<const ComplexMatrix>;
  using MutableSlabView = Eigen::Map<ComplexMatrix>;

  ComplexTensor() = default;
  /// Zero-initialised tensor. Throws InvalidInput unless all dims are positive.
  explicit ComplexTensor(TensorDims dims);
  ComplexTensor(TensorDims dims, std::vector<cplx> data);

  const TensorDims& dims() const noexcept { return dims_; }
  Index channels() const noexcept { return dims_.channels; }
  Index frequencies() const noexcept { return dims_.frequencies; }
  Index trials() const noexcept { return dims_.trials; }

  SlabView slab(Index f) const;
  MutableSlabView slab(Index f);

  cplx operator()(Index i, Index f, Index k) const { return data_[offset(i, f, k)]; }
  cplx& operator()(Index i, Index f, Index k) { return data_[offset(i, f, k)]; }

  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }

  double squared_norm() const;

  friend bool operator==(const ComplexTensor&, const ComplexTensor&) = default;

 private:
  std::size_t offset(Index i, Index f, Index k) const {
    return static_cast<std::size_t>(i + dims_.channels * (k + dims_.trials * f));
  }

  TensorDims dims_{};
  std::vector<cplx> data_;
};

/// Mode-n unfolding (mode in {1, 2, 3}):
///   mode 1: m x (F*K), column f + F*k
///   mode 2: F x (m*K), column i + m*k
///   mode 3: K x (m*F), column i + m*f
ComplexMatrix unfold(const ComplexTensor& x, int mode);

/// Inverse of unfold for the given target dimensions.
ComplexTensor refold(const ComplexMatrix& unfolded, int mode, const TensorDims& dims);

}  // namespace ctfconn
