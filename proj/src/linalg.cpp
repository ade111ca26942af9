#include "ctfconn/linalg.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include "ctfconn/errors.hpp"

namespace ctfconn {

namespace {

constexpr double kCutoff = 1e-12;

template <typename Matrix>
Matrix pinv_apply(const Eigen::BDCSVD<Matrix>& svd, const Matrix& b) {
  const auto& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  RealVector inv = RealVector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > kCutoff * smax && s(i) > 0.0) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * (inv.asDiagonal() * (svd.matrixU().adjoint() * b));
}

template <typename Matrix>
Matrix gram_right(const Matrix& rhs, const Matrix& gram) {
  if (gram.rows() != gram.cols() || rhs.cols() != gram.rows()) {
    throw InvalidInput("gram solve: shape mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const RealVector& lambda = eig.eigenvalues();
  const double lmax = lambda.size() > 0 ? lambda.cwiseAbs().maxCoeff() : 0.0;
  RealVector inv = RealVector::Zero(lambda.size());
  for (Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > kCutoff * lmax && lambda(i) > 0.0) inv(i) = 1.0 / lambda(i);
  }
  const Matrix& v = eig.eigenvectors();
  return ((rhs * v) * inv.asDiagonal()) * v.adjoint();
}

}  // namespace

bool all_finite(const ComplexMatrix& m) { return m.allFinite(); }
bool all_finite(const RealMatrix& m) { return m.allFinite(); }

SvdResult thin_svd(const ComplexMatrix& m) {
  if (!m.allFinite()) throw InvalidInput("thin_svd: non-finite input");
  Eigen::BDCSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

ComplexMatrix lstsq(const ComplexMatrix& a, const ComplexMatrix& b, Solution mode) {
  if (a.rows() != b.rows()) throw InvalidInput("lstsq: A and B must have the same number of rows");
  if (!a.allFinite() || !b.allFinite()) throw InvalidInput("lstsq: non-finite input");
  if (mode == Solution::complex) {
    Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return pinv_apply(svd, b);
  }
  const Index n = a.rows();
  RealMatrix a_stacked(2 * n, a.cols());
  a_stacked << a.real(), a.imag();
  RealMatrix b_stacked(2 * n, b.cols());
  b_stacked << b.real(), b.imag();
  return lstsq(a_stacked, b_stacked).cast<cplx>();
}

RealMatrix lstsq(const RealMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows()) throw InvalidInput("lstsq: A and B must have the same number of rows");
  Eigen::BDCSVD<RealMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return pinv_apply(svd, b);
}

ComplexMatrix solve_gram_right(const ComplexMatrix& rhs, const ComplexMatrix& gram) {
  return gram_right(rhs, gram);
}

RealMatrix solve_gram_right(const RealMatrix& rhs, const RealMatrix& gram) { return gram_right(rhs, gram); }

ComplexMatrix solve_gram_left(const ComplexMatrix& gram, const ComplexMatrix& rhs) {
  return gram_right(ComplexMatrix(rhs.adjoint()), gram).adjoint();
}

ComplexMatrix procrustes(const ComplexMatrix& c) {
  if (!c.allFinite()) throw InvalidInput("procrustes: non-finite input");
  if (c.rows() < c.cols()) {
    Eigen::JacobiSVD<ComplexMatrix> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return svd.matrixU() * svd.matrixV().adjoint();
  }
  // Right singular vectors from the small Gram matrix, left ones by a Householder
  // QR of C V with columns in decreasing singular-value order. QR keeps U exactly
  // orthonormal even where C is (near) rank deficient.
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(c.adjoint() * c);
  const ComplexMatrix v = eig.eigenvectors().rowwise().reverse();
  const ComplexMatrix w = c * v;
  Eigen::HouseholderQR<ComplexMatrix> qr(w);
  ComplexMatrix u = qr.householderQ() * ComplexMatrix::Identity(c.rows(), c.cols());
  const auto& r = qr.matrixQR();
  for (Index i = 0; i < c.cols(); ++i) {
    const double mag = std::abs(r(i, i));
    if (mag > 0.0) u.col(i) *= r(i, i) / mag;
  }
  return u * v.adjoint();
}

}  // namespace ctfconn
