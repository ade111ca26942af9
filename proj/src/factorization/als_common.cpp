#include "als_common.hpp"

#include <Eigen/Eigenvalues>

#include "ctfconn/errors.hpp"

namespace ctfconn {

SplitTensor::SplitTensor(const ComplexTensor& x)
    : channels(x.channels()), frequencies(x.frequencies()), trials(x.trials()) {
  const Eigen::Map<const ComplexMatrix> flat(x.data().data(), channels, trials * frequencies);
  re = flat.real();
  im = flat.imag();
}

ComplexMatrix SplitTensor::project(const RealMatrix& a) const {
  if (a.rows() != channels) throw InvalidInput("spatial factor has the wrong number of rows");
  const RealMatrix at = a.transpose();
  ComplexMatrix out(a.cols(), re.cols());
  out.real() = at * re;
  out.imag() = at * im;
  return out;
}

RealMatrix SplitTensor::real_product(const ComplexMatrix& g) const {
  if (g.rows() != re.cols()) throw InvalidInput("stacked factor has the wrong number of rows");
  RealMatrix out = re * g.real();
  out.noalias() -= im * g.imag();
  return out;
}

namespace detail {

RealMatrix spatial_warm_start(const SplitTensor& x, Index rank) {
  RealMatrix gram = x.re * x.re.transpose();
  gram.noalias() += x.im * x.im.transpose();
  Eigen::SelfAdjointEigenSolver<RealMatrix> eig(gram);
  // Eigenvalues ascend; take the top `rank` in descending order.
  return eig.eigenvectors().rightCols(rank).rowwise().reverse();
}

ComplexMatrix complex_gaussian(Index rows, Index cols, double sd, Rng& rng) {
  std::normal_distribution<double> normal(0.0, sd / std::sqrt(2.0));
  ComplexMatrix out(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(r, c) = {re, im};
    }
  return out;
}

ComplexMatrix random_profiles(const std::vector<double>& slab_norm2, Index rank, Rng& rng) {
  const auto n_freq = static_cast<Index>(slab_norm2.size());
  ComplexMatrix p = complex_gaussian(n_freq, rank, 1.0, rng);
  const double inv_sqrt_rank = 1.0 / std::sqrt(static_cast<double>(rank));
  for (Index f = 0; f < n_freq; ++f) p.row(f) *= std::sqrt(slab_norm2[static_cast<std::size_t>(f)]) * inv_sqrt_rank;
  return p;
}

std::vector<double> slab_norms2(const ComplexTensor& x) {
  std::vector<double> out(static_cast<std::size_t>(x.frequencies()));
  for (Index f = 0; f < x.frequencies(); ++f) out[static_cast<std::size_t>(f)] = x.slab(f).squaredNorm();
  return out;
}

std::uint64_t start_seed(std::uint64_t seed, int start) {
  return start == 0 ? seed : child_seed(seed, static_cast<std::uint64_t>(start));
}

}  // namespace detail
}  // namespace ctfconn
