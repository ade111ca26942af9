#include "ctfconn/tensor.hpp"

#include "ctfconn/errors.hpp"

namespace ctfconn {

namespace {

void check_dims(const TensorDims& d) {
  if (d.channels <= 0 || d.frequencies <= 0 || d.trials <= 0) {
    throw InvalidInput("tensor dimensions must be strictly positive");
  }
}

}  // namespace

ComplexTensor::ComplexTensor(TensorDims dims) : dims_(dims) {
  check_dims(dims_);
  data_.assign(static_cast<std::size_t>(dims_.size()), cplx{});
}

ComplexTensor::ComplexTensor(TensorDims dims, std::vector<cplx> data) : dims_(dims), data_(std::move(data)) {
  check_dims(dims_);
  if (static_cast<Index>(data_.size()) != dims_.size()) {
    throw InvalidInput("tensor data length does not match dimensions");
  }
}

ComplexTensor::SlabView ComplexTensor::slab(Index f) const {
  if (f < 0 || f >= dims_.frequencies) throw InvalidInput("slab index out of range");
  return SlabView(data_.data() + f * dims_.channels * dims_.trials, dims_.channels, dims_.trials);
}

ComplexTensor::MutableSlabView ComplexTensor::slab(Index f) {
  if (f < 0 || f >= dims_.frequencies) throw InvalidInput("slab index out of range");
  return MutableSlabView(data_.data() + f * dims_.channels * dims_.trials, dims_.channels, dims_.trials);
}

double ComplexTensor::squared_norm() const {
  double acc = 0.0;
  for (const auto& v : data_) acc += std::norm(v);
  return acc;
}

ComplexMatrix unfold(const ComplexTensor& x, int mode) {
  const Index m = x.channels(), nf = x.frequencies(), nk = x.trials();
  ComplexMatrix out;
  switch (mode) {
    case 1:
      out.resize(m, nf * nk);
      for (Index f = 0; f < nf; ++f)
        for (Index k = 0; k < nk; ++k) out.col(f + nf * k) = x.slab(f).col(k);
      break;
    case 2:
      out.resize(nf, m * nk);
      for (Index f = 0; f < nf; ++f)
        for (Index k = 0; k < nk; ++k)
          for (Index i = 0; i < m; ++i) out(f, i + m * k) = x(i, f, k);
      break;
    case 3:
      out.resize(nk, m * nf);
      for (Index f = 0; f < nf; ++f)
        for (Index k = 0; k < nk; ++k)
          for (Index i = 0; i < m; ++i) out(k, i + m * f) = x(i, f, k);
      break;
    default:
      throw InvalidInput("unfold mode must be 1, 2 or 3");
  }
  return out;
}

ComplexTensor refold(const ComplexMatrix& unfolded, int mode, const TensorDims& dims) {
  ComplexTensor x(dims);
  const Index m = dims.channels, nf = dims.frequencies, nk = dims.trials;
  const auto expect = [&](Index rows, Index cols) {
    if (unfolded.rows() != rows || unfolded.cols() != cols) {
      throw InvalidInput("unfolded matrix shape does not match target dimensions");
    }
  };
  switch (mode) {
    case 1:
      expect(m, nf * nk);
      for (Index f = 0; f < nf; ++f)
        for (Index k = 0; k < nk; ++k) x.slab(f).col(k) = unfolded.col(f + nf * k);
      break;
    case 2:
      expect(nf, m * nk);
      for (Index f = 0; f < nf; ++f)
        for (Index k = 0; k < nk; ++k)
          for (Index i = 0; i < m; ++i) x(i, f, k) = unfolded(f, i + m * k);
      break;
    case 3:
      expect(nk, m * nf);
      for (Index f = 0; f < nf; ++f)
        for (Index k = 0; k < nk; ++k)
          for (Index i = 0; i < m; ++i) x(i, f, k) = unfolded(k, i + m * f);
      break;
    default:
      throw InvalidInput("refold mode must be 1, 2 or 3");
  }
  return x;
}

}  // namespace ctfconn
