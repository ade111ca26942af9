#include <doctest.h>

#include <numbers>

#include "ctfconn/errors.hpp"
#include "ctfconn/tensorize.hpp"
#include "helpers.hpp"

using namespace ctfconn;

namespace {

ComplexVector naive_dft(const RealVector& x) {
  const Index n = x.size();
  ComplexVector out(n);
  for (Index k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (Index t = 0; t < n; ++t) acc += x(t) * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t) / double(n));
    out(k) = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("default axis resolves 40 one-hertz bins") {
  const FrequencyAxis axis = frequency_axis(TensorizeConfig{}, 100.0);
  CHECK(axis.trial_samples == 100);
  REQUIRE(axis.size() == 40);
  for (Index f = 0; f < 40; ++f) {
    CHECK(axis.bins[std::size_t(f)] == f + 1);
    CHECK(axis.hz[std::size_t(f)] == doctest::Approx(double(f + 1)));
  }
  const BinRange alpha = band_bins(axis, 8.0, 12.0);
  CHECK(alpha == BinRange{7, 11});

  TensorizeConfig half;
  half.trial_len_s = 2.0;
  half.freq_step_hz = 0.5;
  const FrequencyAxis fine = frequency_axis(half, 100.0);
  CHECK(fine.size() == 79);
  CHECK(fine.bins.front() == 2);
  CHECK(fine.bins.back() == 80);
}

TEST_CASE("axis and band validation") {
  TensorizeConfig c;
  c.freq_hi_hz = 60.0;
  CHECK_THROWS_AS(frequency_axis(c, 100.0), InvalidInput);
  c = {};
  c.trial_len_s = 1.005;
  CHECK_THROWS_AS(frequency_axis(c, 100.0), InvalidInput);
  c = {};
  c.freq_step_hz = 0.5;  // 0.5 Hz is not on a 1 Hz grid
  CHECK_THROWS_AS(frequency_axis(c, 100.0), InvalidInput);
  CHECK_THROWS_AS(frequency_axis(TensorizeConfig{}, 0.0), InvalidInput);
  const FrequencyAxis axis = frequency_axis(TensorizeConfig{}, 100.0);
  CHECK_THROWS_AS(band_bins(axis, 12.0, 8.0), InvalidInput);
  CHECK_THROWS_AS(band_bins(axis, 35.0, 45.0), InvalidInput);
  CHECK_THROWS_AS(band_bins(axis, 8.2, 8.8), InvalidInput);
}

TEST_CASE("slicing drops the remainder") {
  RealMatrix rec(3, 1050);
  for (Index t = 0; t < rec.cols(); ++t) rec.col(t).setConstant(double(t));
  const auto trials = slice_trials(rec, 100.0, 1.0);
  REQUIRE(trials.size() == 10u);
  CHECK(trials[3](1, 0) == 300.0);
  CHECK(trials[9](2, 99) == 999.0);
  CHECK_THROWS_AS(slice_trials(RealMatrix::Zero(3, 50), 100.0, 1.0), InvalidInput);
}

TEST_CASE("common average reference zeroes the channel mean") {
  Rng rng(1);
  const RealMatrix x = testutil::gaussian(7, 300, rng);
  const RealMatrix y = common_average_reference(x);
  CHECK(y.colwise().sum().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(testutil::max_abs(RealMatrix(common_average_reference(y) - y)) < 1e-12);
  // Adding the same signal to every channel changes nothing.
  const RealMatrix shifted = x.rowwise() + testutil::gaussian(1, 300, rng).row(0);
  CHECK(testutil::max_abs(RealMatrix(common_average_reference(shifted) - y)) < 1e-12);
}

TEST_CASE("detrending removes lines and keeps residuals orthogonal") {
  Rng rng(2);
  const RealMatrix noise = testutil::gaussian(4, 100, rng);
  RealMatrix trial = noise;
  for (Index t = 0; t < 100; ++t) trial.col(t) += RealVector::LinSpaced(4, -3.0, 5.0) * (0.2 * double(t)) + RealVector::Constant(4, 7.0);
  const RealMatrix d = detrend_baseline(trial);
  CHECK(testutil::max_abs(RealMatrix(d - detrend_baseline(noise))) < 1e-10);
  RealVector t(100);
  for (Index i = 0; i < 100; ++i) t(i) = double(i);
  CHECK((d * t).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(d.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
  const RealMatrix line = RealVector::Ones(2) * t.transpose();
  CHECK(testutil::max_abs(detrend_baseline(line)) < 1e-10);
}

TEST_CASE("Hann window and tapered spectrum match a direct DFT") {
  const RealVector w = hann_window(100);
  CHECK(w(0) == doctest::Approx(0.0));
  CHECK(w.squaredNorm() / 100.0 == doctest::Approx(1.0));
  for (Index n = 1; n < 100; ++n) CHECK(w(n) == doctest::Approx(w(100 - n)));
  Rng rng(3);
  const RealVector x = testutil::gaussian(100, 1, rng).col(0);
  const ComplexVector fast = tapered_spectrum(x);
  const ComplexVector slow = naive_dft(RealVector(x.cwiseProduct(w)));
  CHECK(testutil::max_abs(ComplexMatrix(fast - slow)) < 1e-10);
}

TEST_CASE("a pure tone lands in its bin with the expected phase") {
  const double fs = 100.0, phase = 0.7;
  RealMatrix rec(2, 1000);
  for (Index t = 0; t < 1000; ++t) {
    rec(0, t) = std::cos(2.0 * std::numbers::pi * 10.0 * double(t) / fs + phase);
    rec(1, t) = -rec(0, t);
  }
  const ComplexTensor x = stft_tensorize(slice_trials(rec, fs, 1.0), fs, TensorizeConfig{});
  CHECK(x.dims() == TensorDims{2, 40, 10});
  for (Index k = 0; k < 10; ++k) {
    CHECK(std::abs(x(0, 9, k)) == doctest::Approx(std::abs(x(0, 9, 0))));
    CHECK(std::arg(x(0, 9, k)) == doctest::Approx(phase).epsilon(1e-9));
    CHECK(std::abs(x(0, 9, k) + x(1, 9, k)) < 1e-9);
    // A periodic Hann leaks only into the neighbouring bins.
    for (Index f = 0; f < 40; ++f)
      if (std::abs(f - 9) > 1) CHECK(std::abs(x(0, f, k)) < 1e-9);
  }
}

TEST_CASE("tensorize_recording is CAR, slice, detrend, then DFT") {
  Rng rng(4);
  const RealMatrix rec = testutil::gaussian(5, 430, rng);
  const ComplexTensor x = tensorize_recording(rec, 100.0, TensorizeConfig{});
  REQUIRE(x.dims() == TensorDims{5, 40, 4});
  const RealMatrix car = common_average_reference(rec);
  for (Index k = 0; k < 4; ++k) {
    const RealMatrix trial = detrend_baseline(car.middleCols(k * 100, 100));
    for (Index i = 0; i < 5; ++i) {
      const ComplexVector spec = naive_dft(RealVector(trial.row(i).transpose().cwiseProduct(hann_window(100))));
      for (Index f = 0; f < 40; ++f) CHECK(std::abs(x(i, f, k) - spec(f + 1)) < 1e-9);
    }
  }
  // CAR makes every frequency slab sum to zero over channels.
  for (Index f = 0; f < 40; ++f) CHECK(testutil::max_abs(ComplexMatrix(x.slab(f).colwise().sum())) < 1e-9);
  CHECK_THROWS_AS(tensorize_recording(RealMatrix::Zero(1, 500), 100.0, TensorizeConfig{}), InvalidInput);
}
