#include "ctfconn/tensorize.hpp"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "ctfconn/errors.hpp"

namespace ctfconn {

namespace {

constexpr double kGridTol = 1e-9;

Index as_integer(double value, const char* what) {
  const double r = std::round(value);
  if (std::abs(value - r) > kGridTol * std::max(1.0, std::abs(value))) {
    throw InvalidInput(std::string(what) + " is not an integer number of samples/bins");
  }
  return static_cast<Index>(r);
}

}  // namespace

FrequencyAxis frequency_axis(const TensorizeConfig& cfg, double fs) {
  if (!(fs > 0.0)) throw InvalidInput("sampling rate must be positive");
  if (!(cfg.trial_len_s > 0.0)) throw InvalidInput("trial length must be positive");
  if (!(cfg.freq_step_hz > 0.0) || !(cfg.freq_lo_hz >= 0.0) || !(cfg.freq_hi_hz >= cfg.freq_lo_hz)) {
    throw InvalidInput("frequency range must satisfy 0 <= lo <= hi with a positive step");
  }
  FrequencyAxis axis;
  axis.trial_samples = as_integer(cfg.trial_len_s * fs, "trial_len_s * fs");
  if (axis.trial_samples < 2) throw InvalidInput("trials must span at least two samples");
  const double resolution = fs / static_cast<double>(axis.trial_samples);
  const Index n = as_integer((cfg.freq_hi_hz - cfg.freq_lo_hz) / cfg.freq_step_hz, "frequency range / step") + 1;
  for (Index i = 0; i < n; ++i) {
    const double hz = cfg.freq_lo_hz + static_cast<double>(i) * cfg.freq_step_hz;
    const Index bin = as_integer(hz / resolution, "frequency / (fs / L)");
    if (2 * bin > axis.trial_samples) throw InvalidInput("frequency above Nyquist");
    axis.bins.push_back(bin);
    axis.hz.push_back(hz);
  }
  return axis;
}

BinRange band_bins(const FrequencyAxis& axis, double lo_hz, double hi_hz) {
  if (!(lo_hz <= hi_hz)) throw InvalidInput("band must satisfy lo <= hi");
  if (axis.hz.empty() || lo_hz < axis.hz.front() - kGridTol || hi_hz > axis.hz.back() + kGridTol) {
    throw InvalidInput("band extends outside the tensor's frequency range");
  }
  Index first = -1, last = -1;
  for (Index f = 0; f < axis.size(); ++f) {
    const double hz = axis.hz[static_cast<std::size_t>(f)];
    if (hz >= lo_hz - kGridTol && hz <= hi_hz + kGridTol) {
      if (first < 0) first = f;
      last = f;
    }
  }
  if (first < 0) throw InvalidInput("band selects no frequency bins");
  return {first, last};
}

std::vector<RealMatrix> slice_trials(const RealMatrix& recording, double fs, double trial_len_s) {
  const Index len = as_integer(trial_len_s * fs, "trial_len_s * fs");
  if (len <= 0) throw InvalidInput("trial length must be positive");
  const Index n_trials = recording.cols() / len;
  if (n_trials < 1) throw InvalidInput("recording is shorter than one trial");
  std::vector<RealMatrix> trials;
  trials.reserve(static_cast<std::size_t>(n_trials));
  for (Index k = 0; k < n_trials; ++k) trials.emplace_back(recording.middleCols(k * len, len));
  return trials;
}

RealMatrix common_average_reference(const RealMatrix& x) {
  if (x.rows() < 2) throw InvalidInput("common average reference needs at least two channels");
  return x.rowwise() - x.colwise().mean();
}

RealMatrix detrend_baseline(const RealMatrix& trial) {
  const Index n = trial.cols();
  if (n < 2) throw InvalidInput("detrending needs at least two samples");
  // Centred time axis makes the intercept and slope decouple.
  RealVector t(n);
  for (Index i = 0; i < n; ++i) t(i) = static_cast<double>(i) - 0.5 * static_cast<double>(n - 1);
  const double tt = t.squaredNorm();
  RealMatrix out = trial.colwise() - trial.rowwise().mean();
  const RealVector slope = (out * t) / tt;
  out -= slope * t.transpose();
  // Remove the rounding left by the slope step so each channel averages to zero.
  out = out.colwise() - out.rowwise().mean();
  return out;
}

RealVector hann_window(Index length) {
  RealVector w(length);
  for (Index n = 0; n < length; ++n) {
    w(n) = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length));
  }
  const double rms = std::sqrt(w.squaredNorm() / static_cast<double>(length));
  return w / rms;
}

ComplexVector tapered_spectrum(const RealVector& x) {
  const RealVector w = hann_window(x.size());
  std::vector<double> tapered(static_cast<std::size_t>(x.size()));
  for (Index n = 0; n < x.size(); ++n) tapered[static_cast<std::size_t>(n)] = x(n) * w(n);
  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, tapered);
  ComplexVector out(x.size());
  for (Index k = 0; k < x.size(); ++k) out(k) = spec[static_cast<std::size_t>(k)];
  return out;
}

ComplexTensor stft_tensorize(const std::vector<RealMatrix>& trials, double fs, const TensorizeConfig& cfg) {
  if (trials.empty()) throw InvalidInput("no trials to tensorize");
  const FrequencyAxis axis = frequency_axis(cfg, fs);
  const Index m = trials.front().rows();
  const Index len = trials.front().cols();
  if (len != axis.trial_samples) throw InvalidInput("trial length does not match trial_len_s * fs");
  const auto n_trials = static_cast<Index>(trials.size());
  ComplexTensor out(TensorDims{m, axis.size(), n_trials});

  const RealVector w = hann_window(len);
  Eigen::FFT<double> fft;
  std::vector<double> buffer(static_cast<std::size_t>(len));
  std::vector<cplx> spec;
  for (Index k = 0; k < n_trials; ++k) {
    const RealMatrix& trial = trials[static_cast<std::size_t>(k)];
    if (trial.rows() != m || trial.cols() != len) throw InvalidInput("trials must share one shape");
    for (Index i = 0; i < m; ++i) {
      for (Index n = 0; n < len; ++n) buffer[static_cast<std::size_t>(n)] = trial(i, n) * w(n);
      fft.fwd(spec, buffer);
      for (Index f = 0; f < axis.size(); ++f) out(i, f, k) = spec[static_cast<std::size_t>(axis.bins[static_cast<std::size_t>(f)])];
    }
  }
  return out;
}

ComplexTensor tensorize_recording(const RealMatrix& recording, double fs, const TensorizeConfig& cfg) {
  const RealMatrix referenced = common_average_reference(recording);
  std::vector<RealMatrix> trials = slice_trials(referenced, fs, cfg.trial_len_s);
  for (auto& trial : trials) trial = detrend_baseline(trial);
  return stft_tensorize(trials, fs, cfg);
}

}  // namespace ctfconn
