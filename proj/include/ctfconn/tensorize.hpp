#pragma once

#include <vector>

#include "ctfconn/tensor.hpp"

namespace ctfconn {

struct TensorizeConfig {
  double trial_len_s = 1.0;
  double freq_lo_hz = 1.0;
  double freq_hi_hz = 40.0;
  double freq_step_hz = 1.0;
};

/// Resolved DFT bins of a configuration at a sampling rate.
struct FrequencyAxis {
  Index trial_samples = 0;   // L
  std::vector<Index> bins;   // DFT bin index per retained frequency
  std::vector<double> hz;    // frequency of each retained bin

  Index size() const { return static_cast<Index>(bins.size()); }
};

/// Validates trial length, range and step against fs. Throws InvalidInput.
FrequencyAxis frequency_axis(const TensorizeConfig& cfg, double fs);

/// Bin indices of an Hz band on an axis. Throws if the band selects nothing
/// or extends past the axis.
BinRange band_bins(const FrequencyAxis& axis, double lo_hz, double hi_hz);

/// K non-overlapping trials of L = trial_len_s * fs samples (m x L each); remainder dropped.
std::vector<RealMatrix> slice_trials(const RealMatrix& recording, double fs, double trial_len_s);

/// Subtracts the across-channel mean from every time sample.
RealMatrix common_average_reference(const RealMatrix& x);

/// Removes the least-squares line from every channel of a trial.
RealMatrix detrend_baseline(const RealMatrix& trial);

/// Periodic Hann window of length L scaled to unit RMS.
RealVector hann_window(Index length);

/// Full DFT of a Hann-tapered real series (length L output).
ComplexVector tapered_spectrum(const RealVector& x);

/// Hann-tapered DFT of every trial and channel, keeping the configured bins.
/// Output dims (m, F, K).
ComplexTensor stft_tensorize(const std::vector<RealMatrix>& trials, double fs, const TensorizeConfig& cfg);

/// CAR on the whole recording, then slicing, per-trial detrend, and tapered DFT.
ComplexTensor tensorize_recording(const RealMatrix& recording, double fs, const TensorizeConfig& cfg);

}  // namespace ctfconn
