#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "ctfconn/errors.hpp"
#include "ctfconn/synth.hpp"

namespace ctfconn {

RealVector pink_noise(Index n_samples, Rng& rng) {
  if (n_samples < 64) throw InvalidInput("pink noise needs at least 64 samples");
  const Index n = n_samples;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  // Hermitian spectrum with |X_k| = k^{-1/2}; DC removed.
  std::vector<cplx> spectrum(static_cast<std::size_t>(n), cplx{});
  for (Index k = 1; 2 * k < n; ++k) {
    const cplx v = std::polar(1.0 / std::sqrt(static_cast<double>(k)), phase(rng));
    spectrum[static_cast<std::size_t>(k)] = v;
    spectrum[static_cast<std::size_t>(n - k)] = std::conj(v);
  }
  if (n % 2 == 0) {
    const double sign = phase(rng) < std::numbers::pi ? 1.0 : -1.0;
    spectrum[static_cast<std::size_t>(n / 2)] = sign / std::sqrt(static_cast<double>(n / 2));
  }

  Eigen::FFT<double> fft;
  std::vector<cplx> time;
  fft.inv(time, spectrum);

  RealVector out(n);
  for (Index t = 0; t < n; ++t) out(t) = time[static_cast<std::size_t>(t)].real();
  out.array() -= out.mean();
  const double sd = std::sqrt(out.squaredNorm() / static_cast<double>(n));
  if (sd > 0.0) out /= sd;
  return out;
}

}  // namespace ctfconn
