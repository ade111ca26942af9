#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ctfconn/random.hpp"
#include "ctfconn/tensor.hpp"

namespace ctfconn {

struct Band {
  double lo_hz = 8.0;
  double hi_hz = 12.0;
};

/// Univariate AR source s(t) = sum_tau coeffs[tau-1] * s(t - tau) + w(t).
struct ArSource {
  int order = 0;
  std::vector<double> coeffs;  // h(1..order)
  double center_hz = 0.0;
  double pole_radius = 0.0;
};

/// Bivariate AR system
///   s_i(t) = sum_tau h_i(tau) s_i(t-tau) + h_ij(tau) s_j(t-tau) + w_i(t)
///   s_j(t) = sum_tau h_ji(tau) s_i(t-tau) + h_j(tau) s_j(t-tau) + w_j(t)
/// A nonzero h_ij means s_j drives s_i.
struct CoupledPair {
  ArSource source_i;
  ArSource source_j;
  std::vector<double> h_ij;
  std::vector<double> h_ji;

  int order() const;
};

/// Monic AR polynomial from its roots, returned as recursion coefficients h(1..k).
/// Complex roots must come in conjugate pairs.
std::vector<double> ar_coefficients_from_poles(std::span<const cplx> poles);

/// Power spectral density 1 / |1 - sum h(tau) e^{-i 2 pi f tau / fs}|^2 (unit innovation variance).
double ar_psd(std::span<const double> coeffs, double freq_hz, double fs);

/// Frequency of the PSD maximum on a 0.01 Hz grid over [0, fs/2].
double ar_peak_frequency(std::span<const double> coeffs, double fs);

/// Largest eigenvalue modulus of the companion matrix of a univariate AR model.
double companion_spectral_radius(std::span<const double> coeffs);

/// Same for the bivariate system of a CoupledPair.
double companion_spectral_radius(const CoupledPair& pair);

/// Narrowband AR source by pole placement: a conjugate pole pair at a centre
/// frequency drawn in the band with radius in [0.9, 0.98], remaining poles at
/// radius <= 0.5. Redraws until the realised PSD peak lies inside the band.
ArSource design_ar_source(Band band, double fs, int order, Rng& rng);

/// Two band-limited sources with unidirectional coupling (h_ji = 0, h_ij ~ N(0, 0.25)),
/// cross terms shrunk until the joint system is stable.
CoupledPair design_coupled_pair(Band band, double fs, int order, Rng& rng);

struct SourcePair {
  RealVector s_i;
  RealVector s_j;
};

/// Runs the bivariate recursion with unit-variance Gaussian innovations,
/// discarding a 1000-sample burn-in.
SourcePair simulate_coupled_pair(const CoupledPair& pair, Index n_samples, Rng& rng);

/// Zero-mean, unit-variance 1/f noise by FFT amplitude shaping.
RealVector pink_noise(Index n_samples, Rng& rng);

/// Octant of a 3-D point as a sign pattern; bit 2 = x >= 0, bit 1 = y >= 0, bit 0 = z >= 0.
using Octant = std::uint8_t;
Octant octant_of(const Eigen::Vector3d& p);
std::string octant_name(Octant o);

struct HeadModel {
  RealMatrix electrodes;        // m x 3, unit sphere
  RealMatrix lead_fields;       // m x n, unit-norm columns
  RealMatrix source_positions;  // n x 3, inside the unit ball
  RealVector source_widths;     // n, Gaussian blob sigma
  std::vector<Octant> octants;  // n

  Index channels() const { return electrodes.rows(); }
  Index size() const { return lead_fields.cols(); }
};

/// Fibonacci-lattice electrode cap with spatial-Gaussian lead fields.
HeadModel build_head_model(Index channels, Index n_lead_fields, Rng& rng);

/// Electrode positions used by build_head_model (deterministic).
RealMatrix electrode_cap(Index channels);

struct NoiseSource {
  Index lead_field = 0;
  std::uint64_t seed = 0;
};

struct CoupledSources {
  CoupledPair pair;
  std::array<Index, 2> lead_fields{};  // lead-field indices of s_i and s_j
};

/// Everything needed to regenerate one synthetic recording.
struct SceneSettings {
  Index channels = 108;
  Index n_lead_fields = 2000;
  Index n_noise_sources = 500;
  int ar_order = 5;
  Band source_band{8.0, 12.0};
  double fs = 100.0;
  double duration_s = 180.0;
  double sensor_noise_frac = 0.1;
  std::uint64_t head_seed = 1;
};

/// Head model of a scene configuration, drawn from its head_seed.
HeadModel build_head_model(const SceneSettings& settings);

struct SourceScene {
  std::optional<CoupledSources> coupled;
  std::vector<NoiseSource> noise_sources;
  std::optional<double> pr;  // only meaningful with coupled sources
  double sensor_noise_frac = 0.1;
  bool has_coupling = false;
  std::uint64_t seed = 0;
};

/// Draws a scene. has_coupling selects whether a coupled pair is placed; pr is
/// attached only to coupled scenes.
SourceScene make_scene(const SceneSettings& settings, const HeadModel& head, bool has_coupling, double pr,
                       std::uint64_t seed);

struct RenderedScene {
  RealMatrix data;             // m x T
  double achieved_pr = 0.0;    // sensor-space coupled / (coupled + background), NaN without coupling
  double coupled_gain = 0.0;   // scalar g applied to the coupled mixture
  RealMatrix coupled_sources;  // 2 x T source time courses after scaling (empty without coupling)
};

/// X = g * A_c S_c + A_n S_n + E with g enforcing the scene's power ratio and
/// ||E||^2 = sensor_noise_frac * ||g A_c S_c + A_n S_n||^2.
RenderedScene render_scene(const SourceScene& scene, const HeadModel& head, double duration_s, double fs);

}  // namespace ctfconn
