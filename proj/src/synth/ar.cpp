#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "ctfconn/errors.hpp"
#include "ctfconn/synth.hpp"

namespace ctfconn {

namespace {

constexpr int kMaxDesignAttempts = 1000;
constexpr Index kBurnIn = 1000;
constexpr double kBlowUp = 1e6;

double max_modulus(const RealMatrix& companion) {
  if (companion.size() == 0) return 0.0;
  Eigen::EigenSolver<RealMatrix> es(companion, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

int CoupledPair::order() const {
  return std::max({source_i.order, source_j.order, static_cast<int>(h_ij.size()), static_cast<int>(h_ji.size())});
}

std::vector<double> ar_coefficients_from_poles(std::span<const cplx> poles) {
  // prod (1 - p z^-1) = 1 + c_1 z^-1 + ... + c_k z^-k
  std::vector<cplx> c{1.0};
  for (const cplx& p : poles) {
    std::vector<cplx> next(c.size() + 1, cplx{});
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= p * c[i];
    }
    c = std::move(next);
  }
  std::vector<double> h(poles.size());
  for (std::size_t tau = 1; tau < c.size(); ++tau) h[tau - 1] = -c[tau].real();
  return h;
}

double ar_psd(std::span<const double> coeffs, double freq_hz, double fs) {
  const double w = 2.0 * std::numbers::pi * freq_hz / fs;
  cplx denom{1.0, 0.0};
  for (std::size_t tau = 1; tau <= coeffs.size(); ++tau) {
    denom -= coeffs[tau - 1] * std::polar(1.0, -w * static_cast<double>(tau));
  }
  return 1.0 / std::norm(denom);
}

double ar_peak_frequency(std::span<const double> coeffs, double fs) {
  const double step = 0.01;
  const int n = static_cast<int>(std::floor(fs / 2.0 / step));
  double best_f = 0.0, best_p = -1.0;
  for (int i = 0; i <= n; ++i) {
    const double f = i * step;
    const double p = ar_psd(coeffs, f, fs);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  return best_f;
}

double companion_spectral_radius(std::span<const double> coeffs) {
  const Index k = static_cast<Index>(coeffs.size());
  RealMatrix c = RealMatrix::Zero(k, k);
  for (Index j = 0; j < k; ++j) c(0, j) = coeffs[static_cast<std::size_t>(j)];
  for (Index i = 1; i < k; ++i) c(i, i - 1) = 1.0;
  return max_modulus(c);
}

double companion_spectral_radius(const CoupledPair& pair) {
  const int k = pair.order();
  const auto at = [](const std::vector<double>& v, int tau) {
    return tau < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(tau)] : 0.0;
  };
  RealMatrix c = RealMatrix::Zero(2 * k, 2 * k);
  for (int tau = 0; tau < k; ++tau) {
    c(0, 2 * tau) = at(pair.source_i.coeffs, tau);
    c(0, 2 * tau + 1) = at(pair.h_ij, tau);
    c(1, 2 * tau) = at(pair.h_ji, tau);
    c(1, 2 * tau + 1) = at(pair.source_j.coeffs, tau);
  }
  for (int i = 2; i < 2 * k; ++i) c(i, i - 2) = 1.0;
  return max_modulus(c);
}

ArSource design_ar_source(Band band, double fs, int order, Rng& rng) {
  if (order < 2) throw InvalidInput("AR order must be at least 2");
  if (!(band.lo_hz > 0.0 && band.lo_hz < band.hi_hz && band.hi_hz < fs / 2.0)) {
    throw InvalidInput("AR band must satisfy 0 < lo < hi < fs/2");
  }
  std::uniform_real_distribution<double> centre(band.lo_hz, band.hi_hz);
  std::uniform_real_distribution<double> main_radius(0.9, 0.98);
  std::uniform_real_distribution<double> minor_radius(0.0, 0.5);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::uniform_real_distribution<double> real_pole(-0.5, 0.5);

  for (int attempt = 0; attempt < kMaxDesignAttempts; ++attempt) {
    const double fc = centre(rng);
    const double r = main_radius(rng);
    const double theta = 2.0 * std::numbers::pi * fc / fs;
    std::vector<cplx> poles{std::polar(r, theta), std::polar(r, -theta)};
    int remaining = order - 2;
    for (; remaining >= 2; remaining -= 2) {
      const cplx p = std::polar(minor_radius(rng), angle(rng));
      poles.push_back(p);
      poles.push_back(std::conj(p));
    }
    if (remaining == 1) poles.emplace_back(real_pole(rng), 0.0);

    ArSource src{order, ar_coefficients_from_poles(poles), fc, r};
    const double peak = ar_peak_frequency(src.coeffs, fs);
    if (peak >= band.lo_hz && peak <= band.hi_hz) return src;
  }
  throw GenerationFailure("could not place an AR spectral peak inside the requested band");
}

CoupledPair design_coupled_pair(Band band, double fs, int order, Rng& rng) {
  CoupledPair pair;
  pair.source_i = design_ar_source(band, fs, order, rng);
  pair.source_j = design_ar_source(band, fs, order, rng);
  std::normal_distribution<double> cross(0.0, 0.5);
  pair.h_ij.resize(static_cast<std::size_t>(order));
  for (double& h : pair.h_ij) h = cross(rng);
  pair.h_ji.assign(static_cast<std::size_t>(order), 0.0);
  for (int shrink = 0; companion_spectral_radius(pair) >= 0.999; ++shrink) {
    if (shrink > 200) throw GenerationFailure("coupled AR system could not be stabilised");
    for (double& h : pair.h_ij) h *= 0.9;
  }
  return pair;
}

SourcePair simulate_coupled_pair(const CoupledPair& pair, Index n_samples, Rng& rng) {
  const int k = pair.order();
  if (n_samples < 10 * k) throw InvalidInput("simulation length must be at least 10 * AR order");
  const auto at = [](const std::vector<double>& v, int tau) {
    return tau < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(tau)] : 0.0;
  };
  const Index total = n_samples + kBurnIn;
  std::vector<double> si(static_cast<std::size_t>(total), 0.0), sj(static_cast<std::size_t>(total), 0.0);
  std::normal_distribution<double> innovation(0.0, 1.0);
  for (Index t = 0; t < total; ++t) {
    double vi = innovation(rng);
    double vj = innovation(rng);
    for (int tau = 1; tau <= k && tau <= t; ++tau) {
      const auto past = static_cast<std::size_t>(t - tau);
      vi += at(pair.source_i.coeffs, tau - 1) * si[past] + at(pair.h_ij, tau - 1) * sj[past];
      vj += at(pair.h_ji, tau - 1) * si[past] + at(pair.source_j.coeffs, tau - 1) * sj[past];
    }
    if (!(std::abs(vi) <= kBlowUp && std::abs(vj) <= kBlowUp)) {
      throw GenerationFailure("coupled AR simulation diverged");
    }
    si[static_cast<std::size_t>(t)] = vi;
    sj[static_cast<std::size_t>(t)] = vj;
  }
  SourcePair out{RealVector(n_samples), RealVector(n_samples)};
  for (Index t = 0; t < n_samples; ++t) {
    out.s_i(t) = si[static_cast<std::size_t>(t + kBurnIn)];
    out.s_j(t) = sj[static_cast<std::size_t>(t + kBurnIn)];
  }
  return out;
}

}  // namespace ctfconn
