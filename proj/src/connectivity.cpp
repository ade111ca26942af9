#include "ctfconn/connectivity.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "ctfconn/errors.hpp"

namespace ctfconn {

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

void check_pair(const ComponentSignals& s, Index i, Index j) {
  if (i < 0 || j < 0 || i >= s.rank() || j >= s.rank()) throw InvalidInput("component index out of range");
  if (i == j) throw InvalidInput("component PLI needs two distinct components");
}

void check_band(BinRange band, Index n_freq) {
  if (band.first < 0 || band.last >= n_freq || band.first > band.last) {
    throw InvalidInput("frequency band outside the tensor's frequency range");
  }
}

// Mean over trials of |s_r(f, k)|.
double mean_magnitude(const ComponentSignals& s, Index r, Index f) {
  return s.activations[static_cast<std::size_t>(f)].row(r).cwiseAbs().mean();
}

}  // namespace

ComponentSignals component_signals(const ParafacModel& model) {
  ComponentSignals out;
  out.spatial = model.A;
  const ComplexMatrix yt = model.Y.transpose();
  out.activations.reserve(static_cast<std::size_t>(model.P.rows()));
  for (Index f = 0; f < model.P.rows(); ++f) {
    out.activations.push_back(model.P.row(f).transpose().asDiagonal() * yt);
  }
  return out;
}

ComponentSignals component_signals(const Parafac2Model& model) {
  ComponentSignals out;
  out.spatial = model.A;
  out.activations.reserve(static_cast<std::size_t>(model.P.rows()));
  for (Index f = 0; f < model.P.rows(); ++f) {
    out.activations.push_back(model.P.row(f).transpose().asDiagonal() * model.trial_factors(f));
  }
  return out;
}

ComponentSignals component_signals(const AnyModel& model) {
  return std::visit([](const auto& m) { return component_signals(m); }, model);
}

double phase_lag_index(const ComplexVector& u, const ComplexVector& v) {
  if (u.size() != v.size() || u.size() == 0) throw InvalidInput("PLI needs two equally long nonempty series");
  long total = 0;
  for (Index k = 0; k < u.size(); ++k) total += sign_of((u(k) * std::conj(v(k))).imag());
  return std::abs(static_cast<double>(total)) / static_cast<double>(u.size());
}

std::vector<RealMatrix> sensor_pli(const ComplexTensor& x) {
  if (x.trials() < 2) throw InvalidInput("sensor PLI needs at least two trials");
  const Index m = x.channels(), n_trials = x.trials();
  std::vector<RealMatrix> out;
  out.reserve(static_cast<std::size_t>(x.frequencies()));
  for (Index f = 0; f < x.frequencies(); ++f) {
    const auto slab = x.slab(f);
    RealMatrix psi = RealMatrix::Zero(m, m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = i + 1; j < m; ++j) {
        long total = 0;
        for (Index k = 0; k < n_trials; ++k) total += sign_of((slab(i, k) * std::conj(slab(j, k))).imag());
        psi(i, j) = psi(j, i) = std::abs(static_cast<double>(total)) / static_cast<double>(n_trials);
      }
    }
    out.push_back(std::move(psi));
  }
  return out;
}

RealMatrix band_sensor_pli(const ComplexTensor& x, BinRange band) {
  check_band(band, x.frequencies());
  const std::vector<RealMatrix> per_bin = sensor_pli(x);
  RealMatrix acc = RealMatrix::Zero(x.channels(), x.channels());
  for (Index f = band.first; f <= band.last; ++f) acc += per_bin[static_cast<std::size_t>(f)];
  return acc / static_cast<double>(band.size());
}

double component_pli(const ComponentSignals& signals, Index i, Index j, Index f) {
  check_pair(signals, i, j);
  if (f < 0 || f >= signals.frequencies()) throw InvalidInput("frequency index out of range");
  const ComplexMatrix& s = signals.activations[static_cast<std::size_t>(f)];
  return phase_lag_index(s.row(i).transpose(), s.row(j).transpose());
}

double band_component_pli(const ComponentSignals& signals, Index i, Index j, BinRange band) {
  check_band(band, signals.frequencies());
  double acc = 0.0;
  for (Index f = band.first; f <= band.last; ++f) acc += component_pli(signals, i, j, f);
  return acc / static_cast<double>(band.size());
}

RealMatrix band_component_pli_matrix(const ComponentSignals& signals, BinRange band) {
  const Index r = signals.rank();
  RealMatrix out = RealMatrix::Zero(r, r);
  for (Index i = 0; i < r; ++i)
    for (Index j = i + 1; j < r; ++j) out(i, j) = out(j, i) = band_component_pli(signals, i, j, band);
  return out;
}

ComponentPair strongest_pair(const ComponentSignals& signals, BinRange band) {
  if (signals.rank() < 2) throw InvalidInput("coupling needs at least two components");
  ComponentPair best{0, 1, -1.0};
  for (Index i = 0; i < signals.rank(); ++i) {
    for (Index j = i + 1; j < signals.rank(); ++j) {
      const double c = band_component_pli(signals, i, j, band);
      if (c > best.coupling) best = {i, j, c};
    }
  }
  return best;
}

ConnectivityMap scalp_map(const ComponentSignals& signals, Index i, Index j, BinRange band) {
  check_pair(signals, i, j);
  check_band(band, signals.frequencies());
  ConnectivityMap out;
  out.band = band;
  out.pair = {i, j, band_component_pli(signals, i, j, band)};
  double weight = 0.0;
  for (Index f = band.first; f <= band.last; ++f) weight += mean_magnitude(signals, i, f) + mean_magnitude(signals, j, f);
  out.weight = weight / static_cast<double>(band.size());
  const RealVector ai = signals.spatial.col(i);
  const RealVector aj = signals.spatial.col(j);
  out.matrix = (out.pair.coupling * out.weight) * (ai * aj.transpose() + aj * ai.transpose());
  return out;
}

std::pair<Index, Index> strongest_electrodes(const RealMatrix& map) {
  if (map.rows() != map.cols() || map.rows() < 2) throw InvalidInput("map must be square with at least two electrodes");
  std::pair<Index, Index> best{0, 1};
  double value = map(0, 1);
  for (Index e = 0; e < map.rows(); ++e)
    for (Index g = e + 1; g < map.cols(); ++g)
      if (map(e, g) > value) {
        value = map(e, g);
        best = {e, g};
      }
  return best;
}

RealMatrix region_group(const RealMatrix& map, const std::vector<int>& labels, int n_regions) {
  if (map.rows() != map.cols()) throw InvalidInput("map must be square");
  if (static_cast<Index>(labels.size()) != map.rows()) throw InvalidInput("every electrode needs a region label");
  if (n_regions < 1) throw InvalidInput("need at least one region");
  for (int l : labels) {
    if (l < 0 || l >= n_regions) throw InvalidInput("region label " + std::to_string(l) + " out of range");
  }
  RealMatrix sum = RealMatrix::Zero(n_regions, n_regions);
  RealMatrix count = RealMatrix::Zero(n_regions, n_regions);
  // Visiting (e, g) and (g, e) together keeps the result exactly symmetric for symmetric maps.
  for (Index e = 0; e < map.rows(); ++e) {
    for (Index g = e + 1; g < map.cols(); ++g) {
      const int a = labels[static_cast<std::size_t>(e)], b = labels[static_cast<std::size_t>(g)];
      sum(a, b) += map(e, g);
      sum(b, a) += map(g, e);
      count(a, b) += 1.0;
      count(b, a) += 1.0;
    }
  }
  for (Index a = 0; a < n_regions; ++a)
    for (Index b = 0; b < n_regions; ++b)
      if (count(a, b) > 0.0) sum(a, b) /= count(a, b);
  return sum;
}

const std::vector<std::string>& region_names() {
  static const std::vector<std::string> names{"frontal", "central", "parietal", "occipital", "temporal"};
  return names;
}

std::vector<int> default_regions(const RealMatrix& electrodes) {
  if (electrodes.cols() != 3) throw InvalidInput("electrode positions must be m x 3");
  constexpr double deg = std::numbers::pi / 180.0;
  std::vector<int> labels(static_cast<std::size_t>(electrodes.rows()));
  for (Index e = 0; e < electrodes.rows(); ++e) {
    const double x = electrodes(e, 0), y = electrodes(e, 1), z = electrodes(e, 2);
    int label;
    if (std::abs(x) > 0.7 && z < 0.4) {
      label = 4;
    } else {
      const double tilt = std::atan2(y, z);  // forward tilt from the vertex
      if (tilt >= 35.0 * deg) label = 0;
      else if (tilt >= 0.0) label = 1;
      else if (tilt >= -45.0 * deg) label = 2;
      else label = 3;
    }
    labels[static_cast<std::size_t>(e)] = label;
  }
  return labels;
}

}  // namespace ctfconn
