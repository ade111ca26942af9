#pragma once

#include <string>
#include <vector>

#include "ctfconn/factorization.hpp"
#include "ctfconn/tensor.hpp"

namespace ctfconn {

/// Per-component complex activations s_r(f, k) = p_r(f) y_r(f, k) with the
/// matching spatial patterns; the common view of both model types.
struct ComponentSignals {
  RealMatrix spatial;                      // m x R
  std::vector<ComplexMatrix> activations;  // F entries, R x K

  Index rank() const { return spatial.cols(); }
  Index frequencies() const { return static_cast<Index>(activations.size()); }
  Index trials() const { return activations.empty() ? 0 : activations.front().cols(); }
};

ComponentSignals component_signals(const ParafacModel& model);
ComponentSignals component_signals(const Parafac2Model& model);
ComponentSignals component_signals(const AnyModel& model);

/// Phase lag index |mean_k sign(Im(u_k conj(v_k)))| with sign(0) = 0.
double phase_lag_index(const ComplexVector& u, const ComplexVector& v);

/// Sensor-space PLI, one symmetric m x m matrix per frequency, zero diagonal. Requires K >= 2.
std::vector<RealMatrix> sensor_pli(const ComplexTensor& x);

/// Mean of sensor_pli over the bins of a band.
RealMatrix band_sensor_pli(const ComplexTensor& x, BinRange band);

/// Component-space PLI between components i != j at frequency index f.
double component_pli(const ComponentSignals& signals, Index i, Index j, Index f);

/// component_pli averaged over the bins of a band.
double band_component_pli(const ComponentSignals& signals, Index i, Index j, BinRange band);

/// R x R matrix of band_component_pli, zero diagonal.
RealMatrix band_component_pli_matrix(const ComponentSignals& signals, BinRange band);

struct ComponentPair {
  Index i = 0;
  Index j = 1;
  double coupling = 0.0;
};

/// Pair with the largest band coupling (lexicographically first on ties). Requires R >= 2.
ComponentPair strongest_pair(const ComponentSignals& signals, BinRange band);

struct ConnectivityMap {
  RealMatrix matrix;  // m x m, symmetric
  ComponentPair pair;
  BinRange band;
  double weight = 0.0;  // mean band magnitude of the two activations
};

/// Scalp connectivity of a component pair:
///   coupling * weight * (a_i a_j^T + a_j a_i^T)
/// where weight = (1/L) sum_l (mean_k |s_i(f_l, k)| + mean_k |s_j(f_l, k)|) over the band.
ConnectivityMap scalp_map(const ComponentSignals& signals, Index i, Index j, BinRange band);

/// Electrode pair (e, e'), e < e', holding the largest off-diagonal map entry.
std::pair<Index, Index> strongest_electrodes(const RealMatrix& map);

/// Mean map entry over all electrode pairs (e, e') with e != e' whose labels are (g, h).
/// Pairs of groups without any such electrode pair are 0.
RealMatrix region_group(const RealMatrix& map, const std::vector<int>& labels, int n_regions);

inline constexpr int kRegionCount = 5;

/// frontal, central, parietal, occipital, temporal
const std::vector<std::string>& region_names();

/// Default five-region partition of unit-sphere electrode positions (m x 3;
/// x right, y anterior, z up) by sagittal angle, with low lateral electrodes temporal.
std::vector<int> default_regions(const RealMatrix& electrodes);

}  // namespace ctfconn
