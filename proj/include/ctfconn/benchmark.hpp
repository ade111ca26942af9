#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctfconn/multi_init.hpp"
#include "ctfconn/synth.hpp"
#include "ctfconn/tensorize.hpp"

namespace ctfconn {

struct LabelledCoupling {
  double coupling = 0.0;
  bool coupled = false;
};

struct ConnScore {
  double score = 0.0;
  double threshold = 0.0;  // classify coupled iff coupling > threshold; may be +-inf
};

/// Best mean detection score (+1 correct, -2 wrong) over thresholds at -inf,
/// midpoints of consecutive distinct couplings and +inf. The lowest maximising
/// threshold is returned. Throws InvalidInput unless both classes are present.
ConnScore conn_score(std::span<const LabelledCoupling> records);

/// Mean detection score at a fixed threshold.
double detection_score(std::span<const LabelledCoupling> records, double threshold);

/// Lead fields centred and scaled per column so that a dot product with a
/// centred unit vector is a Pearson correlation.
RealMatrix standardized_columns(const RealMatrix& x);

struct LocResult {
  std::array<Index, 2> lead_fields{};  // best-correlated lead field of each estimated component
  std::array<Octant, 2> predicted{};   // octants of those lead fields, in truth order
  double score = 0.0;                  // in {-1, 0, 1}
};

/// Octant localisation of two estimated spatial components (m x 2) against the
/// true lead-field indices of the coupled sources. Components are matched to
/// truths by the assignment with the larger summed |correlation|.
LocResult loc_score(const RealMatrix& spatial_pair, const HeadModel& head, std::array<Index, 2> truth);
LocResult loc_score(const RealMatrix& spatial_pair, const HeadModel& head, const RealMatrix& standardized_leads,
                    std::array<Index, 2> truth);

/// Whether two electrodes sit in the two given octants, in either order.
bool electrodes_in_octants(const HeadModel& head, std::pair<Index, Index> electrodes, std::array<Octant, 2> octants);

struct BenchmarkRecord {
  int dataset = 0;
  double pr = 0.0;
  bool has_coupling = false;
  Algorithm algo = Algorithm::parafac2;
  Index rank = 0;
  std::uint64_t seed = 0;
  double achieved_pr = 0.0;  // NaN without coupling
  bool failed = false;
  std::string error;
  double ev = 0.0;
  double best_coupling = 0.0;
  int iterations = 0;
  std::optional<std::array<Octant, 2>> predicted_octants;  // set whenever the fit succeeded
  std::optional<std::array<Octant, 2>> true_octants;       // set on coupled datasets
  double loc = 0.0;                                        // NaN unless coupled and fitted
  std::pair<Index, Index> strongest_electrodes{0, 1};
  bool electrodes_hit = false;  // strongest electrodes inside the true octants
};

struct SweepPoint {
  Algorithm algo = Algorithm::parafac2;
  Index rank = 0;
  double pr = 0.0;
  int n_ok = 0;
  int n_failed = 0;
  double mean_ev = 0.0;
  double conn = 0.0;  // NaN when only one class survived
  double threshold = 0.0;
  double loc = 0.0;   // mean over coupled datasets
  double mean_coupling_coupled = 0.0;
  double mean_coupling_uncoupled = 0.0;
  double electrode_hit_rate = 0.0;  // over coupled datasets
};

struct SweepResult {
  std::vector<BenchmarkRecord> records;  // dataset-major, then algorithm, then rank
  std::vector<SweepPoint> points;        // algorithm-major, then rank, then PR
};

struct SweepConfig {
  SceneSettings scene = desk_scene();
  TensorizeConfig tensorize;
  std::vector<double> pr_values{0.2, 0.4, 0.6, 0.8};
  int n_datasets = 20;  // per PR
  std::vector<Algorithm> algos{Algorithm::parafac, Algorithm::parafac2};
  std::vector<Index> ranks{8};
  MultiInitOptions fit;  // band is overridden by coupling_band
  Band coupling_band{8.0, 12.0};
  double coupled_fraction = 0.5;
  std::uint64_t base_seed = 1;
  int threads = 0;  // 0 = hardware concurrency
  double max_failure_fraction = 0.2;

  static SceneSettings desk_scene() {
    SceneSettings s;
    s.duration_s = 30.0;
    return s;
  }
};

/// Labels of the n datasets of one PR: round(n * fraction) coupled, shuffled by seed.
std::vector<bool> coupling_labels(int n, double fraction, std::uint64_t seed);

/// Aggregates records into per (algorithm, rank, PR) points.
std::vector<SweepPoint> aggregate(const std::vector<BenchmarkRecord>& records, const SweepConfig& config);

using RecordCallback = std::function<void(const BenchmarkRecord&)>;

/// Dataset d of PR p (global index i = p * n_datasets + d) uses seed base_seed + i.
/// Throws NumericalFailure when more than max_failure_fraction of the datasets
/// have a failed fit. on_record is called (serialised) as each record completes.
SweepResult run_sweep(const SweepConfig& config, const RecordCallback& on_record = {});

void validate(const SweepConfig& config);

}  // namespace ctfconn
