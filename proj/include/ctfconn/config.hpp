#pragma once

#include <filesystem>

#include "ctfconn/benchmark.hpp"
#include "ctfconn/io.hpp"

namespace ctfconn {

struct SweepSection {
  std::vector<double> pr_values{0.2, 0.4, 0.6, 0.8};
  int n_datasets = 20;
  std::vector<Algorithm> algos{Algorithm::parafac, Algorithm::parafac2};
  std::vector<Index> ranks{8};
  double duration_s = 30.0;
  double coupled_fraction = 0.5;
  std::uint64_t base_seed = 1;
  int threads = 0;
  double max_failure_fraction = 0.2;
};

/// Every pipeline parameter in one document. Sections: scene, tensorize, fit,
/// connectivity, sweep. Defaults follow the reference simulation settings
/// (108 channels, 100 Hz, 180 s, 500 noise sources, AR order 5, 10 runs x 10 inits).
struct RunConfig {
  SceneSettings scene;
  double pr = 0.8;
  bool has_coupling = true;
  std::uint64_t seed = 1;

  TensorizeConfig tensorize;

  Algorithm algo = Algorithm::parafac2;
  Index rank = 8;
  MultiInitOptions fit;

  Band conn_band{8.0, 12.0};

  SweepSection sweep;
};

/// Range checks of every section. Throws InvalidInput naming the offending key.
void validate(const RunConfig& config);

Json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys and wrong types are rejected.
RunConfig run_config_from_json(const Json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

SweepConfig sweep_config(const RunConfig& config);

Json scene_to_json(const SourceScene& scene);
SourceScene scene_from_json(const Json& doc);

Json to_json(const FitReport& report);
Json to_json(const SweepPoint& point);
SweepPoint sweep_point_from_json(const Json& doc);

/// One CSV line per record, fixed column order, header first.
std::string records_csv(const std::vector<BenchmarkRecord>& records);

}  // namespace ctfconn
