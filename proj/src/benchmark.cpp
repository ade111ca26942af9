#include "ctfconn/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "ctfconn/errors.hpp"
#include "ctfconn/log.hpp"

namespace ctfconn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream tags below a dataset seed.
constexpr std::uint64_t kFitTag = 1;
constexpr std::uint64_t kLabelTag = 0x1abe1;

std::array<Index, 2> best_leads(const RealMatrix& corr) {
  std::array<Index, 2> out{};
  for (Index c = 0; c < 2; ++c) corr.row(c).maxCoeff(&out[static_cast<std::size_t>(c)]);
  return out;
}

}  // namespace

double detection_score(std::span<const LabelledCoupling> records, double threshold) {
  if (records.empty()) throw InvalidInput("no records to score");
  double total = 0.0;
  for (const auto& r : records) total += ((r.coupling > threshold) == r.coupled) ? 1.0 : -2.0;
  return total / static_cast<double>(records.size());
}

ConnScore conn_score(std::span<const LabelledCoupling> records) {
  std::vector<LabelledCoupling> sorted(records.begin(), records.end());
  for (const auto& r : sorted) {
    if (!std::isfinite(r.coupling)) throw InvalidInput("coupling values must be finite");
  }
  const auto n_coupled = std::count_if(sorted.begin(), sorted.end(), [](const auto& r) { return r.coupled; });
  if (n_coupled == 0 || n_coupled == static_cast<std::ptrdiff_t>(sorted.size())) {
    throw InvalidInput("CONN needs both coupled and uncoupled records");
  }
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.coupling < b.coupling; });

  // With the threshold just below sorted[i], records [0, i) are called uncoupled.
  const auto n = static_cast<std::ptrdiff_t>(sorted.size());
  std::ptrdiff_t correct = n_coupled;
  ConnScore best{kNaN, -kInf};
  std::ptrdiff_t best_correct = -1;
  for (std::ptrdiff_t i = 0; i <= n; ++i) {
    const bool boundary = i == 0 || i == n || sorted[i - 1].coupling < sorted[i].coupling;
    if (boundary && correct > best_correct) {
      best_correct = correct;
      best.threshold = i == 0 ? -kInf : i == n ? kInf : 0.5 * (sorted[i - 1].coupling + sorted[i].coupling);
    }
    if (i < n) correct += sorted[i].coupled ? -1 : 1;
  }
  best.score = (static_cast<double>(best_correct) - 2.0 * static_cast<double>(n - best_correct)) / static_cast<double>(n);
  return best;
}

RealMatrix standardized_columns(const RealMatrix& x) {
  RealMatrix out = x.rowwise() - x.colwise().mean();
  for (Index c = 0; c < out.cols(); ++c) {
    const double norm = out.col(c).norm();
    if (norm > 0.0) out.col(c) /= norm;
  }
  return out;
}

LocResult loc_score(const RealMatrix& spatial_pair, const HeadModel& head, std::array<Index, 2> truth) {
  return loc_score(spatial_pair, head, standardized_columns(head.lead_fields), truth);
}

LocResult loc_score(const RealMatrix& spatial_pair, const HeadModel& head, const RealMatrix& standardized_leads,
                    std::array<Index, 2> truth) {
  if (spatial_pair.cols() != 2 || spatial_pair.rows() != head.channels()) {
    throw InvalidInput("LOC needs two spatial components with one entry per electrode");
  }
  if (standardized_leads.rows() != head.channels() || standardized_leads.cols() != head.size()) {
    throw InvalidInput("standardized lead fields do not match the head model");
  }
  for (Index t : truth) {
    if (t < 0 || t >= head.size()) throw InvalidInput("true lead-field index out of range");
  }
  const RealMatrix corr = (standardized_columns(spatial_pair).transpose() * standardized_leads).cwiseAbs();
  const double direct = corr(0, truth[0]) + corr(1, truth[1]);
  const double swapped = corr(0, truth[1]) + corr(1, truth[0]);
  const std::array<Index, 2> leads = best_leads(corr);

  LocResult out;
  out.lead_fields = swapped > direct ? std::array<Index, 2>{leads[1], leads[0]} : leads;
  for (std::size_t k = 0; k < 2; ++k) {
    out.predicted[k] = head.octants[static_cast<std::size_t>(out.lead_fields[k])];
    out.score += out.predicted[k] == head.octants[static_cast<std::size_t>(truth[k])] ? 0.5 : -0.5;
  }
  return out;
}

bool electrodes_in_octants(const HeadModel& head, std::pair<Index, Index> electrodes, std::array<Octant, 2> octants) {
  const Octant a = octant_of(head.electrodes.row(electrodes.first).transpose());
  const Octant b = octant_of(head.electrodes.row(electrodes.second).transpose());
  return (a == octants[0] && b == octants[1]) || (a == octants[1] && b == octants[0]);
}

std::vector<bool> coupling_labels(int n, double fraction, std::uint64_t seed) {
  if (n < 0 || !(fraction >= 0.0 && fraction <= 1.0)) throw InvalidInput("invalid label count or fraction");
  const auto n_coupled = static_cast<int>(std::lround(n * fraction));
  std::vector<bool> labels(static_cast<std::size_t>(n), false);
  std::fill_n(labels.begin(), n_coupled, true);
  Rng rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

void validate(const SweepConfig& config) {
  if (config.pr_values.empty()) throw InvalidInput("sweep needs at least one PR value");
  for (double pr : config.pr_values) {
    if (!(pr >= 0.2 && pr <= 0.9)) throw InvalidInput("sweep PR values must lie in [0.2, 0.9]");
  }
  if (config.n_datasets < 1) throw InvalidInput("sweep needs at least one dataset per PR");
  if (config.algos.empty() || config.ranks.empty()) throw InvalidInput("sweep needs algorithms and ranks");
  if (config.threads < 0) throw InvalidInput("thread count must be nonnegative");
  if (!(config.max_failure_fraction >= 0.0 && config.max_failure_fraction <= 1.0)) {
    throw InvalidInput("failure fraction must lie in [0, 1]");
  }
  if (!(config.coupled_fraction >= 0.0 && config.coupled_fraction <= 1.0)) {
    throw InvalidInput("coupled fraction must lie in [0, 1]");
  }
  const FrequencyAxis axis = frequency_axis(config.tensorize, config.scene.fs);
  band_bins(axis, config.coupling_band.lo_hz, config.coupling_band.hi_hz);
  const auto n_trials = static_cast<Index>(std::floor(config.scene.duration_s / config.tensorize.trial_len_s + 1e-9));
  if (n_trials < 2) throw InvalidInput("recording too short for two trials");
  for (Index r : config.ranks) {
    if (r < 2) throw InvalidInput("sweep ranks must be at least 2");
    validate_rank({config.scene.channels, axis.size(), n_trials}, r);
  }
}

std::vector<SweepPoint> aggregate(const std::vector<BenchmarkRecord>& records, const SweepConfig& config) {
  std::vector<SweepPoint> points;
  for (Algorithm algo : config.algos) {
    for (Index rank : config.ranks) {
      for (double pr : config.pr_values) {
        SweepPoint pt;
        pt.algo = algo;
        pt.rank = rank;
        pt.pr = pr;
        std::vector<LabelledCoupling> labelled;
        double ev = 0.0, loc = 0.0, hits = 0.0, c_on = 0.0, c_off = 0.0;
        int n_on = 0, n_off = 0;
        for (const auto& r : records) {
          if (r.algo != algo || r.rank != rank || r.pr != pr) continue;
          if (r.failed) {
            ++pt.n_failed;
            continue;
          }
          ++pt.n_ok;
          ev += r.ev;
          labelled.push_back({r.best_coupling, r.has_coupling});
          if (r.has_coupling) {
            ++n_on;
            c_on += r.best_coupling;
            loc += r.loc;
            hits += r.electrodes_hit ? 1.0 : 0.0;
          } else {
            ++n_off;
            c_off += r.best_coupling;
          }
        }
        pt.mean_ev = pt.n_ok > 0 ? ev / pt.n_ok : kNaN;
        pt.loc = n_on > 0 ? loc / n_on : kNaN;
        pt.electrode_hit_rate = n_on > 0 ? hits / n_on : kNaN;
        pt.mean_coupling_coupled = n_on > 0 ? c_on / n_on : kNaN;
        pt.mean_coupling_uncoupled = n_off > 0 ? c_off / n_off : kNaN;
        if (n_on > 0 && n_off > 0) {
          const ConnScore cs = conn_score(labelled);
          pt.conn = cs.score;
          pt.threshold = cs.threshold;
        } else {
          pt.conn = pt.threshold = kNaN;
        }
        points.push_back(pt);
      }
    }
  }
  return points;
}

namespace {

struct SweepContext {
  const SweepConfig& config;
  HeadModel head;
  RealMatrix standardized_leads;
  BinRange band;
  std::vector<std::vector<bool>> labels;  // per PR
};

std::vector<BenchmarkRecord> run_dataset(const SweepContext& ctx, int index) {
  const SweepConfig& cfg = ctx.config;
  const auto pr_index = static_cast<std::size_t>(index / cfg.n_datasets);
  const int dataset = index % cfg.n_datasets;
  const double pr = cfg.pr_values[pr_index];
  const bool coupled = ctx.labels[pr_index][static_cast<std::size_t>(dataset)];
  const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(index);

  std::vector<BenchmarkRecord> out;
  for (Algorithm algo : cfg.algos) {
    for (Index rank : cfg.ranks) {
      BenchmarkRecord r;
      r.dataset = index;
      r.pr = pr;
      r.has_coupling = coupled;
      r.algo = algo;
      r.rank = rank;
      r.seed = seed;
      r.achieved_pr = kNaN;
      r.ev = r.best_coupling = r.loc = kNaN;
      out.push_back(r);
    }
  }
  auto fail_all = [&](const std::string& message) {
    for (auto& r : out) {
      r.failed = true;
      r.error = message;
    }
  };

  SourceScene scene;
  ComplexTensor x;
  try {
    scene = make_scene(cfg.scene, ctx.head, coupled, pr, seed);
    const RenderedScene rendered = render_scene(scene, ctx.head, cfg.scene.duration_s, cfg.scene.fs);
    for (auto& r : out) r.achieved_pr = rendered.achieved_pr;
    x = tensorize_recording(rendered.data, cfg.scene.fs, cfg.tensorize);
  } catch (const GenerationFailure& e) {
    fail_all(e.what());
    return out;
  }

  std::optional<std::array<Octant, 2>> truth_octants;
  if (scene.coupled) {
    const auto& lf = scene.coupled->lead_fields;
    truth_octants = std::array<Octant, 2>{ctx.head.octants[static_cast<std::size_t>(lf[0])],
                                          ctx.head.octants[static_cast<std::size_t>(lf[1])]};
  }

  MultiInitOptions opts = cfg.fit;
  opts.band = ctx.band;
  opts.fit.seed = child_seed(seed, kFitTag);
  for (auto& r : out) {
    r.true_octants = truth_octants;
    try {
      const MultiInitResult fit = multi_init_fit(x, r.rank, r.algo, opts);
      const ComponentSignals signals = component_signals(fit.model);
      r.ev = fit.report.explained_variance;
      r.iterations = fit.report.iterations;
      r.best_coupling = fit.pair.coupling;

      RealMatrix pair(signals.spatial.rows(), 2);
      pair.col(0) = signals.spatial.col(fit.pair.i);
      pair.col(1) = signals.spatial.col(fit.pair.j);
      if (scene.coupled) {
        const LocResult loc = loc_score(pair, ctx.head, ctx.standardized_leads, scene.coupled->lead_fields);
        r.loc = loc.score;
        r.predicted_octants = loc.predicted;
      } else {
        const RealMatrix corr = (standardized_columns(pair).transpose() * ctx.standardized_leads).cwiseAbs();
        const auto leads = best_leads(corr);
        r.predicted_octants = std::array<Octant, 2>{ctx.head.octants[static_cast<std::size_t>(leads[0])],
                                                    ctx.head.octants[static_cast<std::size_t>(leads[1])]};
      }
      const ConnectivityMap map = scalp_map(signals, fit.pair.i, fit.pair.j, ctx.band);
      r.strongest_electrodes = strongest_electrodes(map.matrix);
      r.electrodes_hit = truth_octants && electrodes_in_octants(ctx.head, r.strongest_electrodes, *truth_octants);
    } catch (const NumericalFailure& e) {
      r.failed = true;
      r.error = e.what();
    }
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config, const RecordCallback& on_record) {
  validate(config);
  SweepContext ctx{config, build_head_model(config.scene), {}, {}, {}};
  ctx.standardized_leads = standardized_columns(ctx.head.lead_fields);
  ctx.band = band_bins(frequency_axis(config.tensorize, config.scene.fs), config.coupling_band.lo_hz,
                       config.coupling_band.hi_hz);
  for (std::size_t p = 0; p < config.pr_values.size(); ++p) {
    ctx.labels.push_back(coupling_labels(config.n_datasets, config.coupled_fraction,
                                         child_seed(config.base_seed, kLabelTag + p)));
  }

  const int total = config.n_datasets * static_cast<int>(config.pr_values.size());
  std::vector<std::vector<BenchmarkRecord>> slots(static_cast<std::size_t>(total));
  std::atomic<int> next{0};
  std::mutex mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (int i = next++; i < total; i = next++) {
      try {
        auto records = run_dataset(ctx, i);
        std::lock_guard lock(mutex);
        if (on_record) {
          for (const auto& r : records) on_record(r);
        }
        slots[static_cast<std::size_t>(i)] = std::move(records);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = total;
      }
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int n_threads = std::min(total, config.threads > 0 ? config.threads : static_cast<int>(hw));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);

  SweepResult result;
  int failed_datasets = 0;
  for (auto& slot : slots) {
    if (std::any_of(slot.begin(), slot.end(), [](const auto& r) { return r.failed; })) ++failed_datasets;
    for (auto& r : slot) {
      if (r.failed) warn("dataset " + std::to_string(r.dataset) + " (" + to_string(r.algo) + "): " + r.error);
      result.records.push_back(std::move(r));
    }
  }
  if (failed_datasets > config.max_failure_fraction * total) {
    throw NumericalFailure("sweep aborted: " + std::to_string(failed_datasets) + " of " + std::to_string(total) +
                               " datasets failed",
                           0);
  }
  result.points = aggregate(result.records, config);
  return result;
}

}  // namespace ctfconn
