#include <cmath>
#include <limits>

#include "ctfconn/errors.hpp"
#include "ctfconn/synth.hpp"

namespace ctfconn {

namespace {

enum StreamTag : std::uint64_t { kSceneDraw = 1, kCoupledSim = 2, kSensorNoise = 3, kNoiseBase = 1000 };

constexpr Index kMixChunk = 64;

}  // namespace

SourceScene make_scene(const SceneSettings& settings, const HeadModel& head, bool has_coupling, double pr,
                       std::uint64_t seed) {
  if (head.size() < 2) throw InvalidInput("head model needs at least two lead fields");
  Rng rng(child_seed(seed, kSceneDraw));
  std::uniform_int_distribution<Index> pick(0, head.size() - 1);

  SourceScene scene;
  scene.seed = seed;
  scene.has_coupling = has_coupling;
  scene.sensor_noise_frac = settings.sensor_noise_frac;
  if (has_coupling) {
    if (!(pr > 0.0 && pr < 1.0)) throw InvalidInput("power ratio must lie in (0, 1)");
    CoupledSources c;
    c.pair = design_coupled_pair(settings.source_band, settings.fs, settings.ar_order, rng);
    c.lead_fields[0] = pick(rng);
    do {
      c.lead_fields[1] = pick(rng);
    } while (c.lead_fields[1] == c.lead_fields[0]);
    scene.coupled = std::move(c);
    scene.pr = pr;
  }
  scene.noise_sources.resize(static_cast<std::size_t>(settings.n_noise_sources));
  for (std::size_t n = 0; n < scene.noise_sources.size(); ++n) {
    scene.noise_sources[n] = {pick(rng), child_seed(seed, kNoiseBase + n)};
  }
  return scene;
}

RenderedScene render_scene(const SourceScene& scene, const HeadModel& head, double duration_s, double fs) {
  if (scene.has_coupling != scene.coupled.has_value()) {
    throw InvalidInput("scene coupling flag and coupled sources disagree");
  }
  if (!scene.has_coupling && scene.pr.has_value()) {
    throw InvalidInput("a power ratio was requested for a scene without coupled sources");
  }
  if (scene.has_coupling && !(scene.pr.has_value() && *scene.pr > 0.0 && *scene.pr < 1.0)) {
    throw InvalidInput("coupled scene needs a power ratio in (0, 1)");
  }
  if (!(scene.sensor_noise_frac >= 0.0)) throw InvalidInput("sensor noise fraction must be nonnegative");
  const auto n_samples = static_cast<Index>(std::llround(duration_s * fs));
  if (n_samples < 64) throw InvalidInput("recording shorter than 64 samples");
  const Index m = head.channels();
  const auto check_index = [&](Index i) {
    if (i < 0 || i >= head.size()) throw InvalidInput("lead-field index out of range");
  };

  // Background: pink-noise sources through their lead fields, mixed in chunks.
  RealMatrix background = RealMatrix::Zero(m, n_samples);
  const auto n_noise = static_cast<Index>(scene.noise_sources.size());
  for (Index start = 0; start < n_noise; start += kMixChunk) {
    const Index count = std::min(kMixChunk, n_noise - start);
    RealMatrix mixing(m, count);
    RealMatrix sources(count, n_samples);
    for (Index c = 0; c < count; ++c) {
      const NoiseSource& src = scene.noise_sources[static_cast<std::size_t>(start + c)];
      check_index(src.lead_field);
      mixing.col(c) = head.lead_fields.col(src.lead_field);
      Rng rng(src.seed);
      sources.row(c) = pink_noise(n_samples, rng).transpose();
    }
    background.noalias() += mixing * sources;
  }
  const double background_power = background.squaredNorm();

  RenderedScene out;
  out.data = background;
  out.achieved_pr = std::numeric_limits<double>::quiet_NaN();
  if (scene.coupled) {
    const CoupledSources& c = *scene.coupled;
    check_index(c.lead_fields[0]);
    check_index(c.lead_fields[1]);
    Rng rng(child_seed(scene.seed, kCoupledSim));
    SourcePair s = simulate_coupled_pair(c.pair, n_samples, rng);
    // Each coupled source is scaled to unit RMS before the PR gain.
    for (RealVector* v : {&s.s_i, &s.s_j}) {
      const double rms = std::sqrt(v->squaredNorm() / static_cast<double>(v->size()));
      if (rms > 0.0) *v /= rms;
    }
    RealMatrix coupled = head.lead_fields.col(c.lead_fields[0]) * s.s_i.transpose() +
                         head.lead_fields.col(c.lead_fields[1]) * s.s_j.transpose();
    const double coupled_power = coupled.squaredNorm();
    const double pr = *scene.pr;
    const double gain =
        background_power > 0.0 ? std::sqrt(pr * background_power / ((1.0 - pr) * coupled_power)) : 1.0;
    coupled *= gain;
    out.data += coupled;
    out.coupled_gain = gain;
    const double scaled = gain * gain * coupled_power;
    out.achieved_pr = scaled / (scaled + background_power);
    out.coupled_sources.resize(2, n_samples);
    out.coupled_sources.row(0) = gain * s.s_i.transpose();
    out.coupled_sources.row(1) = gain * s.s_j.transpose();
  }

  if (scene.sensor_noise_frac > 0.0) {
    Rng rng(child_seed(scene.seed, kSensorNoise));
    std::normal_distribution<double> normal(0.0, 1.0);
    RealMatrix noise(m, n_samples);
    for (Index t = 0; t < n_samples; ++t)
      for (Index e = 0; e < m; ++e) noise(e, t) = normal(rng);
    const double signal_power = out.data.squaredNorm();
    noise *= std::sqrt(scene.sensor_noise_frac * signal_power / noise.squaredNorm());
    out.data += noise;
  }
  return out;
}

}  // namespace ctfconn
