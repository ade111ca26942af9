#include "ctfconn/config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <set>

#include "ctfconn/errors.hpp"

namespace ctfconn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reads the keys of one JSON object, remembering which were consumed so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw InvalidInput("config section '" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = doc_.find(key);
    if (it == doc_.end()) return;
    out = convert<T>(*it, key);
  }

  void read_algo(const std::string& key, Algorithm& out) {
    std::string name = to_string(out);
    read(key, name);
    out = parse_algorithm(name);
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw InvalidInput("unknown config key '" + path_ + "." + key + "'");
    }
  }

 private:
  template <typename T>
  T convert(const Json& v, const std::string& key) const {
    const std::string where = path_ + "." + key;
    if constexpr (std::is_same_v<T, Json>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw InvalidInput("config key '" + where + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw InvalidInput("config key '" + where + "' must be an integer");
      if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
        throw InvalidInput("config key '" + where + "' must be nonnegative");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw InvalidInput("config key '" + where + "' must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw InvalidInput("config key '" + where + "' must be a string");
    } else {
      if (!v.is_array()) throw InvalidInput("config key '" + where + "' must be an array");
      T out;
      for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(convert<typename T::value_type>(v[i], key + "[" + std::to_string(i) + "]"));
      }
      return out;
    }
    return v.get<T>();
  }

  const Json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

void check_band_hz(const Band& b, double fs, const std::string& where) {
  require(b.lo_hz > 0.0 && b.lo_hz < b.hi_hz && b.hi_hz < fs / 2.0,
          where + " must satisfy 0 < band_lo_hz < band_hi_hz < fs/2");
}

void append_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double number_or_nan(const Json& v) { return v.is_null() ? kNaN : v.get<double>(); }

}  // namespace

void validate(const RunConfig& c) {
  const SceneSettings& s = c.scene;
  require(s.channels >= 16, "scene.channels must be at least 16");
  require(s.n_lead_fields >= 8, "scene.n_lead_fields must be at least 8");
  require(s.n_noise_sources >= 0, "scene.n_noise_sources must be nonnegative");
  require(s.ar_order >= 2 && s.ar_order <= 64, "scene.ar_order must lie in [2, 64]");
  require(s.fs > 0.0, "scene.fs must be positive");
  require(s.duration_s > 0.0, "scene.duration_s must be positive");
  require(s.sensor_noise_frac >= 0.0, "scene.sensor_noise_frac must be nonnegative");
  check_band_hz(s.source_band, s.fs, "scene band");
  require(c.pr >= 0.2 && c.pr <= 0.9, "scene.pr must lie in [0.2, 0.9]");

  const FrequencyAxis axis = frequency_axis(c.tensorize, s.fs);
  const auto n_trials = static_cast<Index>(std::floor(s.duration_s / c.tensorize.trial_len_s + 1e-9));
  require(n_trials >= 2, "scene.duration_s must hold at least two trials");

  require(c.rank >= 1, "fit.rank must be at least 1");
  validate_rank({s.channels, axis.size(), n_trials}, c.rank);
  require(c.fit.n_runs >= 1 && c.fit.n_inits >= 1, "fit.n_runs and fit.n_inits must be at least 1");
  require(c.fit.burn_in >= 0, "fit.burn_in must be nonnegative");
  require(c.fit.fit.max_iters >= 1, "fit.max_iters must be at least 1");
  require(c.fit.fit.tol >= 0.0, "fit.tol must be nonnegative");

  band_bins(axis, c.conn_band.lo_hz, c.conn_band.hi_hz);
  validate(sweep_config(c));
}

Json to_json(const RunConfig& c) {
  Json doc;
  doc["scene"] = {{"channels", c.scene.channels},
                  {"n_lead_fields", c.scene.n_lead_fields},
                  {"n_noise_sources", c.scene.n_noise_sources},
                  {"ar_order", c.scene.ar_order},
                  {"band_lo_hz", c.scene.source_band.lo_hz},
                  {"band_hi_hz", c.scene.source_band.hi_hz},
                  {"fs", c.scene.fs},
                  {"duration_s", c.scene.duration_s},
                  {"sensor_noise_frac", c.scene.sensor_noise_frac},
                  {"head_seed", c.scene.head_seed},
                  {"pr", c.pr},
                  {"has_coupling", c.has_coupling},
                  {"seed", c.seed}};
  doc["tensorize"] = {{"trial_len_s", c.tensorize.trial_len_s},
                      {"freq_lo_hz", c.tensorize.freq_lo_hz},
                      {"freq_hi_hz", c.tensorize.freq_hi_hz},
                      {"freq_step_hz", c.tensorize.freq_step_hz}};
  doc["fit"] = {{"algo", to_string(c.algo)},
                {"rank", c.rank},
                {"n_runs", c.fit.n_runs},
                {"n_inits", c.fit.n_inits},
                {"burn_in", c.fit.burn_in},
                {"max_iters", c.fit.fit.max_iters},
                {"tol", c.fit.fit.tol},
                {"seed", c.fit.fit.seed}};
  doc["connectivity"] = {{"band_lo_hz", c.conn_band.lo_hz}, {"band_hi_hz", c.conn_band.hi_hz}};
  Json algos = Json::array();
  for (Algorithm a : c.sweep.algos) algos.push_back(to_string(a));
  doc["sweep"] = {{"pr_values", c.sweep.pr_values},
                  {"n_datasets", c.sweep.n_datasets},
                  {"algos", algos},
                  {"ranks", c.sweep.ranks},
                  {"duration_s", c.sweep.duration_s},
                  {"coupled_fraction", c.sweep.coupled_fraction},
                  {"base_seed", c.sweep.base_seed},
                  {"threads", c.sweep.threads},
                  {"max_failure_fraction", c.sweep.max_failure_fraction}};
  return doc;
}

RunConfig run_config_from_json(const Json& doc) {
  RunConfig c;
  Section top(doc, "config");
  auto section = [&](const std::string& name) {
    Json value = Json::object();
    top.read(name, value);
    return value;
  };

  {
    const Json scene_doc = section("scene");
    Section s(scene_doc, "scene");
    s.read("channels", c.scene.channels);
    s.read("n_lead_fields", c.scene.n_lead_fields);
    s.read("n_noise_sources", c.scene.n_noise_sources);
    s.read("ar_order", c.scene.ar_order);
    s.read("band_lo_hz", c.scene.source_band.lo_hz);
    s.read("band_hi_hz", c.scene.source_band.hi_hz);
    s.read("fs", c.scene.fs);
    s.read("duration_s", c.scene.duration_s);
    s.read("sensor_noise_frac", c.scene.sensor_noise_frac);
    s.read("head_seed", c.scene.head_seed);
    s.read("pr", c.pr);
    s.read("has_coupling", c.has_coupling);
    s.read("seed", c.seed);
    s.finish();
  }
  {
    const Json t_doc = section("tensorize");
    Section t(t_doc, "tensorize");
    t.read("trial_len_s", c.tensorize.trial_len_s);
    t.read("freq_lo_hz", c.tensorize.freq_lo_hz);
    t.read("freq_hi_hz", c.tensorize.freq_hi_hz);
    t.read("freq_step_hz", c.tensorize.freq_step_hz);
    t.finish();
  }
  {
    const Json f_doc = section("fit");
    Section f(f_doc, "fit");
    f.read_algo("algo", c.algo);
    f.read("rank", c.rank);
    f.read("n_runs", c.fit.n_runs);
    f.read("n_inits", c.fit.n_inits);
    f.read("burn_in", c.fit.burn_in);
    f.read("max_iters", c.fit.fit.max_iters);
    f.read("tol", c.fit.fit.tol);
    f.read("seed", c.fit.fit.seed);
    f.finish();
  }
  {
    const Json b_doc = section("connectivity");
    Section b(b_doc, "connectivity");
    b.read("band_lo_hz", c.conn_band.lo_hz);
    b.read("band_hi_hz", c.conn_band.hi_hz);
    b.finish();
  }
  {
    const Json w_doc = section("sweep");
    Section w(w_doc, "sweep");
    w.read("pr_values", c.sweep.pr_values);
    w.read("n_datasets", c.sweep.n_datasets);
    std::vector<std::string> algos;
    for (Algorithm a : c.sweep.algos) algos.push_back(to_string(a));
    w.read("algos", algos);
    c.sweep.algos.clear();
    for (const auto& a : algos) c.sweep.algos.push_back(parse_algorithm(a));
    w.read("ranks", c.sweep.ranks);
    w.read("duration_s", c.sweep.duration_s);
    w.read("coupled_fraction", c.sweep.coupled_fraction);
    w.read("base_seed", c.sweep.base_seed);
    w.read("threads", c.sweep.threads);
    w.read("max_failure_fraction", c.sweep.max_failure_fraction);
    w.finish();
  }
  top.finish();
  validate(c);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InvalidInput(path.string() + ": malformed JSON: " + e.what());
  }
  return run_config_from_json(doc);
}

SweepConfig sweep_config(const RunConfig& c) {
  SweepConfig s;
  s.scene = c.scene;
  s.scene.duration_s = c.sweep.duration_s;
  s.tensorize = c.tensorize;
  s.pr_values = c.sweep.pr_values;
  s.n_datasets = c.sweep.n_datasets;
  s.algos = c.sweep.algos;
  s.ranks = c.sweep.ranks;
  s.fit = c.fit;
  s.coupling_band = c.conn_band;
  s.coupled_fraction = c.sweep.coupled_fraction;
  s.base_seed = c.sweep.base_seed;
  s.threads = c.sweep.threads;
  s.max_failure_fraction = c.sweep.max_failure_fraction;
  return s;
}

namespace {

Json ar_json(const ArSource& s) {
  return {{"order", s.order}, {"coeffs", s.coeffs}, {"center_hz", s.center_hz}, {"pole_radius", s.pole_radius}};
}

ArSource ar_from_json(const Json& doc, const std::string& path) {
  ArSource s;
  Section r(doc, path);
  r.read("order", s.order);
  r.read("coeffs", s.coeffs);
  r.read("center_hz", s.center_hz);
  r.read("pole_radius", s.pole_radius);
  r.finish();
  require(static_cast<int>(s.coeffs.size()) == s.order, path + ": coefficient count differs from the order");
  return s;
}

}  // namespace

Json scene_to_json(const SourceScene& scene) {
  Json doc;
  doc["has_coupling"] = scene.has_coupling;
  doc["pr"] = scene.pr ? Json(*scene.pr) : Json(nullptr);
  doc["sensor_noise_frac"] = scene.sensor_noise_frac;
  doc["seed"] = scene.seed;
  if (scene.coupled) {
    const auto& c = *scene.coupled;
    doc["coupled"] = {{"lead_fields", {c.lead_fields[0], c.lead_fields[1]}},
                      {"source_i", ar_json(c.pair.source_i)},
                      {"source_j", ar_json(c.pair.source_j)},
                      {"h_ij", c.pair.h_ij},
                      {"h_ji", c.pair.h_ji}};
  } else {
    doc["coupled"] = nullptr;
  }
  Json noise = Json::array();
  for (const auto& n : scene.noise_sources) noise.push_back({n.lead_field, n.seed});
  doc["noise_sources"] = std::move(noise);
  return doc;
}

SourceScene scene_from_json(const Json& doc) {
  SourceScene scene;
  try {
    Section s(doc, "scene");
    s.read("has_coupling", scene.has_coupling);
    s.read("sensor_noise_frac", scene.sensor_noise_frac);
    s.read("seed", scene.seed);
    Json pr = nullptr, coupled = nullptr, noise = Json::array();
    s.read("pr", pr);
    s.read("coupled", coupled);
    s.read("noise_sources", noise);
    s.finish();
    if (!pr.is_null()) scene.pr = pr.get<double>();
    if (!coupled.is_null()) {
      CoupledSources c;
      Section cs(coupled, "scene.coupled");
      std::vector<Index> leads;
      Json si, sj;
      cs.read("lead_fields", leads);
      cs.read("source_i", si);
      cs.read("source_j", sj);
      cs.read("h_ij", c.pair.h_ij);
      cs.read("h_ji", c.pair.h_ji);
      cs.finish();
      require(leads.size() == 2, "scene.coupled.lead_fields must hold two indices");
      c.lead_fields = {leads[0], leads[1]};
      c.pair.source_i = ar_from_json(si, "scene.coupled.source_i");
      c.pair.source_j = ar_from_json(sj, "scene.coupled.source_j");
      scene.coupled = std::move(c);
    }
    for (const auto& n : noise) {
      require(n.is_array() && n.size() == 2, "scene.noise_sources entries must be [lead_field, seed]");
      scene.noise_sources.push_back({n[0].get<Index>(), n[1].get<std::uint64_t>()});
    }
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed scene descriptor: ") + e.what());
  }
  return scene;
}

Json to_json(const FitReport& report) {
  return {{"initial_loss", report.initial_loss},
          {"loss", report.loss},
          {"iterations", report.iterations},
          {"converged", report.converged},
          {"explained_variance", report.explained_variance}};
}

Json to_json(const SweepPoint& p) {
  return {{"algo", to_string(p.algo)},
          {"rank", p.rank},
          {"pr", p.pr},
          {"n_ok", p.n_ok},
          {"n_failed", p.n_failed},
          {"mean_ev", p.mean_ev},
          {"conn", p.conn},
          {"threshold", p.threshold},
          {"loc", p.loc},
          {"mean_coupling_coupled", p.mean_coupling_coupled},
          {"mean_coupling_uncoupled", p.mean_coupling_uncoupled},
          {"electrode_hit_rate", p.electrode_hit_rate}};
}

SweepPoint sweep_point_from_json(const Json& doc) {
  SweepPoint p;
  try {
    p.algo = parse_algorithm(doc.at("algo").get<std::string>());
    p.rank = doc.at("rank").get<Index>();
    p.pr = doc.at("pr").get<double>();
    p.n_ok = doc.at("n_ok").get<int>();
    p.n_failed = doc.at("n_failed").get<int>();
    p.mean_ev = number_or_nan(doc.at("mean_ev"));
    p.conn = number_or_nan(doc.at("conn"));
    p.threshold = number_or_nan(doc.at("threshold"));
    p.loc = number_or_nan(doc.at("loc"));
    p.mean_coupling_coupled = number_or_nan(doc.at("mean_coupling_coupled"));
    p.mean_coupling_uncoupled = number_or_nan(doc.at("mean_coupling_uncoupled"));
    p.electrode_hit_rate = number_or_nan(doc.at("electrode_hit_rate"));
  } catch (const Json::exception& e) {
    throw InvalidInput(std::string("malformed sweep point: ") + e.what());
  }
  return p;
}

std::string records_csv(const std::vector<BenchmarkRecord>& records) {
  std::string out =
      "dataset,pr,has_coupling,algo,rank,seed,achieved_pr,failed,ev,best_coupling,iterations,"
      "predicted_octant_1,predicted_octant_2,true_octant_1,true_octant_2,loc,electrode_1,electrode_2,"
      "electrodes_hit\n";
  for (const auto& r : records) {
    out += std::to_string(r.dataset) + ',';
    append_number(out, r.pr);
    out += std::string(",") + (r.has_coupling ? "1" : "0") + ',' + to_string(r.algo) + ',' + std::to_string(r.rank) +
           ',' + std::to_string(r.seed) + ',';
    append_number(out, r.achieved_pr);
    out += std::string(",") + (r.failed ? "1" : "0") + ',';
    append_number(out, r.ev);
    out += ',';
    append_number(out, r.best_coupling);
    out += ',' + std::to_string(r.iterations) + ',';
    for (const auto& o : {r.predicted_octants, r.true_octants}) {
      out += o ? octant_name((*o)[0]) + ',' + octant_name((*o)[1]) + ',' : std::string(",,");
    }
    append_number(out, r.loc);
    out += ',' + std::to_string(r.strongest_electrodes.first) + ',' + std::to_string(r.strongest_electrodes.second) +
           ',' + (r.electrodes_hit ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace ctfconn
