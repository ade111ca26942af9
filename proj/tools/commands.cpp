#include "commands.hpp"

#include <CLI11.hpp>

#include <map>
#include <utility>

#include "ctfconn/connectivity.hpp"
#include "ctfconn/errors.hpp"
#include "ctfconn/svg.hpp"

namespace ctfconn::cli {

namespace fs = std::filesystem;

namespace {

FrequencyAxis axis_from_meta(const Json& meta, const std::string& what) {
  const auto it = meta.find("hz");
  if (it == meta.end() || !it->is_array()) throw InvalidInput(what + " lacks its frequency axis (meta.hz)");
  FrequencyAxis axis;
  axis.hz = it->get<std::vector<double>>();
  const auto bins = meta.find("bins");
  if (bins == meta.end() || !bins->is_array() || bins->size() != axis.hz.size()) {
    throw InvalidInput(what + " lacks the DFT bins of its frequency axis (meta.bins)");
  }
  axis.bins = bins->get<std::vector<Index>>();
  return axis;
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory (" + ec.message() + ")", parent.string());
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return prefix.parent_path() / (prefix.filename().string() + suffix);
}

std::vector<fs::path> write_plots(const std::vector<SweepPoint>& points, const fs::path& out_dir) {
  std::map<std::pair<std::string, Index>, std::vector<const SweepPoint*>> groups;
  std::vector<std::pair<std::string, Index>> order;
  for (const auto& p : points) {
    const auto key = std::make_pair(std::string(to_string(p.algo)), p.rank);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&p);
  }
  std::vector<fs::path> written;
  fs::create_directories(out_dir);
  for (const auto& key : order) {
    const auto& pts = groups[key];
    const std::string tag = key.first + "_R" + std::to_string(key.second);
    struct Metric {
      const char* name;
      const char* label;
      double SweepPoint::*field;
      std::optional<double> chance;
    };
    const Metric metrics[] = {{"ev", "EV", &SweepPoint::mean_ev, std::nullopt},
                              {"conn", "CONN", &SweepPoint::conn, -0.5},
                              {"loc", "LOC", &SweepPoint::loc, -0.5}};
    for (const auto& m : metrics) {
      PlotSeries s{tag, {}, {}};
      for (const SweepPoint* p : pts) {
        s.x.push_back(p->pr);
        s.y.push_back(p->*(m.field));
      }
      const fs::path path = out_dir / (tag + "_" + m.name + ".svg");
      write_file(path, svg_line_plot(std::string(m.label) + " vs PR (" + key.first + ", R=" + std::to_string(key.second) + ")",
                                     "power ratio", m.label, {s}, m.chance));
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace

Band parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw InvalidInput("band must be given as lo:hi, got '" + text + "'");
  Band b;
  try {
    std::size_t used = 0;
    b.lo_hz = std::stod(text.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("lo");
    const std::string hi = text.substr(colon + 1);
    b.hi_hz = std::stod(hi, &used);
    if (used != hi.size()) throw std::invalid_argument("hi");
  } catch (const std::logic_error&) {
    throw InvalidInput("band must be given as lo:hi, got '" + text + "'");
  }
  if (!(b.lo_hz <= b.hi_hz)) throw InvalidInput("band must satisfy lo <= hi");
  return b;
}

void cmd_gen(const RunConfig& config, const fs::path& out) {
  validate(config);
  const HeadModel head = build_head_model(config.scene);
  const SourceScene scene = make_scene(config.scene, head, config.has_coupling, config.pr, config.seed);
  const RenderedScene rendered = render_scene(scene, head, config.scene.duration_s, config.scene.fs);

  const Json settings = to_json(config);
  Recording rec{rendered.data, config.scene.fs, Json::object()};
  rec.meta["settings"] = settings["scene"];
  rec.meta["scene"] = scene_to_json(scene);
  rec.meta["achieved_pr"] = rendered.achieved_pr;
  rec.meta["coupled_gain"] = rendered.coupled_gain;
  rec.meta["config_hash"] = config_hash(settings["scene"]);
  ensure_parent(out);
  write_container(out, recording_container(rec));

  Json descriptor = rec.meta;
  if (scene.coupled) {
    Json truth = Json::array();
    for (Index lf : scene.coupled->lead_fields) {
      truth.push_back({{"lead_field", lf},
                       {"position", {head.source_positions(lf, 0), head.source_positions(lf, 1), head.source_positions(lf, 2)}},
                       {"octant", octant_name(head.octants[static_cast<std::size_t>(lf)])}});
    }
    descriptor["coupled_sources"] = truth;
  }
  write_file(with_suffix(out, ".scene.json"), descriptor.dump(2) + "\n");
}

void cmd_tensorize(const RunConfig& config, const fs::path& recording, const fs::path& out) {
  const Recording rec = recording_from_container(read_container(recording));
  const ComplexTensor x = tensorize_recording(rec.data, rec.fs, config.tensorize);
  const FrequencyAxis axis = frequency_axis(config.tensorize, rec.fs);
  const Json settings = to_json(config);
  Json meta;
  meta["fs"] = rec.fs;
  meta["hz"] = axis.hz;
  meta["bins"] = axis.bins;
  meta["trial_samples"] = axis.trial_samples;
  meta["tensorize"] = settings["tensorize"];
  meta["config_hash"] = config_hash(settings["tensorize"]);
  if (rec.meta.contains("scene")) meta["scene"] = rec.meta["scene"];
  ensure_parent(out);
  write_container(out, tensor_container(x, meta));
}

Json cmd_fit(const RunConfig& config, const fs::path& tensor, const fs::path& out) {
  const Container c = read_container(tensor);
  const ComplexTensor x = tensor_from_container(c);
  const FrequencyAxis axis = axis_from_meta(c.meta, "tensor container");
  if (axis.size() != x.frequencies()) throw InvalidInput("tensor frequency axis does not match its data");
  const BinRange band = band_bins(axis, config.conn_band.lo_hz, config.conn_band.hi_hz);
  validate_rank(x.dims(), config.rank);

  Json report;
  AnyModel model;
  if (config.rank >= 2) {
    MultiInitOptions opts = config.fit;
    opts.band = band;
    MultiInitResult fit = multi_init_fit(x, config.rank, config.algo, opts);
    report = to_json(fit.report);
    report["selected_run"] = fit.selected_run;
    report["run_coupling"] = fit.run_coupling;
    report["pair"] = {{"i", fit.pair.i}, {"j", fit.pair.j}, {"coupling", fit.pair.coupling}};
    model = std::move(fit.model);
  } else if (config.algo == Algorithm::parafac) {
    auto fit = fit_parafac(x, config.rank, config.fit.fit);
    report = to_json(fit.report);
    model = std::move(fit.model);
  } else {
    auto fit = fit_parafac2(x, config.rank, config.fit.fit);
    report = to_json(fit.report);
    model = std::move(fit.model);
  }
  report["final_loss"] = report["loss"].empty() ? report["initial_loss"] : report["loss"].back();
  report.erase("loss");
  report["algo"] = to_string(config.algo);
  report["rank"] = config.rank;

  Json meta;
  meta["hz"] = axis.hz;
  meta["bins"] = axis.bins;
  if (c.meta.contains("fs")) meta["fs"] = c.meta["fs"];
  meta["fit"] = to_json(config)["fit"];
  meta["report"] = report;
  ensure_parent(out);
  write_container(out, model_container(model, meta));
  return report;
}

ConnOutputs cmd_conn(const fs::path& model_path, Band band, const fs::path& out_prefix) {
  const Container c = read_container(model_path);
  const AnyModel model = model_from_container(c);
  const BinRange bins = band_bins(axis_from_meta(c.meta, "model container"), band.lo_hz, band.hi_hz);
  const ComponentSignals signals = component_signals(model);
  if (signals.rank() < 2) throw InvalidInput("connectivity needs a model with at least two components");
  const ComponentPair pair = strongest_pair(signals, bins);
  const ConnectivityMap map = scalp_map(signals, pair.i, pair.j, bins);
  const std::vector<int> labels = default_regions(electrode_cap(signals.spatial.rows()));
  const RealMatrix grouped = region_group(map.matrix, labels, kRegionCount);

  ConnOutputs out{with_suffix(out_prefix, ".csv"), with_suffix(out_prefix, "_regions.csv"),
                  with_suffix(out_prefix, ".svg"), with_suffix(out_prefix, "_regions.svg")};
  ensure_parent(out.matrix_csv);
  char title[160];
  std::snprintf(title, sizeof(title), "Components %ld-%ld, %.4g-%.4g Hz, coupling %.3f", static_cast<long>(pair.i),
                static_cast<long>(pair.j), band.lo_hz, band.hi_hz, pair.coupling);
  write_file(out.matrix_csv, matrix_csv(map.matrix));
  write_file(out.regions_csv, matrix_csv(grouped));
  write_file(out.matrix_svg, svg_heatmap(map.matrix, title));
  write_file(out.regions_svg, svg_heatmap(grouped, title, region_names()));
  return out;
}

SweepResult cmd_bench(const RunConfig& config, const fs::path& out_dir, std::ostream& log) {
  validate(config);
  const SweepConfig sweep = sweep_config(config);
  const std::size_t total = sweep.pr_values.size() * static_cast<std::size_t>(sweep.n_datasets) *
                            sweep.algos.size() * sweep.ranks.size();
  std::size_t done = 0;
  SweepResult result = run_sweep(sweep, [&](const BenchmarkRecord& r) {
    ++done;
    log << "[" << done << "/" << total << "] dataset " << r.dataset << " pr " << r.pr << " " << to_string(r.algo)
        << " R=" << r.rank << (r.failed ? " failed" : "") << '\n'
        << std::flush;
  });
  fs::create_directories(out_dir);
  write_file(out_dir / "records.csv", records_csv(result.records));
  Json summary;
  summary["config"] = to_json(config);
  summary["points"] = Json::array();
  for (const auto& p : result.points) summary["points"].push_back(to_json(p));
  write_file(out_dir / "summary.json", summary.dump(2) + "\n");
  write_plots(result.points, out_dir);
  return result;
}

std::vector<fs::path> cmd_plot(const fs::path& summary_path, const fs::path& out_dir) {
  Json summary;
  try {
    summary = Json::parse(read_file(summary_path));
  } catch (const Json::parse_error& e) {
    throw FormatError(summary_path.string() + ": malformed summary: " + e.what(), e.byte);
  }
  std::vector<SweepPoint> points;
  if (!summary.contains("points") || !summary["points"].is_array()) {
    throw InvalidInput(summary_path.string() + ": summary has no points");
  }
  for (const auto& p : summary["points"]) points.push_back(sweep_point_from_json(p));
  return write_plots(points, out_dir);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complex tensor factorisation and phase-synchronisation connectivity"};
  app.require_subcommand(1);
  std::string config_path, out_path, algo, band_text, input;
  std::optional<std::uint64_t> seed;
  std::optional<Index> rank;

  app.add_option("--config", config_path, "JSON run configuration (defaults when omitted)");
  auto* gen = app.add_subcommand("gen", "simulate a recording and its ground-truth scene");
  auto* tensorize = app.add_subcommand("tensorize", "recording -> channel x frequency x trial tensor");
  auto* fit = app.add_subcommand("fit", "fit PARAFAC / PARAFAC2 to a tensor");
  auto* conn = app.add_subcommand("conn", "scalp connectivity map of a fitted model");
  auto* bench = app.add_subcommand("bench", "power-ratio sweep with CONN / LOC scoring");
  auto* plot = app.add_subcommand("plot", "redraw sweep plots from summary.json");

  for (auto* sub : {gen, tensorize, fit, conn, bench, plot}) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", out_path, "output path")->required();
  }
  for (auto* sub : {gen, fit, bench}) sub->add_option("--seed", seed, "override the seed of this step");
  tensorize->add_option("recording", input, "recording container")->required();
  fit->add_option("tensor", input, "tensor container")->required();
  fit->add_option("--algo", algo, "parafac or parafac2");
  fit->add_option("--rank", rank, "number of components");
  fit->add_option("--band", band_text, "coupling band lo:hi in Hz used for run selection");
  conn->add_option("model", input, "model container")->required();
  conn->add_option("--band", band_text, "band lo:hi in Hz");
  plot->add_option("summary", input, "summary.json of a sweep")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    RunConfig config = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (!algo.empty()) config.algo = parse_algorithm(algo);
    if (rank) config.rank = *rank;
    if (!band_text.empty()) config.conn_band = parse_band(band_text);
    if (seed) {
      if (gen->parsed()) config.seed = *seed;
      if (fit->parsed()) config.fit.fit.seed = *seed;
      if (bench->parsed()) config.sweep.base_seed = *seed;
    }
    if (!conn->parsed() && !plot->parsed()) validate(config);

    if (gen->parsed()) {
      cmd_gen(config, out_path);
    } else if (tensorize->parsed()) {
      cmd_tensorize(config, input, out_path);
    } else if (fit->parsed()) {
      out << cmd_fit(config, input, out_path).dump(2) << '\n';
    } else if (conn->parsed()) {
      const ConnOutputs o = cmd_conn(input, config.conn_band, out_path);
      out << o.matrix_csv.string() << '\n' << o.regions_csv.string() << '\n';
    } else if (bench->parsed()) {
      cmd_bench(config, out_path, err);
    } else if (plot->parsed()) {
      for (const auto& p : cmd_plot(input, out_path)) out << p.string() << '\n';
    }
    return kOk;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const GenerationFailure& e) {
    err << "generation failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kIo;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIo;
  }
}

}  // namespace ctfconn::cli
