#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ctfconn/benchmark.hpp"
#include "ctfconn/config.hpp"
#include "ctfconn/connectivity.hpp"
#include "ctfconn/errors.hpp"
#include "ctfconn/io.hpp"
#include "ctfconn/multi_init.hpp"
#include "ctfconn/tensorize.hpp"

namespace py = pybind11;
using namespace ctfconn;

namespace {

using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

ComplexTensor to_tensor(const ComplexArray& a) {
  if (a.ndim() != 3) throw InvalidInput("tensor must be a 3-D (channels, frequencies, trials) array");
  const auto v = a.unchecked<3>();
  ComplexTensor x({v.shape(0), v.shape(1), v.shape(2)});
  for (Index i = 0; i < v.shape(0); ++i)
    for (Index f = 0; f < v.shape(1); ++f)
      for (Index k = 0; k < v.shape(2); ++k) x(i, f, k) = v(i, f, k);
  return x;
}

ComplexArray from_tensor(const ComplexTensor& x) {
  ComplexArray a({x.channels(), x.frequencies(), x.trials()});
  auto v = a.mutable_unchecked<3>();
  for (Index i = 0; i < x.channels(); ++i)
    for (Index f = 0; f < x.frequencies(); ++f)
      for (Index k = 0; k < x.trials(); ++k) v(i, f, k) = x(i, f, k);
  return a;
}

RunConfig config_of(const std::string& json) {
  return json.empty() ? RunConfig{} : run_config_from_json(Json::parse(json));
}

py::dict model_dict(const AnyModel& model) {
  py::dict d;
  std::visit(
      [&](const auto& m) {
        d["A"] = m.A;
        d["P"] = m.P;
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, ParafacModel>) {
          d["algo"] = "parafac";
          d["Y"] = m.Y;
        } else {
          d["algo"] = "parafac2";
          d["H"] = m.H;
          d["Q"] = m.Q;
        }
      },
      model);
  return d;
}

AnyModel model_of(const py::dict& d) {
  const auto algo = d["algo"].cast<std::string>();
  const RealMatrix a = d["A"].cast<RealMatrix>();
  const ComplexMatrix p = d["P"].cast<ComplexMatrix>();
  if (parse_algorithm(algo) == Algorithm::parafac) return ParafacModel{a, p, d["Y"].cast<ComplexMatrix>()};
  return Parafac2Model{a, p, d["H"].cast<ComplexMatrix>(), d["Q"].cast<std::vector<ComplexMatrix>>()};
}

py::dict report_dict(const FitReport& r) {
  py::dict d;
  d["initial_loss"] = r.initial_loss;
  d["loss"] = r.loss;
  d["iterations"] = r.iterations;
  d["converged"] = r.converged;
  d["explained_variance"] = r.explained_variance;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Complex tensor factorisation and phase-synchronisation connectivity";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());
  py::register_exception<GenerationFailure>(m, "GenerationFailure", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  m.def("default_config", [] { return to_json(RunConfig{}).dump(); });
  m.def("normalize_config", [](const std::string& json) {
    const RunConfig c = config_of(json);
    validate(c);
    return to_json(c).dump();
  });

  m.def(
      "generate",
      [](const std::string& json) {
        const RunConfig c = config_of(json);
        validate(c);
        const HeadModel head = build_head_model(c.scene);
        const SourceScene scene = make_scene(c.scene, head, c.has_coupling, c.pr, c.seed);
        const RenderedScene r = render_scene(scene, head, c.scene.duration_s, c.scene.fs);
        py::dict truth;
        truth["scene"] = scene_to_json(scene).dump();
        truth["achieved_pr"] = r.achieved_pr;
        if (scene.coupled) {
          py::list octants;
          for (Index lf : scene.coupled->lead_fields) octants.append(octant_name(head.octants[std::size_t(lf)]));
          truth["lead_fields"] = std::vector<Index>(scene.coupled->lead_fields.begin(), scene.coupled->lead_fields.end());
          truth["octants"] = octants;
        }
        return py::make_tuple(r.data, c.scene.fs, truth);
      },
      py::arg("config") = "");

  m.def(
      "tensorize",
      [](const RealMatrix& recording, double fs, const std::string& json) {
        const RunConfig c = config_of(json);
        const FrequencyAxis axis = frequency_axis(c.tensorize, fs);
        return py::make_tuple(from_tensor(tensorize_recording(recording, fs, c.tensorize)), axis.hz);
      },
      py::arg("recording"), py::arg("fs"), py::arg("config") = "");

  m.def(
      "fit",
      [](const ComplexArray& tensor, Index rank, const std::string& algo, int max_iters, double tol, std::uint64_t seed,
         int n_starts) {
        const ComplexTensor x = to_tensor(tensor);
        FitOptions o{max_iters, tol, seed, n_starts};
        py::gil_scoped_release release;
        AnyModel model;
        FitReport report;
        if (parse_algorithm(algo) == Algorithm::parafac) {
          auto f = fit_parafac(x, rank, o);
          model = std::move(f.model);
          report = f.report;
        } else {
          auto f = fit_parafac2(x, rank, o);
          model = std::move(f.model);
          report = f.report;
        }
        py::gil_scoped_acquire acquire;
        return py::make_tuple(model_dict(model), report_dict(report));
      },
      py::arg("tensor"), py::arg("rank"), py::arg("algo") = "parafac2", py::arg("max_iters") = 500,
      py::arg("tol") = 1e-8, py::arg("seed") = 0, py::arg("n_starts") = 1);

  m.def(
      "multi_init_fit",
      [](const ComplexArray& tensor, const std::string& json, std::pair<Index, Index> band) {
        const RunConfig c = config_of(json);
        const ComplexTensor x = to_tensor(tensor);
        MultiInitOptions o = c.fit;
        o.band = {band.first, band.second};
        const MultiInitResult r = multi_init_fit(x, c.rank, c.algo, o);
        py::dict report = report_dict(r.report);
        report["selected_run"] = r.selected_run;
        report["run_coupling"] = r.run_coupling;
        report["pair"] = py::make_tuple(r.pair.i, r.pair.j, r.pair.coupling);
        return py::make_tuple(model_dict(r.model), report);
      },
      py::arg("tensor"), py::arg("config"), py::arg("band"));

  m.def("reconstruct", [](const py::dict& model) {
    return from_tensor(std::visit([](const auto& mm) { return reconstruct(mm); }, model_of(model)));
  });
  m.def("explained_variance", [](const ComplexArray& tensor, const py::dict& model) {
    return explained_variance(to_tensor(tensor), model_of(model));
  });

  m.def("phase_lag_index", &phase_lag_index, py::arg("u"), py::arg("v"));
  m.def("sensor_pli", [](const ComplexArray& tensor) { return sensor_pli(to_tensor(tensor)); });
  m.def(
      "scalp_map",
      [](const py::dict& model, std::pair<Index, Index> band) {
        const ComponentSignals s = component_signals(model_of(model));
        const BinRange b{band.first, band.second};
        const ComponentPair p = strongest_pair(s, b);
        const ConnectivityMap map = scalp_map(s, p.i, p.j, b);
        return py::make_tuple(map.matrix, py::make_tuple(p.i, p.j, p.coupling));
      },
      py::arg("model"), py::arg("band"));

  m.def(
      "conn_score",
      [](const std::vector<double>& coupling, const std::vector<bool>& coupled) {
        if (coupling.size() != coupled.size()) throw InvalidInput("couplings and labels differ in length");
        std::vector<LabelledCoupling> recs;
        for (std::size_t i = 0; i < coupling.size(); ++i) recs.push_back({coupling[i], coupled[i]});
        const ConnScore s = conn_score(recs);
        return py::make_tuple(s.score, s.threshold);
      },
      py::arg("coupling"), py::arg("coupled"));

  m.def("load_tensor", [](const std::string& path) {
    const Container c = read_container(path);
    return py::make_tuple(from_tensor(tensor_from_container(c)), c.meta.dump());
  });
  m.def("load_recording", [](const std::string& path) {
    const Recording r = recording_from_container(read_container(path));
    return py::make_tuple(r.data, r.fs, r.meta.dump());
  });
  m.def("save_tensor", [](const std::string& path, const ComplexArray& tensor) {
    write_container(path, tensor_container(to_tensor(tensor)));
  });
}
