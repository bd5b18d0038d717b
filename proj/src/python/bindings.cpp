#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "mission/detector.hpp"
#include "mission/diversity.hpp"
#include "mission/metrics.hpp"
#include "mission/pipeline.hpp"
#include "mission/synth.hpp"

namespace py = pybind11;
using namespace mission;

namespace {

py::dict lexical_dict(const LexicalMetrics& m) {
  py::dict d;
  d["flesch_reading_ease"] = m.flesch_ease;
  d["flesch_kincaid_grade"] = m.flesch_kincaid_grade;
  d["linsear_write"] = m.linsear_write;
  d["automated_readability_index"] = m.ari;
  d["lexical_diversity_mtld"] = m.lexical_diversity_mtld;
  d["chars_per_tweet"] = m.chars_per_tweet;
  d["words_per_tweet"] = m.words_per_tweet;
  d["n_texts"] = m.n_texts;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "mission-profiler core";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() { return py::object(py::exception<Error>(m, "MissionError")); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto& type = error_type.get_stored();
      py::object exc = type(py::str(e.what()));
      exc.attr("stage") = e.stage();
      exc.attr("exit_code") = exit_code_for_stage(e.stage());
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  m.def("normalize_tweet", &normalize_tweet, py::arg("text"));

  m.def("shannon_entropy", py::overload_cast<const std::vector<double>&>(&shannon_entropy), py::arg("p"));
  m.def("assign_group", [](double h) { return group_name(assign_group(h)); }, py::arg("entropy"));
  m.def("group_boundaries", [] {
    const auto& b = group_boundaries();
    return std::vector<double>(b.begin(), b.end());
  });

  m.def("gini_index", [](const std::vector<double>& v) { return gini_index(v); }, py::arg("values"));
  m.def("normalized_burstiness", &normalized_burstiness, py::arg("r"), py::arg("n_events"));
  m.def(
      "burstiness",
      [](const std::vector<std::int64_t>& ts) -> py::object {
        auto b = burstiness(ts);
        if (!b) return py::none();
        py::dict d;
        d["b"] = b->b;
        d["r_cv"] = b->r_cv;
        d["n_events"] = b->n_events;
        return d;
      },
      py::arg("timestamps"));
  m.def("mtld", &mtld, py::arg("tokens"), py::arg("threshold") = 0.72);
  m.def(
      "readability",
      [](const std::vector<std::string>& texts) -> py::object {
        auto r = readability_metrics(texts);
        if (!r) return py::none();
        return lexical_dict(*r);
      },
      py::arg("texts"));

  m.def(
      "fleiss_kappa", [](const std::vector<std::vector<std::string>>& r) { return fleiss_kappa(r).kappa; },
      py::arg("ratings"));

  m.def(
      "synth",
      [](const std::string& out, std::uint64_t seed, std::size_t on_mission, std::size_t genuine) {
        const auto bundle = generate(default_synth_spec(on_mission, genuine), seed);
        bundle.write(out);
        std::ofstream(out + "/pipeline.json") << synth_run_config(bundle.k, seed).to_json();
      },
      py::arg("out"), py::arg("seed") = 42, py::arg("on_mission") = 100, py::arg("genuine") = 100);

  m.def(
      "run_pipeline",
      [](const std::string& config_path, const std::string& out, const std::string& until, bool force) {
        auto cfg = RunConfig::load(config_path);
        if (!out.empty()) cfg.out = out;
        RunOptions opts;
        auto st = stage_from_name(until);
        if (!st) throw Error("config", "unknown stage '" + until + "'");
        opts.until = *st;
        opts.force = force;
        PipelineResult res;
        {
          py::gil_scoped_release release;
          res = run_pipeline(cfg, opts);
        }
        return res.report.is_null() ? std::string("null") : res.report.dump();
      },
      py::arg("config"), py::arg("out") = "", py::arg("until") = "report", py::arg("force") = false);
}
