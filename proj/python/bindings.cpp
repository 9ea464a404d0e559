// Copyright 2026 The dcsurv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "dcsurv/collab.hpp"
#include "dcsurv/error.hpp"
#include "dcsurv/log.hpp"
#include "dcsurv/matching.hpp"
#include "dcsurv/metrics.hpp"
#include "dcsurv/pipeline.hpp"
#include "dcsurv/propensity.hpp"
#include "dcsurv/survival.hpp"
#include "dcsurv/synth.hpp"

namespace py = pybind11;
using namespace dcsurv;

namespace {

PropensityScores make_scores(std::vector<SampleId> ids, std::vector<double> scores) {
  if (ids.size() != scores.size()) throw DataError("ids and scores differ in length");
  PropensityScores s;
  s.ids = std::move(ids);
  s.scores = std::move(scores);
  return s;
}

py::dict dataset_dict(const Dataset& d) {
  py::dict out;
  out["ids"] = d.ids();
  out["time"] = d.time();
  out["event"] = d.event();
  out["treat"] = d.treatment();
  out["covariates"] = d.covariates();
  out["columns"] = d.covariate_names();
  return out;
}

py::dict row_dict(const ReportRow& r) {
  auto pair = [](const Summary& s) { return py::make_tuple(s.mean, s.sd); };
  py::dict d;
  d["method"] = r.method;
  d["sample_size"] = pair(r.sample_size);
  d["masmd"] = pair(r.masmd);
  d["inconsistency"] = pair(r.inconsistency);
  d["gap_treated"] = pair(r.gap_treated);
  d["gap_control"] = pair(r.gap_control);
  return d;
}

}  // namespace

PYBIND11_MODULE(_dcsurv, m) {
  m.doc() = "Collaborative propensity-matched survival analysis";

  auto base = py::register_exception<Error>(m, "DcsurvError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  auto integrity = py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
  py::register_exception<PrivacyError>(m, "PrivacyError", integrity.ptr());

  m.def("set_quiet", &dcsurv::set_quiet);

  m.def(
      "generate",
      [](std::size_t n, std::uint64_t seed, double lambda, double shape, double gamma) {
        synth::SynthConfig cfg;
        cfg.n = n;
        cfg.seed = seed;
        cfg.lambda = lambda;
        cfg.shape = shape;
        cfg.gamma = gamma;
        cfg.validate();
        return dataset_dict(synth::generate(cfg).dataset);
      },
      py::arg("n") = 1000, py::arg("seed") = 0, py::arg("lam") = 2.0, py::arg("shape") = 2.0,
      py::arg("gamma") = -1.0);

  py::enum_<Arm>(m, "Arm").value("treated", Arm::kTreated).value("control", Arm::kControl);

  py::class_<SurvivalCurve>(m, "SurvivalCurve")
      .def_readonly("times", &SurvivalCurve::times)
      .def_readonly("survival", &SurvivalCurve::survival)
      .def_readonly("at_risk", &SurvivalCurve::at_risk)
      .def_readonly("events", &SurvivalCurve::events)
      .def_readonly("subjects", &SurvivalCurve::subjects)
      .def("__call__", [](const SurvivalCurve& c, double t) { return eval_step(c, t); });

  m.def(
      "kaplan_meier",
      [](const std::vector<double>& times, const std::vector<int>& events) {
        return kaplan_meier(times, events);
      },
      py::arg("times"), py::arg("events"));
  m.def("gap", &gap, py::arg("curve"), py::arg("reference"));

  py::class_<LogisticModel>(m, "LogisticModel")
      .def_readonly("intercept", &LogisticModel::intercept)
      .def_readonly("weights", &LogisticModel::weights)
      .def_readonly("converged", &LogisticModel::converged)
      .def_readonly("iterations", &LogisticModel::iterations)
      .def_readonly("quasi_separated", &LogisticModel::quasi_separated)
      .def("predict", [](const LogisticModel& model, const Matrix& x) {
        std::vector<SampleId> ids(static_cast<std::size_t>(x.rows()));
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<SampleId>(i);
        return score(model, x, ids).scores;
      });
  m.def(
      "fit_logistic",
      [](const Matrix& x, const std::vector<int>& z) { return fit_logistic(x, z); },
      py::arg("features"), py::arg("z"));

  m.def(
      "caliper_match",
      [](std::vector<SampleId> ids, std::vector<double> scores, const std::vector<int>& z,
         double caliper_multiplier) {
        MatchConfig cfg;
        cfg.caliper_multiplier = caliper_multiplier;
        const auto set = caliper_match(make_scores(std::move(ids), std::move(scores)), z, cfg);
        std::vector<std::pair<SampleId, SampleId>> pairs;
        for (const auto& p : set.pairs) pairs.emplace_back(p.treated, p.control);
        return py::make_tuple(pairs, set.caliper_width);
      },
      py::arg("ids"), py::arg("scores"), py::arg("z"), py::arg("caliper_multiplier") = 0.2);

  m.def(
      "inconsistency",
      [](std::vector<SampleId> ids, std::vector<double> scores, std::vector<SampleId> ref_ids,
         std::vector<double> ref_scores) {
        return inconsistency(make_scores(std::move(ids), std::move(scores)),
                             make_scores(std::move(ref_ids), std::move(ref_scores)));
      },
      py::arg("ids"), py::arg("scores"), py::arg("ref_ids"), py::arg("ref_scores"));

  m.def(
      "truncated_svd",
      [](const Matrix& a, int rank) {
        const auto svd = truncated_svd(a, rank);
        return py::make_tuple(svd.u, svd.s, svd.v);
      },
      py::arg("a"), py::arg("rank"));
  m.def("pseudoinverse", &pseudoinverse, py::arg("a"), py::arg("rel_tol") = -1.0);

  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::filesystem::path& base_dir) {
        const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json), base_dir);
        ExperimentReport report;
        {
          py::gil_scoped_release release;
          report = run_experiment(cfg);
        }
        py::dict out;
        py::list rows;
        for (const auto& r : report.table.rows) rows.append(row_dict(r));
        out["rows"] = rows;
        out["repetitions"] = report.table.repetitions;
        out["failures"] = report.table.failures;
        out["digest"] = report.table.config_digest;
        out["text"] = report_to_text(report.table);
        return out;
      },
      py::arg("config_json"), py::arg("base_dir") = std::filesystem::path{});
}
