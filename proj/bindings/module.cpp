// Copyright 2026 The ggsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ggsim/errors.hpp"
#include "ggsim/identity.hpp"
#include "ggsim/runner.hpp"

namespace py = pybind11;
using namespace ggsim;

namespace {

SamplerSpec sampler_from_kwargs(const std::string& family, double zeta,
                                std::uint32_t K,
                                const std::vector<double>& zetas,
                                const std::vector<double>& qs,
                                std::uint32_t branching,
                                const std::vector<double>& weights,
                                const std::vector<double>& gram) {
  if (family == "pd") return PDSampler{zeta, K};
  if (family == "rpc") return CascadeSampler{CascadeParams{zetas, qs, branching}};
  if (family == "negative") {
    std::vector<double> g = gram;
    const std::size_t n = weights.size();
    if (g.empty()) {
      g.assign(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) g[i * n + i] = 1.0;
    }
    return PointMassSampler{
        std::make_shared<MeasureSample>(negative_control(weights, g))};
  }
  throw UsageError("unknown sampler family '" + family + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Samplers, transforms and identity checks for discrete random "
            "measures with overlap structure";
  m.attr("__version__") = kVersion;

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DegenerateDeletionError>(m, "DegenerateDeletionError",
                                                  PyExc_RuntimeError);
  py::register_exception<BudgetExceededError>(m, "BudgetExceededError",
                                              PyExc_RuntimeError);
  py::register_exception<InternalCheckError>(m, "InternalCheckError",
                                             PyExc_AssertionError);

  py::class_<RandomStream>(m, "RandomStream")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("derive", &RandomStream::derive, py::arg("child"))
      .def("next_u64", &RandomStream::next_u64)
      .def("uniform01", &RandomStream::uniform01)
      .def("exponential", &RandomStream::exponential)
      .def("sign", &RandomStream::sign)
      .def("path_string", &RandomStream::path_string);

  py::class_<WeightVector>(m, "WeightVector")
      .def(py::init<std::vector<double>>(), py::arg("masses"))
      .def("__len__", &WeightVector::size)
      .def("__getitem__",
           [](const WeightVector& w, std::size_t i) {
             if (i >= w.size()) throw py::index_error();
             return w[i];
           })
      .def_property_readonly("slots", &WeightVector::slots)
      .def_property_readonly("sorted",
                             [](const WeightVector& w) {
                               return w.canonical().sorted;
                             })
      .def_property_readonly("order",
                             [](const WeightVector& w) {
                               return w.canonical().order;
                             })
      .def("top_atoms", &WeightVector::top_atoms, py::arg("L"));

  py::class_<MeasureSample>(m, "MeasureSample")
      .def_property_readonly("atom_count", &MeasureSample::atom_count)
      .def_property_readonly("weights", &MeasureSample::weights,
                             py::return_value_policy::reference_internal)
      .def_property_readonly("labels", &MeasureSample::labels)
      .def("overlap",
           [](const MeasureSample& s, std::size_t i, std::size_t j) {
             return overlap(s, i, j);
           })
      .def("to_json", &MeasureSample::to_json)
      .def("validate", [](const MeasureSample& s) { validate_sample(s); });

  py::class_<SignVector>(m, "SignVector")
      .def(py::init([](const std::vector<int>& eps) {
             SignVector v;
             v.eps.reserve(eps.size());
             for (int e : eps) {
               if (e != 1 && e != -1) {
                 throw UsageError("signs must be +1 or -1");
               }
               v.eps.push_back(static_cast<std::int8_t>(e));
             }
             return v;
           }),
           py::arg("eps"))
      .def("__len__", &SignVector::size)
      .def_property_readonly("eps", [](const SignVector& v) {
        return std::vector<int>(v.eps.begin(), v.eps.end());
      });

  py::class_<RetentionVector>(m, "RetentionVector")
      .def(py::init([](const std::vector<int>& eta, std::uint32_t s) {
             RetentionVector v;
             v.s = s;
             v.eta.reserve(eta.size());
             for (int e : eta) {
               if (e != 0 && e != 1) {
                 throw UsageError("retention entries must be 0 or 1");
               }
               v.eta.push_back(static_cast<std::uint8_t>(e));
             }
             return v;
           }),
           py::arg("eta"), py::arg("s") = 1)
      .def("__len__", &RetentionVector::size)
      .def_property_readonly("eta", [](const RetentionVector& v) {
        return std::vector<int>(v.eta.begin(), v.eta.end());
      });

  py::class_<OverlapFunction>(m, "OverlapFunction")
      .def_readonly("id", &OverlapFunction::id)
      .def_readonly("arity", &OverlapFunction::arity)
      .def_readonly("bound", &OverlapFunction::bound);
  m.def("make_function", &make_function, py::arg("id"), py::arg("arity"),
        py::arg("threshold") = 0.5);
  m.def("function_registry",
        []() { return function_registry(); });

  py::class_<MCEstimate>(m, "MCEstimate")
      .def_readonly("mean", &MCEstimate::mean)
      .def_readonly("se", &MCEstimate::se)
      .def_readonly("m_inner", &MCEstimate::m_inner)
      .def_readonly("m_outer", &MCEstimate::m_outer)
      .def_readonly("seed", &MCEstimate::seed)
      .def("__repr__", [](const MCEstimate& e) {
        std::ostringstream out;
        out << "MCEstimate(mean=" << e.mean << ", se=" << e.se << ")";
        return out.str();
      });

  py::class_<TestVerdict>(m, "TestVerdict")
      .def_readonly("statistic", &TestVerdict::statistic)
      .def_readonly("threshold", &TestVerdict::threshold)
      .def_readonly("level", &TestVerdict::level)
      .def_readonly("pass_", &TestVerdict::pass)
      .def_readonly("infinite_statistic", &TestVerdict::infinite_statistic);

  // Samplers and transforms.
  m.def("sample_pd",
        [](double zeta, std::uint32_t K, RandomStream& rng) {
          return sample_pd(zeta, K, rng);
        },
        py::arg("zeta"), py::arg("K"), py::arg("rng"));
  m.def("sample_rpc",
        [](const std::vector<double>& zetas, const std::vector<double>& qs,
           std::uint32_t branching, RandomStream& rng) {
          return sample_rpc(CascadeParams{zetas, qs, branching}, rng);
        },
        py::arg("zetas"), py::arg("qs"), py::arg("branching"), py::arg("rng"));
  m.def("negative_control", &negative_control, py::arg("weights"),
        py::arg("gram"));
  m.def("draw_signs", &draw_signs, py::arg("K"), py::arg("rng"));
  m.def("draw_retention", &draw_retention, py::arg("K"), py::arg("s"),
        py::arg("rng"));
  m.def("retention_from_signs", &retention_from_signs, py::arg("eps"));
  m.def("tilt", &tilt, py::arg("sample"), py::arg("t"), py::arg("eps"));
  m.def("delete_atoms", &delete_atoms, py::arg("sample"), py::arg("eta"));
  m.def("retained_mass", &retained_mass, py::arg("sample"), py::arg("eta"));
  m.def("iterated_delete",
        [](const MeasureSample& sample, std::uint32_t s, RandomStream& rng,
           const std::string& mode, int max_retries) {
          const DeletionMode dm = mode == "sequential"
                                      ? DeletionMode::Sequential
                                      : DeletionMode::SingleShot;
          std::uint64_t retries = 0;
          MeasureSample out =
              iterated_delete(sample, s, rng, dm, max_retries, &retries);
          return py::make_tuple(out, retries);
        },
        py::arg("sample"), py::arg("s"), py::arg("rng"),
        py::arg("mode") = "single-shot", py::arg("max_retries") = 100);

  // Averaging.
  m.def("gibbs_exact", &gibbs_exact, py::arg("sample"), py::arg("f"),
        py::arg("enumeration_budget") = std::uint64_t{100000000});
  m.def("gibbs_mc",
        [](const MeasureSample& sample, const OverlapFunction& f,
           std::uint64_t M, RandomStream& rng) {
          return gibbs_mc(sample, f, M, rng);
        },
        py::arg("sample"), py::arg("f"), py::arg("M"), py::arg("rng"));
  m.def("quenched_average",
        [](const std::string& family, const OverlapFunction& f,
           std::uint64_t m_outer, std::uint64_t m_inner, std::uint64_t seed,
           int jobs, double zeta, std::uint32_t K,
           const std::vector<double>& zetas, const std::vector<double>& qs,
           std::uint32_t branching, const std::vector<double>& weights,
           const std::vector<double>& gram) {
          const SamplerSpec sampler = sampler_from_kwargs(
              family, zeta, K, zetas, qs, branching, weights, gram);
          return quenched_average(sampler, f, m_outer, m_inner,
                                  RandomStream(seed), InnerPolicy{}, jobs);
        },
        py::arg("family"), py::arg("f"), py::arg("m_outer") = 200,
        py::arg("m_inner") = 256, py::arg("seed") = 1, py::arg("jobs") = 1,
        py::arg("zeta") = 0.5, py::arg("K") = 4096,
        py::arg("zetas") = std::vector<double>{0.3, 0.6},
        py::arg("qs") = std::vector<double>{0.3, 0.9},
        py::arg("branching") = 64,
        py::arg("weights") = std::vector<double>{},
        py::arg("gram") = std::vector<double>{});

  // Statistics.
  m.def("z_equality_test", &z_equality_test, py::arg("a"), py::arg("b"),
        py::arg("level") = kDefaultZLevel);
  m.def("ks_two_sample",
        [](const std::vector<double>& xs, const std::vector<double>& ys,
           double level) { return ks_two_sample(xs, ys, level); },
        py::arg("xs"), py::arg("ys"), py::arg("level") = 0.01);
  m.def("sign_contrast",
        [](const SignVector& eps, const std::vector<std::uint32_t>& slots) {
          return sign_contrast(eps, slots);
        },
        py::arg("eps"), py::arg("replica_slots"));

  // Config-driven experiments (report returned as a JSON string).
  m.def("run_experiment_config",
        [](const std::string& text) {
          std::istringstream in(text);
          const ExperimentConfig config = parse_config(in);
          const ReportDocument doc = run_experiment(config);
          return doc.to_json().dump();
        },
        py::arg("config_text"));
}
