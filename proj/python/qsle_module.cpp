#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "qsle/errors.hpp"
#include "qsle/experiments.hpp"
#include "qsle/io.hpp"
#include "qsle/qgauss.hpp"
#include "qsle/qhermite.hpp"
#include "qsle/sle.hpp"

namespace py = pybind11;
using namespace qsle;

namespace {

// Configs cross the boundary as JSON text; the Python wrapper handles dicts.
ExperimentConfig parse_config(const std::string& text) {
  return text.empty() ? ExperimentConfig{} : config_from_json(nlohmann::json::parse(text));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IllConditionedError>(m, "IllConditionedError", PyExc_RuntimeError);

  m.attr("__version__") = kVersion;

  py::class_<QGaussianParams>(m, "QGaussian")
      .def(py::init<double, double, double>(), py::arg("q"), py::arg("location") = 0.0,
           py::arg("scale") = 1.0)
      .def_property_readonly("q", &QGaussianParams::q)
      .def_property_readonly("location", &QGaussianParams::location)
      .def_property_readonly("scale", &QGaussianParams::scale)
      .def_property_readonly("half_width", &QGaussianParams::half_width)
      .def_property_readonly("support",
                             [](const QGaussianParams& p) {
                               const auto s = p.support();
                               return py::make_tuple(s.lo, s.hi);
                             })
      .def("density", [](const QGaussianParams& p, double x) { return density(p, x); })
      .def("density_truncated",
           [](const QGaussianParams& p, int terms, double x) { return density_truncated(p, terms, x); })
      .def("cdf", [](const QGaussianParams& p, double x) { return cdf(p, x); })
      .def("inverse_cdf", [](const QGaussianParams& p, double u) { return inverse_cdf(p, u); })
      .def("sample", [](const QGaussianParams& p, std::uint64_t seed,
                        std::size_t n) { return sample(p, seed, n); },
           py::arg("seed"), py::arg("count"))
      .def("mode_count", [](const QGaussianParams& p) { return mode_count(p); })
      .def("__repr__", [](const QGaussianParams& p) {
        return "QGaussian(q=" + format_double(p.q()) + ", location=" + format_double(p.location()) +
               ", scale=" + format_double(p.scale()) + ")";
      });

  m.def("truncation_bound", &truncation_bound, py::arg("q"), py::arg("terms"));
  m.def("bimodal_threshold", &bimodal_threshold);
  m.def("q_bracket", &q_bracket);
  m.def("q_factorial", &q_factorial);
  m.def("hermite", &eval_all, py::arg("q"), py::arg("x"), py::arg("max_degree"),
        "[H_0(x), ..., H_N(x)]");
  m.def("norm_squared", py::overload_cast<double, int>(&norm_squared));
  m.def("quadrature", [](double q, double location, double scale, std::size_t count) {
    const auto rule = quadrature_nodes(QGaussianParams(q, location, scale), count);
    return py::make_tuple(rule.nodes, rule.weights);
  });

  py::class_<SleModel>(m, "SleModel")
      .def_property_readonly("coeffs", &SleModel::coeffs)
      .def_property_readonly("dimension", &SleModel::dimension)
      .def_property_readonly("std_errors",
                             [](const SleModel& s) { return s.report().coefficient_std_errors; })
      .def_property_readonly("indices",
                             [](const SleModel& s) {
                               std::vector<std::vector<int>> out;
                               for (const auto& a : s.index_set().indices()) out.push_back(a.entries());
                               return out;
                             })
      .def("__call__", [](const SleModel& s, std::vector<double> x) { return s(x); })
      .def("to_json", [](const SleModel& s) {
        nlohmann::json j;
        to_json(j, s);
        return j.dump();
      });

  m.def(
      "cls_fit",
      [](const std::function<double(std::vector<double>)>& target, std::vector<QGaussianParams> prior,
         int degree, const std::string& scheme, std::size_t samples, std::uint64_t seed) {
        ClsOptions options;
        options.scheme = weighting_scheme_from_string(scheme);
        options.samples = samples;
        options.seed = seed;
        const auto set = build_index_set(prior.size(), TruncationRule::total_degree(degree));
        auto field = [&target](std::span<const double> x) {
          return target(std::vector<double>(x.begin(), x.end()));
        };
        return cls_fit(field, set, prior, options);
      },
      py::arg("target"), py::arg("prior"), py::arg("degree"), py::arg("scheme") = "christoffel",
      py::arg("samples") = 0, py::arg("seed") = 0);

  m.def("default_config", [] { return to_json(ExperimentConfig{}).dump(); });
  m.def("normalize_config", [](const std::string& text) { return to_json(parse_config(text)).dump(); });
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); });
  m.def(
      "run_experiment",
      [](const std::string& text, const std::filesystem::path& out) {
        const auto config = parse_config(text);
        ArtifactSet set;
        {
          py::gil_scoped_release release;
          set = run_experiment(config, out);
        }
        return py::make_tuple(set.directory, set.files);
      },
      py::arg("config"), py::arg("out"));
}
