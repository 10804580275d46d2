#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <string>

#include "trafusion/bt_weight.hpp"
#include "trafusion/config.hpp"
#include "trafusion/errors.hpp"
#include "trafusion/evaluation.hpp"
#include "trafusion/reconstruction.hpp"
#include "trafusion/scenario.hpp"
#include "trafusion/sensor_io.hpp"
#include "trafusion/smoothing.hpp"

namespace py = pybind11;
using namespace trafusion;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::memcpy(out.mutable_data(), m.data().data(), m.data().size() * sizeof(double));
  return out;
}

Matrix from_numpy(const Array& a, const GridSpec& spec, const char* what) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != spec.n_x() ||
      static_cast<std::size_t>(a.shape(1)) != spec.n_t()) {
    throw ShapeError(std::string(what) + " must have shape (n_x, n_t)");
  }
  Matrix m(spec.n_x(), spec.n_t());
  std::memcpy(m.data().data(), a.data(), m.data().size() * sizeof(double));
  return m;
}

Algorithm algorithm_arg(const std::string& token) {
  const auto a = parse_algorithm(token);
  if (!a) throw py::value_error("unknown algorithm '" + token + "' (secavg, asm, psm, psmw)");
  return *a;
}

SensorSet sensors_arg(const SensorData& data, const std::optional<std::string>& text) {
  if (!text) return data.available();
  const auto s = parse_sensor_set(*text);
  if (!s) throw py::value_error("bad sensor set '" + *text + "'");
  return *s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Speed-field reconstruction from loop, FCD and Bluetooth data";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NoDataError>(m, "NoDataError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.attr("KMH") = kKmh;

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<double, double, double, double, double, double>(), py::arg("x_min"),
           py::arg("x_max"), py::arg("t_min"), py::arg("t_max"), py::arg("dx") = 100.0,
           py::arg("dt") = 60.0)
      .def_property_readonly("x_min", &GridSpec::x_min)
      .def_property_readonly("x_max", &GridSpec::x_max)
      .def_property_readonly("t_min", &GridSpec::t_min)
      .def_property_readonly("t_max", &GridSpec::t_max)
      .def_property_readonly("dx", &GridSpec::dx)
      .def_property_readonly("dt", &GridSpec::dt)
      .def_property_readonly("shape", [](const GridSpec& g) { return py::make_tuple(g.n_x(), g.n_t()); })
      .def("__eq__", [](const GridSpec& a, const GridSpec& b) { return a == b; })
      .def("__repr__", [](const GridSpec& g) {
        return "GridSpec(x=[" + std::to_string(g.x_min()) + ", " + std::to_string(g.x_max()) +
               "], t=[" + std::to_string(g.t_min()) + ", " + std::to_string(g.t_max()) + "])";
      });

  // Speeds and weights are copied in and out; rows are space, columns time.
  py::class_<SpeedField>(m, "SpeedField")
      .def(py::init([](const GridSpec& g, const Array& speeds, std::optional<Array> weights) {
             Matrix v = from_numpy(speeds, g, "speeds");
             Matrix w = weights ? from_numpy(*weights, g, "weights") : Matrix(g.n_x(), g.n_t(), 1.0);
             return SpeedField(g, std::move(v), std::move(w));
           }),
           py::arg("grid"), py::arg("speeds"), py::arg("weights") = py::none())
      .def_property_readonly("grid", &SpeedField::spec)
      .def_property_readonly("speeds", [](const SpeedField& f) { return to_numpy(f.values()); })
      .def_property_readonly("weights", [](const SpeedField& f) { return to_numpy(f.weights()); })
      .def("data_cell_count", &SpeedField::data_cell_count);

  py::class_<SensorData>(m, "SensorData")
      .def(py::init<>())
      .def_property_readonly("loop_count", [](const SensorData& d) { return d.loops.size(); })
      .def_property_readonly("fcd_count", [](const SensorData& d) { return d.fcd.size(); })
      .def_property_readonly("bt_count", [](const SensorData& d) { return d.bt.size(); })
      .def_property_readonly("sensors", [](const SensorData& d) { return d.available().name(); });

  m.def(
      "load",
      [](std::optional<std::string> loops, std::optional<std::string> fcd,
         std::optional<std::string> bt) {
        SensorData d;
        if (loops) d.loops = read_loops_file(*loops);
        if (fcd) d.fcd = read_fcd_file(*fcd);
        if (bt) d.bt = read_bt_file(*bt);
        return d;
      },
      py::arg("loops") = py::none(), py::arg("fcd") = py::none(), py::arg("bt") = py::none(),
      "Read sensor CSV files.");

  m.def("infer_grid", [](const SensorData& d) { return infer_grid(d); }, py::arg("data"));

  m.def(
      "simulate",
      [](std::optional<std::string> config, std::uint64_t seed) {
        const ScenarioConfig cfg = config ? scenario_from_config(ConfigDocument::load(*config))
                                          : ScenarioConfig::desk_default();
        Scenario sc = simulate(cfg, seed);
        return py::make_tuple(std::move(sc.truth), std::move(sc.sensors));
      },
      py::arg("config") = py::none(), py::arg("seed") = 1,
      "Synthetic scenario: returns (truth SpeedField, SensorData).");

  m.def(
      "reconstruct",
      [](const SensorData& data, const std::string& algorithm, std::optional<std::string> sensors,
         std::optional<GridSpec> grid, std::optional<std::string> params) {
        const ReconstructionParams p =
            params ? params_from_config(ConfigDocument::load(*params)) : ReconstructionParams{};
        const GridSpec g = grid.value_or(infer_grid(data));
        const Algorithm a = algorithm_arg(algorithm);
        const SensorSet s = sensors_arg(data, sensors);
        py::gil_scoped_release release;
        return reconstruct(a, data, s, g, p);
      },
      py::arg("data"), py::arg("algorithm") = "psmw", py::arg("sensors") = py::none(),
      py::arg("grid") = py::none(), py::arg("params") = py::none());

  m.def(
      "imae",
      [](const SpeedField& estimate, const SpeedField& truth) {
        std::vector<TestCell> cells;
        for (std::size_t i = 0; i < truth.spec().n_x(); ++i) {
          for (std::size_t j = 0; j < truth.spec().n_t(); ++j) {
            if (truth.has_data(i, j)) cells.push_back({i, j, truth.speed(i, j)});
          }
        }
        return imae_to_min_per_km(imae(estimate, cells));
      },
      py::arg("estimate"), py::arg("truth"), "Mean |1/v - 1/v_true| over truth cells, min/km.");

  m.def(
      "parallelogram_area",
      [](double dx, double dt, double v_min, double v_max) {
        return parallelogram_area(dx, dt, BtWeightParams{v_min, v_max}).area;
      },
      py::arg("dx"), py::arg("dt"), py::arg("v_min") = 5.0 * kKmh, py::arg("v_max") = 130.0 * kKmh);
  m.def("bt_weight", py::overload_cast<double, double>(&bt_weight), py::arg("area"),
        py::arg("gamma") = 500000.0);
  m.def("adaptive_weight", py::overload_cast<double, double, double, double>(&adaptive_weight),
        py::arg("v_cong"), py::arg("v_free"), py::arg("v_thr") = 60.0 * kKmh,
        py::arg("delta_v") = 20.0 * kKmh);
}
