#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "glasdi/checkpoint.hpp"
#include "glasdi/cli.hpp"
#include "glasdi/config.hpp"
#include "glasdi/dynamics_id.hpp"
#include "glasdi/errors.hpp"
#include "glasdi/evaluation.hpp"
#include "glasdi/fom_burgers.hpp"
#include "glasdi/greedy.hpp"
#include "glasdi/rom.hpp"
#include "glasdi/trajectory_io.hpp"

namespace py = pybind11;
using namespace glasdi;

namespace {

ParamPoint to_point(const std::vector<double>& v) { return ParamPoint{v}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Greedy latent-space dynamics identification for parameterized 2D Burgers";

  auto& base = py::register_exception<Error>(m, "GlasdiError", PyExc_RuntimeError);
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<NonConvergence>(m, "NonConvergence", base.ptr());
  py::register_exception<Divergence>(m, "Divergence", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());

  py::class_<FomConfig>(m, "FomConfig")
      .def(py::init<>())
      .def_readwrite("x_min", &FomConfig::x_min)
      .def_readwrite("x_max", &FomConfig::x_max)
      .def_readwrite("y_min", &FomConfig::y_min)
      .def_readwrite("y_max", &FomConfig::y_max)
      .def_readwrite("nx", &FomConfig::nx)
      .def_readwrite("ny", &FomConfig::ny)
      .def_readwrite("reynolds", &FomConfig::reynolds)
      .def_readwrite("dt", &FomConfig::dt)
      .def_readwrite("t_final", &FomConfig::t_final)
      .def_readwrite("newton_tol", &FomConfig::newton_tol)
      .def_readwrite("newton_max_iter", &FomConfig::newton_max_iter)
      .def_property_readonly("n_steps", &FomConfig::n_steps)
      .def_property_readonly("state_size", &FomConfig::state_size)
      .def("validate", &FomConfig::validate)
      .def_static("desk_scale", &FomConfig::desk_scale)
      .def_static("full_scale", &FomConfig::full_scale);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init<>())
      .def_property_readonly("mu", [](const Trajectory& t) { return t.mu.values; })
      .def_readonly("dt", &Trajectory::dt)
      .def_readonly("snapshots", &Trajectory::snapshots)
      .def_readonly("derivatives", &Trajectory::derivatives)
      .def_property_readonly("n_snapshots", &Trajectory::n_snapshots)
      .def_property_readonly("state_size", &Trajectory::state_size);

  m.def("initial_state", [](const std::vector<double>& mu, const FomConfig& cfg) {
    return initial_state(to_point(mu), cfg);
  }, py::arg("mu"), py::arg("cfg"));
  m.def("rhs", &rhs, py::arg("u"), py::arg("cfg"));
  m.def("residual", &residual, py::arg("u_n"), py::arg("u_prev"), py::arg("cfg"));
  m.def("step", py::overload_cast<const StateVector&, const FomConfig&>(&step), py::arg("u_prev"), py::arg("cfg"));
  m.def("simulate", [](const std::vector<double>& mu, const FomConfig& cfg) {
    py::gil_scoped_release release;
    return simulate(to_point(mu), cfg);
  }, py::arg("mu"), py::arg("cfg"));
  m.def("fom_step_count", &fom_step_count);

  m.def("read_trajectory", &read_trajectory, py::arg("path"));
  m.def("write_trajectory", &write_trajectory, py::arg("path"), py::arg("trajectory"));

  py::class_<DiscreteParamSpace>(m, "ParamSpace")
      .def(py::init([](const std::vector<std::pair<double, double>>& bounds, const std::vector<std::size_t>& res) {
             std::vector<Interval> b;
             for (const auto& [lo, hi] : bounds) b.push_back({lo, hi});
             return build_grid(b, res);
           }),
           py::arg("bounds"), py::arg("resolution"))
      .def("__len__", &DiscreteParamSpace::size)
      .def("point", [](const DiscreteParamSpace& s, std::size_t i) { return s.point(i).values; })
      .def_property_readonly("points", [](const DiscreteParamSpace& s) {
        std::vector<std::vector<double>> out;
        for (const auto& p : s.points()) out.push_back(p.values);
        return out;
      })
      .def_property_readonly("cov_inv", &DiscreteParamSpace::cov_inv)
      .def("mahalanobis", [](const DiscreteParamSpace& s, const std::vector<double>& p, const std::vector<double>& q) {
        return mahalanobis_distance(to_point(p), to_point(q), s);
      });

  m.def("shepard_weights", &shepard_weights, py::arg("distances"), py::arg("power") = 2.0);
  m.def("fit_error_model", [](const std::vector<double>& x, const std::vector<double>& y) {
    const ErrorFit f = fit_error_model(x, y);
    return py::make_tuple(f.slope, f.intercept);
  }, py::arg("e_res"), py::arg("e_max"));
  m.def("pearson_correlation", [](const std::vector<double>& x, const std::vector<double>& y) {
    return pearson_correlation(x, y);
  });

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("seed", &RunConfig::seed)
      .def_readonly("fom", &RunConfig::fom)
      .def("space", &RunConfig::space)
      .def("to_json", [](const RunConfig& c) { return config_to_json(c).dump(); })
      .def_static("from_json", [](const std::string& text) {
        return config_from_json(nlohmann::json::parse(text));
      });
  m.def("load_config", &load_config, py::arg("path"));

  py::class_<RomModel>(m, "RomModel")
      .def_property_readonly("n_anchors", [](const RomModel& r) { return r.anchors.size(); })
      .def_property_readonly("latent_dim", [](const RomModel& r) { return r.ae.latent_dim(); })
      .def_property_readonly("anchor_params", [](const RomModel& r) {
        std::vector<std::vector<double>> out;
        for (const auto& p : r.anchor_params()) out.push_back(p.values);
        return out;
      })
      .def("encode", [](const RomModel& r, const Eigen::MatrixXd& u) { return forward(r.ae.encoder, u); })
      .def("decode", [](const RomModel& r, const Eigen::MatrixXd& z) { return forward(r.ae.decoder, z); });
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  m.def("predict", [](const std::vector<double>& mu, const RomModel& rom, const RunConfig& cfg) {
    py::gil_scoped_release release;
    return predict(to_point(mu), rom, cfg.space(), cfg.fom);
  }, py::arg("mu"), py::arg("rom"), py::arg("cfg"));
  m.def("predict_latent", [](const std::vector<double>& mu, const RomModel& rom, const RunConfig& cfg) {
    return predict_latent(to_point(mu), rom, cfg.space(), cfg.fom);
  }, py::arg("mu"), py::arg("rom"), py::arg("cfg"));
  m.def("error_indicator", [](const std::vector<double>& mu, const RomModel& rom, const RunConfig& cfg) {
    return error_indicator(to_point(mu), rom, cfg.space(), cfg.fom, cfg.greedy.indicator);
  }, py::arg("mu"), py::arg("rom"), py::arg("cfg"));
  m.def("max_relative_error", &max_relative_error, py::arg("reference"), py::arg("approx"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli::run(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run a command-line subcommand; returns (exit_code, stdout, stderr).");
}
