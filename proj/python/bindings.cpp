#include "wanco/commands.hpp"
#include "wanco/config.hpp"
#include "wanco/io.hpp"
#include "wanco/oracles.hpp"
#include "wanco/parallel.hpp"
#include "wanco/problems.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace wanco;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<double> to_vector(const Array& a) { return {a.data(), a.data() + a.size()}; }

RunConfig parse(const std::string& config, std::optional<std::uint64_t> seed) {
  Json tree = Json::parse(config);
  if (seed) tree = merge_config(expand_config(tree), Json{{"seed", *seed}});
  return parse_run_config(tree);
}

py::dict train_run(const std::string& config, std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed) {
  const RunConfig run = parse(config, seed);
  TrainResult result;
  {
    py::gil_scoped_release release;
    result = out ? run_and_write(run, *out, true) : wanco::train(*run.problem, run.train, run.sampler);
  }
  std::ostringstream history;
  write_history_csv(history, result.history);
  py::dict final_eval;
  final_eval["loss"] = result.final_eval.loss;
  final_eval["objective"] = result.final_eval.objective;
  py::dict constraints;
  for (std::size_t i = 0; i < result.final_eval.constraints.size(); ++i) {
    const auto& c = result.final_eval.constraints[i];
    constraints[py::str(result.history.constraint_names[i])] = py::make_tuple(c.achieved, c.target);
  }
  final_eval["constraints"] = constraints;
  py::dict multipliers;
  for (std::size_t i = 0; i < result.final_eval.multipliers.size(); ++i) {
    multipliers[py::str(result.history.multiplier_names[i])] = result.final_eval.multipliers[i];
  }
  final_eval["multipliers"] = multipliers;

  py::dict d;
  d["config"] = run.tree.dump();
  d["params"] = to_array(result.params.values());
  d["history_csv"] = history.str();
  d["final"] = final_eval;
  d["final_betas"] = result.final_betas;
  return d;
}

py::tuple eval_grid(const std::string& config, const Array& params, const Eigen::MatrixXd& points) {
  const RunConfig run = parse_run_config(Json::parse(config));
  ParamStore store = run.problem->make_layout();
  if (static_cast<std::size_t>(params.size()) != store.size()) {
    throw ConfigError("expected " + std::to_string(store.size()) + " parameters, got " +
                      std::to_string(params.size()));
  }
  std::copy(params.data(), params.data() + params.size(), store.values().begin());
  const int d = run.problem->domain().dim();
  if (points.cols() != d) throw ConfigError("points must have shape (n, " + std::to_string(d) + ")");
  const Matrix x = points.transpose();
  Matrix values;
  {
    py::gil_scoped_release release;
    values = run.problem->grid_values(store, x);
  }
  return py::make_tuple(run.problem->grid_columns(), Eigen::MatrixXd(values.transpose()));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "augmented-Lagrangian adversarial training core";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonFiniteError>(m, "NonFiniteError", PyExc_FloatingPointError);

  m.def("preset_names", &preset_names);
  m.def("preset_config", [](const std::string& name) { return preset_tree(name).dump(); });
  m.def("expand_config", [](const std::string& config) { return expand_config(Json::parse(config)).dump(); });
  m.def("validate_config", [](const std::string& config) { return parse_run_config(Json::parse(config)).tree.dump(); });
  m.def("train", &train_run, py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none());
  m.def("eval_grid", &eval_grid, py::arg("config"), py::arg("params"), py::arg("points"));
  m.def("grid_points", [](const std::vector<double>& lo, const std::vector<double>& hi, const std::vector<int>& nodes) {
    return Eigen::MatrixXd(grid_points(Box{lo, hi}, nodes).transpose());
  });
  m.def("set_worker_count", &set_worker_count);

  m.def("obstacle_psi", [](const std::string& id, const Array& x) {
    const ObstacleId which = parse_obstacle(id);
    Array out(x.size());
    for (py::ssize_t i = 0; i < x.size(); ++i) out.mutable_data()[i] = obstacle_psi(which, x.data()[i]);
    return out;
  });
  m.def(
      "obstacle_psor",
      [](const Array& psi, double g0, double g1, double omega, double tol) {
        const std::vector<double> p = to_vector(psi);
        Grid1D u;
        {
          py::gil_scoped_release release;
          u = obstacle_psor(p, g0, g1, PsorOptions{omega, tol});
        }
        return to_array(u.values);
      },
      py::arg("psi"), py::arg("g0"), py::arg("g1"), py::arg("omega") = 1.9, py::arg("tol") = 1e-10);
  m.def("gl_sharp_interface_radius", &gl_sharp_interface_radius);
  m.def("quadrature", [](const Array& values, const std::vector<int>& nodes, const std::vector<double>& lo,
                         const std::vector<double>& hi) {
    return quadrature_reference(to_vector(values), nodes, Box{lo, hi});
  });
}
