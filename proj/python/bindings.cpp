#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ocpls/config.hpp"
#include "ocpls/curvature.hpp"
#include "ocpls/experiment.hpp"
#include "ocpls/optimizer.hpp"
#include "ocpls/pose_metrics.hpp"
#include "ocpls/pose_task.hpp"
#include "ocpls/problems.hpp"
#include "ocpls/report.hpp"
#include "ocpls/theory.hpp"

namespace py = pybind11;
using Eigen::VectorXd;

namespace {

ocpls::ParamVector pv(const VectorXd& v) { return ocpls::ParamVector(v); }

Eigen::Matrix<double, Eigen::Dynamic, 7> poses_to_matrix(const std::vector<ocpls::Pose>& poses) {
  Eigen::Matrix<double, Eigen::Dynamic, 7> out(Eigen::Index(poses.size()), 7);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    out.row(Eigen::Index(i)).head<3>() = poses[i].p.transpose();
    out.row(Eigen::Index(i)).tail<4>() = poses[i].q.transpose();
  }
  return out;
}

std::vector<ocpls::Pose> matrix_to_poses(const Eigen::MatrixXd& m) {
  if (m.cols() != 7) throw ocpls::ShapeError("poses must be an (n, 7) array of (px, py, pz, qw, qx, qy, qz)");
  std::vector<ocpls::Pose> out(std::size_t(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out[std::size_t(i)].p = m.row(i).head<3>().transpose();
    out[std::size_t(i)].q = m.row(i).tail<4>().transpose();
  }
  return out;
}

py::dict summary_dict(const ocpls::ErrorSummary& e) {
  py::dict d;
  d["median_pos_m"] = e.median_pos;
  d["mean_pos_m"] = e.mean_pos;
  d["median_rot_deg"] = e.median_rot;
  d["mean_rot_deg"] = e.mean_rot;
  return d;
}

py::dict rates_dict(const ocpls::RateReport& r) {
  py::dict d;
  d["beta_est"] = r.beta_est;
  d["mu_pl_est"] = r.mu_pl_est;
  d["rho_pred"] = r.rho_pred;
  d["rho_fit"] = r.rho_fit;
  d["fit_r2"] = r.fit_r2;
  d["a3_violation_count"] = r.a3_violation_count;
  d["descent_violations"] = r.descent_violations;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ocpls, m) {
  m.doc() = "OCP-LS optimizer, curvature estimators, test problems and benchmark runner";

  py::register_exception<ocpls::ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ocpls::NonFiniteError>(m, "NonFiniteError", PyExc_FloatingPointError);
  py::register_exception<ocpls::ConfigError>(m, "ConfigError", PyExc_ValueError);

  py::enum_<ocpls::InnerMode>(m, "InnerMode")
      .value("closed_form", ocpls::InnerMode::closed_form)
      .value("recursion", ocpls::InnerMode::recursion);

  py::class_<ocpls::OcpLsConfig>(m, "OcpLsConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &ocpls::OcpLsConfig::alpha)
      .def_readwrite("beta1", &ocpls::OcpLsConfig::beta1)
      .def_readwrite("beta2", &ocpls::OcpLsConfig::beta2)
      .def_readwrite("lam", &ocpls::OcpLsConfig::lambda)
      .def_readwrite("clamp_floor", &ocpls::OcpLsConfig::clamp_floor)
      .def_readwrite("inner_mode", &ocpls::OcpLsConfig::inner_mode)
      .def_readwrite("inner_cap", &ocpls::OcpLsConfig::inner_cap)
      .def_readwrite("stability_delta", &ocpls::OcpLsConfig::stability_delta)
      .def("validate", &ocpls::OcpLsConfig::validate);

  py::class_<ocpls::OptimizerState>(m, "OptimizerState")
      .def(py::init([](std::size_t n) { return ocpls::OptimizerState::zeros(n); }), py::arg("n"))
      .def_property_readonly("g_ema", [](const ocpls::OptimizerState& s) { return s.g_ema.vec(); })
      .def_property_readonly("h_ema", [](const ocpls::OptimizerState& s) { return s.h_ema.vec(); })
      .def_readonly("k", &ocpls::OptimizerState::k);

  m.def(
      "phi_closed_form",
      [](const VectorXd& g_hat, const VectorXd& h_hat, const ocpls::OcpLsConfig& cfg, std::uint64_t k) {
        return ocpls::phi_closed_form(pv(g_hat), pv(h_hat), cfg, k).vec();
      },
      py::arg("g_hat"), py::arg("h_hat"), py::arg("cfg"), py::arg("k"));
  m.def(
      "phi_recursion",
      [](const VectorXd& g_hat, const VectorXd& h_hat, const ocpls::OcpLsConfig& cfg, std::uint64_t inner) {
        return ocpls::phi_recursion(pv(g_hat), pv(h_hat), cfg, inner).vec();
      },
      py::arg("g_hat"), py::arg("h_hat"), py::arg("cfg"), py::arg("inner"));
  m.def(
      "step",
      [](const ocpls::OptimizerState& state, const VectorXd& x, const VectorXd& g, const ocpls::OcpLsConfig& cfg) {
        ocpls::StepResult r = ocpls::step(state, pv(x), pv(g), cfg);
        return py::make_tuple(r.x.vec(), r.state, r.diagnostics.clamp_hits, r.diagnostics.step_norm);
      },
      py::arg("state"), py::arg("x"), py::arg("g"), py::arg("cfg"),
      "One OCP-LS step with the simplified g*g curvature; returns (x, state, clamp_hits, step_norm).");
  m.def(
      "step_with_curvature",
      [](const ocpls::OptimizerState& state, const VectorXd& x, const VectorXd& g, const VectorXd& h,
         const ocpls::OcpLsConfig& cfg) {
        ocpls::StepResult r = ocpls::step_with_curvature(state, pv(x), pv(g), pv(h), cfg);
        return py::make_tuple(r.x.vec(), r.state, r.diagnostics.clamp_hits, r.diagnostics.step_norm);
      },
      py::arg("state"), py::arg("x"), py::arg("g"), py::arg("h"), py::arg("cfg"));

  py::class_<ocpls::QuadraticProblem>(m, "QuadraticProblem")
      .def(py::init([](const Eigen::MatrixXd& a, const VectorXd& b, double lam) {
             return ocpls::QuadraticProblem(a, pv(b), lam);
           }),
           py::arg("a"), py::arg("b"), py::arg("lambda_reg") = 0.0)
      .def_static(
          "diagonal",
          [](const std::vector<double>& eigs, double lam) { return ocpls::QuadraticProblem::diagonal(eigs, lam); },
          py::arg("eigenvalues"), py::arg("lambda_reg") = 0.0)
      .def("value", [](const ocpls::QuadraticProblem& q, const VectorXd& x) { return q.value(pv(x)); })
      .def("gradient", [](const ocpls::QuadraticProblem& q, const VectorXd& x) { return q.gradient(pv(x)).vec(); })
      .def("gap", [](const ocpls::QuadraticProblem& q, const VectorXd& x) { return q.gap(pv(x)); })
      .def_property_readonly("minimizer", [](const ocpls::QuadraticProblem& q) { return q.minimizer().vec(); })
      .def_property_readonly("optimal_value", [](const ocpls::QuadraticProblem& q) { return *q.optimal_value(); })
      .def_property_readonly("smoothness", &ocpls::QuadraticProblem::smoothness)
      .def_property_readonly("pl_constant", &ocpls::QuadraticProblem::pl_constant);

  m.def(
      "rosenbrock",
      [](const VectorXd& x) {
        auto [f, g] = ocpls::rosenbrock_eval(pv(x));
        return py::make_tuple(f, g.vec());
      },
      py::arg("x"), "Returns (value, gradient).");

  m.def(
      "gnb_mse_estimate",
      [](const Eigen::MatrixXd& rows, const VectorXd& targets, const VectorXd& x, std::uint64_t seed) {
        ocpls::LinearLeastSquares model(rows, targets);
        std::vector<std::size_t> batch(model.num_samples());
        for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
        ocpls::Rng rng(seed);
        return ocpls::gnb_mse_estimate(model, pv(x), batch, rng).diag.vec();
      },
      py::arg("rows"), py::arg("targets"), py::arg("x"), py::arg("seed"),
      "One GNB draw for the linear residual model with the given design rows.");
  m.def(
      "exact_gn_diagonal",
      [](const Eigen::MatrixXd& rows, const VectorXd& targets, const VectorXd& x) {
        ocpls::LinearLeastSquares model(rows, targets);
        std::vector<std::size_t> batch(model.num_samples());
        for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
        return ocpls::exact_gn_diagonal(model, pv(x), batch).diag.vec();
      },
      py::arg("rows"), py::arg("targets"), py::arg("x"));

  m.def("rho_infinity", &ocpls::rho_infinity, py::arg("alpha"), py::arg("beta"), py::arg("mu"));
  m.def(
      "fit_empirical_rate",
      [](const std::vector<double>& gaps) {
        ocpls::RateFit f = ocpls::fit_empirical_rate(gaps);
        return py::make_tuple(f.rho, f.r2);
      },
      py::arg("gaps"), "Returns (rho, r2).");
  m.def(
      "check_a3",
      [](const VectorXd& h_hat, double alpha, std::uint64_t k) { return ocpls::check_a3(pv(h_hat), alpha, k).holds; },
      py::arg("h_hat"), py::arg("alpha"), py::arg("k"));

  m.def("position_error", &ocpls::position_error, py::arg("predicted"), py::arg("truth"));
  m.def("rotation_error", &ocpls::rotation_error, py::arg("predicted"), py::arg("truth"),
        "Geodesic angle in degrees between quaternions given as (w, x, y, z).");
  m.def(
      "pose_loss",
      [](const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth, double s_p, double s_q) {
        return ocpls::pose_loss(matrix_to_poses(predicted), matrix_to_poses(truth), {s_p, s_q});
      },
      py::arg("predicted"), py::arg("truth"), py::arg("s_p") = 0.0, py::arg("s_q") = 0.0);

  py::class_<ocpls::TinyRegressor>(m, "TinyRegressor")
      .def(py::init<std::size_t, std::vector<std::size_t>>(), py::arg("input_dim") = 16,
           py::arg("hidden") = std::vector<std::size_t>{64, 64})
      .def_property_readonly("parameter_count", &ocpls::TinyRegressor::parameter_count)
      .def(
          "initial_parameters",
          [](const ocpls::TinyRegressor& r, std::uint64_t seed) { return r.initial_parameters(seed).vec(); },
          py::arg("seed"));

  m.def("parse_config", &ocpls::parse_config, py::arg("text"), py::arg("source") = "<string>");
  m.def("format_config", &ocpls::format_config, py::arg("cfg"));
  py::class_<ocpls::ExperimentConfig>(m, "ExperimentConfig")
      .def_property(
          "max_iterations", [](const ocpls::ExperimentConfig& c) { return c.run.max_iterations; },
          [](ocpls::ExperimentConfig& c, std::size_t v) { c.run.max_iterations = v; })
      .def_property(
          "seed", [](const ocpls::ExperimentConfig& c) { return c.problem.seed; },
          [](ocpls::ExperimentConfig& c, std::uint64_t v) { c.problem.seed = v; })
      .def_property_readonly("arm_names",
                             [](const ocpls::ExperimentConfig& c) {
                               std::vector<std::string> names;
                               for (const auto& a : c.arms) names.push_back(a.name);
                               return names;
                             })
      .def("__eq__", [](const ocpls::ExperimentConfig& a, const ocpls::ExperimentConfig& b) { return a == b; });

  m.def(
      "run_experiment",
      [](const ocpls::ExperimentConfig& cfg, const std::string& out_dir) {
        ocpls::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = ocpls::run_experiment(cfg);
          if (!out_dir.empty()) ocpls::write_outputs(result, cfg, out_dir);
        }
        py::list arms;
        for (const ocpls::ArmResult& a : result.arms) {
          py::dict d;
          d["name"] = a.name;
          d["diverged"] = a.diverged;
          d["iterations"] = a.iterations_completed;
          d["initial_train_loss"] = a.initial_train_loss;
          d["final_train_loss"] = a.final_train_loss;
          std::vector<double> train;
          for (const ocpls::RunRecord& r : a.records) train.push_back(r.train_loss);
          d["train_loss"] = train;
          d["summary"] = summary_dict(a.summary.errors);
          d["s_p"] = a.summary.s_p;
          d["s_q"] = a.summary.s_q;
          d["rates"] = rates_dict(a.rates);
          arms.append(d);
        }
        return arms;
      },
      py::arg("cfg"), py::arg("out_dir") = "",
      "Runs every arm; writes the CSV/SVG/JSON outputs when out_dir is given.");

  m.def("poses_from_scene", [](std::size_t n_train, std::size_t n_val, double sigma, std::uint64_t seed) {
    ocpls::SyntheticScene s = ocpls::make_synthetic_scene(n_train, n_val, sigma, seed);
    std::vector<ocpls::Pose> train, val;
    for (const auto& p : s.train) train.push_back(p.pose);
    for (const auto& p : s.val) val.push_back(p.pose);
    return py::make_tuple(poses_to_matrix(train), poses_to_matrix(val));
  });
}
