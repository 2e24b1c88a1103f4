// Copyright 2026 The uvms-id Authors
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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "uvms/estimator.hpp"
#include "uvms/harness.hpp"
#include "uvms/io.hpp"
#include "uvms/regressor.hpp"
#include "uvms/uncertainty.hpp"

namespace py = pybind11;
using namespace uvms;

namespace {

GeneralizedState make_state(const Vec6& eta, const Vec6& nu, const Vec6& nu_dot, const VecX& mu,
                            const VecX& mu_dot, const VecX& mu_ddot) {
  GeneralizedState s;
  s.eta = eta;
  s.nu = nu;
  s.nu_dot = nu_dot;
  s.mu = mu;
  s.mu_dot = mu_dot;
  s.mu_ddot = mu_ddot;
  return s;
}

/// Telemetry as stacked arrays: one row per record.
py::dict dataset_dict(const Dataset& ds) {
  const auto n = static_cast<Eigen::Index>(ds.records.size());
  const int nj = n ? ds.records[0].state.num_joints() : 0;
  VecX t(n);
  MatX eta(n, 6), nu(n, 6), nu_dot(n, 6), mu(n, nj), mu_dot(n, nj), mu_ddot(n, nj), tau(n, 6 + nj),
      tau_mv(n, 6), pi(n, ds.pi_true.empty() ? 0 : ds.pi_true[0].size());
  std::vector<bool> outlier(ds.outlier.begin(), ds.outlier.end());
  for (Eigen::Index k = 0; k < n; ++k) {
    const TelemetryRecord& r = ds.records[k];
    t[k] = r.t;
    eta.row(k) = r.state.eta.transpose();
    nu.row(k) = r.state.nu.transpose();
    nu_dot.row(k) = r.state.nu_dot.transpose();
    mu.row(k) = r.state.mu.transpose();
    mu_dot.row(k) = r.state.mu_dot.transpose();
    mu_ddot.row(k) = r.state.mu_ddot.transpose();
    tau.row(k) = r.tau.stacked().transpose();
    tau_mv.row(k) = ds.clean_tau_mv[k].transpose();
    pi.row(k) = ds.pi_true[k].transpose();
  }
  py::dict d;
  d["t"] = t;
  d["eta"] = eta;
  d["nu"] = nu;
  d["nu_dot"] = nu_dot;
  d["mu"] = mu;
  d["mu_dot"] = mu_dot;
  d["mu_ddot"] = mu_ddot;
  d["tau"] = tau;
  d["tau_mv"] = tau_mv;
  d["pi_true"] = pi;
  d["outlier"] = outlier;
  return d;
}

}  // namespace

PYBIND11_MODULE(_uvms_id, m) {
  m.doc() = "Online identification of underwater vehicle-manipulator dynamics";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<StateError>(m, "StateError", PyExc_ValueError);

  py::class_<GeneralizedState>(m, "State")
      .def(py::init(&make_state), py::arg("eta"), py::arg("nu"), py::arg("nu_dot"), py::arg("mu"),
           py::arg("mu_dot"), py::arg("mu_ddot"))
      .def_readwrite("eta", &GeneralizedState::eta)
      .def_readwrite("nu", &GeneralizedState::nu)
      .def_readwrite("nu_dot", &GeneralizedState::nu_dot)
      .def_readwrite("mu", &GeneralizedState::mu)
      .def_readwrite("mu_dot", &GeneralizedState::mu_dot)
      .def_readwrite("mu_ddot", &GeneralizedState::mu_ddot);

  py::class_<UvmsModel>(m, "Model")
      .def_property_readonly("num_links", &UvmsModel::num_links)
      .def_property_readonly("dof", &UvmsModel::dof)
      .def("lumped_parameters", [](const UvmsModel& self) { return lumped_parameters(self).values(); })
      .def("with_parameters",
           [](const UvmsModel& self, const VecX& pi) { return with_parameters(self, ParameterVector(pi)); })
      .def("to_yaml", &io::model_to_yaml)
      .def_static("from_yaml", &io::model_from_yaml);

  m.def("reference_model", &reference_model, py::arg("full_hydro") = false);
  m.def("channel_names", &channel_names);
  m.def("parameter_names", [](int num_links) {
    std::vector<std::string> out;
    for (int i = 0; i < param::count(num_links); ++i) out.push_back(param::name(i, num_links));
    return out;
  });

  m.def(
      "inverse_dynamics",
      [](const UvmsModel& model, const GeneralizedState& s) {
        const InverseDynamics id = hydro_rnea(model, s);
        return py::make_tuple(id.generalized().stacked(), VecX(id.coupling_marine()));
      },
      "Returns ([tau_v; tau_m], tau_mv) in marine ordering.");
  m.def("forward_dynamics", &forward_dynamics, py::arg("model"), py::arg("state"), py::arg("tau"));
  m.def(
      "regressor",
      [](const UvmsModel& model, const GeneralizedState& s) {
        return system_regressor(model, s).assembled;
      },
      "Y with Y pi = [tau_v + tau_mv; tau_m].");
  m.def(
      "feasibility_report",
      [](const VecX& pi, const UvmsModel& model) {
        std::vector<std::string> out;
        for (const ConstraintViolation& v : uvms::feasibility_report(ParameterVector(pi), model.bounds)) {
          out.push_back(v.message);
        }
        return out;
      },
      "Empty when pi is physically consistent.");
  m.def("perturb_parameters",
        [](const VecX& truth, const UvmsModel& model, std::uint64_t seed, double min_fraction) {
          return perturb_parameters(truth, model.bounds, seed, min_fraction);
        },
        py::arg("truth"), py::arg("model"), py::arg("seed"), py::arg("min_fraction") = 0.5);

  m.def(
      "simulate",
      [](const UvmsModel& model, double duration, std::uint64_t seed, bool staged, double noise_std,
         double outlier_rate, double outlier_gain, bool full_hydro_mode) {
        SynthesisOptions opt;
        opt.duration = duration;
        opt.mode = full_hydro_mode ? DatasetMode::kFullHydro : DatasetMode::kLumped;
        opt.corruption = {noise_std, outlier_rate, outlier_gain, seed};
        opt.rest_joints = VecX::Zero(model.num_links());
        if (model.num_links() == 4) opt.rest_joints << 0.0, 0.4, -0.8, 0.0;
        const ExcitationSchedule sched = staged
                                             ? default_excitation(model.num_links(), duration, seed)
                                             : full_excitation(model.num_links(), duration, seed);
        return dataset_dict(synthesize_dataset(model, sched, opt));
      },
      py::arg("model"), py::arg("duration"), py::arg("seed") = 0, py::arg("staged") = true,
      py::arg("noise_std") = 0.0, py::arg("outlier_rate") = 0.0, py::arg("outlier_gain") = 1.0,
      py::arg("full_hydro_mode") = false);

  py::class_<EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &EstimatorConfig::horizon)
      .def_readwrite("alpha", &EstimatorConfig::alpha)
      .def_readwrite("rho", &EstimatorConfig::rho)
      .def_readwrite("q0", &EstimatorConfig::q0)
      .def_property(
          "huber_scope", [](const EstimatorConfig& c) { return to_string(c.huber_scope); },
          [](EstimatorConfig& c, const std::string& s) { c.huber_scope = huber_scope_from_string(s); })
      .def("use_default_stages",
           [](EstimatorConfig& c, int num_links) { c.stage_schedule = default_stage_schedule(num_links); })
      .def("clear_stages", [](EstimatorConfig& c) { c.stage_schedule = {}; });

  py::class_<MheEstimator>(m, "Estimator")
      .def(py::init([](const UvmsModel& skeleton, const EstimatorConfig& cfg, const VecX& initial) {
             return MheEstimator(skeleton, cfg, ParameterVector(initial));
           }),
           py::arg("skeleton"), py::arg("config"), py::arg("initial"))
      .def(
          "push",
          [](MheEstimator& self, double t, const GeneralizedState& s, const VecX& tau,
             std::optional<Vec6> tau_mv) {
            std::string why;
            if (!self.push_sample(t, s, GeneralizedForce::FromStacked(tau), tau_mv, &why)) {
              throw DataError(why);
            }
          },
          py::arg("t"), py::arg("state"), py::arg("tau"), py::arg("tau_mv") = py::none())
      .def(
          "step",
          [](MheEstimator& self, double t) {
            const EstimateState& s = self.step(t);
            py::dict d;
            d["pi"] = s.pi.values();
            d["std"] = VecX(s.sigma.diagonal().cwiseMax(0.0).cwiseSqrt());
            d["stage"] = s.stage;
            d["iterations"] = s.iterations;
            d["held"] = s.held;
            d["status"] = to_string(s.status);
            d["objective"] = s.objective;
            return d;
          },
          py::arg("t"))
      .def_property_readonly("pi", [](const MheEstimator& self) { return self.state().pi.values(); })
      .def_property_readonly("sigma", [](const MheEstimator& self) { return self.state().sigma; });

  m.def(
      "metrics",
      [](const MatX& predicted, const MatX& measured, const std::vector<std::string>& names) {
        py::dict out;
        for (const ChannelMetrics& c : compute_metrics(predicted, measured, names).channels) {
          py::dict d;
          d["r2"] = c.r2 ? py::cast(*c.r2) : py::none();
          d["slope"] = c.slope;
          d["rmse"] = c.rmse;
          d["mae"] = c.mae;
          out[py::str(c.name)] = d;
        }
        return out;
      },
      py::arg("predicted"), py::arg("measured"), py::arg("names") = std::vector<std::string>{},
      "Per-channel R^2, slope, RMSE and MAE; columns are channels.");
  m.def("confidence_interval", [](const VecX& pi, const MatX& sigma, double level) {
    const ConfidenceIntervals ci = confidence_interval(pi, sigma, level);
    return py::make_tuple(ci.lo, ci.hi);
  }, py::arg("pi"), py::arg("sigma"), py::arg("level") = 0.95);
}
