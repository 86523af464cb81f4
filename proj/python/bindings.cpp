#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "cureph/cli_runner.hpp"
#include "cureph/diagnostics.hpp"
#include "cureph/errors.hpp"
#include "cureph/matrix_core.hpp"
#include "cureph/model_io.hpp"

namespace py = pybind11;
using namespace cureph;

namespace {

SurvivalDataset make_dataset(const Eigen::VectorXd& time,
                             const Eigen::VectorXi& event,
                             const std::optional<Eigen::MatrixXd>& covariates) {
  SurvivalDataset data{time, event, covariates};
  data.validate();
  return data;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cure-rate phase-type survival models";

  py::register_exception<Error>(m, "CurephError");

  // --- linear-algebra kernels ---------------------------------------------
  m.def("expm", &expm, py::arg("a"), "Matrix exponential");
  m.def("van_loan_integral", &van_loan_integral, py::arg("t"), py::arg("m"),
        py::arg("y"),
        "int_0^y exp(T(y-u)) M exp(T u) du via the augmented exponential");
  m.def("green_solve", &green_solve, py::arg("t_sub"), py::arg("b"),
        "Solves (-T_sub) x = b");

  // --- transforms -----------------------------------------------------------
  py::class_<TransformFamily>(m, "TransformFamily")
      .def_static("identity", &TransformFamily::identity)
      .def_static("weibull", &TransformFamily::weibull, py::arg("beta"))
      .def_static("lognormal", &TransformFamily::lognormal, py::arg("gamma"))
      .def_static("loglogistic", &TransformFamily::loglogistic,
                  py::arg("gamma"), py::arg("theta"))
      .def_static("gompertz", &TransformFamily::gompertz, py::arg("beta"))
      .def_static("from_name", &TransformFamily::from_name, py::arg("name"),
                  py::arg("params"))
      .def_property_readonly("name", &TransformFamily::name)
      .def_property_readonly("params", &TransformFamily::params)
      .def("g_inverse", &TransformFamily::g_inverse, py::arg("t"))
      .def("g_forward", &TransformFamily::g_forward, py::arg("y"))
      .def("intensity", &TransformFamily::intensity, py::arg("t"));

  // --- model -----------------------------------------------------------------
  py::class_<CureDecomposition>(m, "CureDecomposition")
      .def_readonly("susceptible_fraction",
                    &CureDecomposition::susceptible_fraction)
      .def_readonly("cure_rate", &CureDecomposition::cure_rate)
      .def_readonly("latency_alpha", &CureDecomposition::latency_alpha)
      .def_readonly("latency_T", &CureDecomposition::latency_T);

  py::class_<PhaseTypeCureModel>(m, "PhaseTypeCureModel")
      .def(py::init<Eigen::VectorXd, Eigen::MatrixXd>(), py::arg("pi"),
           py::arg("sub_intensity"))
      .def(py::init<Eigen::VectorXd, Eigen::MatrixXd,
                    PhaseTypeCureModel::Mask>(),
           py::arg("pi"), py::arg("sub_intensity"), py::arg("mask"))
      .def_property_readonly("dim", &PhaseTypeCureModel::dim)
      .def_property_readonly("pi", &PhaseTypeCureModel::pi)
      .def_property_readonly("sub_intensity",
                             &PhaseTypeCureModel::sub_intensity)
      .def_property_readonly("mask", &PhaseTypeCureModel::mask)
      .def_property_readonly("exit_rates", &PhaseTypeCureModel::exit_rates)
      .def("density", &PhaseTypeCureModel::density, py::arg("t"))
      .def("survival", &PhaseTypeCureModel::survival, py::arg("t"))
      .def("cure_rate", &PhaseTypeCureModel::cure_rate)
      .def("susceptible_fraction", &PhaseTypeCureModel::susceptible_fraction)
      .def("latency_decomposition", &PhaseTypeCureModel::latency_decomposition)
      .def("latency_survival", &PhaseTypeCureModel::latency_survival,
           py::arg("t"));

  m.def("iph_survival", &iph_survival, py::arg("model"), py::arg("transform"),
        py::arg("t"));
  m.def("iph_density", &iph_density, py::arg("model"), py::arg("transform"),
        py::arg("t"));

  m.def(
      "simulate_absorption",
      [](const PhaseTypeCureModel& model, int n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        Eigen::VectorXd time(n);
        Eigen::VectorXi immune(n);
        for (int i = 0; i < n; ++i) {
          const AbsorptionOutcome out = model.simulate_path(rng);
          immune[i] = out.state == AbsorptionState::Immune ? 1 : 0;
          time[i] = out.time;
        }
        return py::make_tuple(time, immune);
      },
      py::arg("model"), py::arg("n"), py::arg("seed"),
      "Simulates absorption outcomes; returns (times, immune_indicator)");

  m.def(
      "simulate_censored",
      [](const PhaseTypeCureModel& model, const TransformFamily& tf,
         double censor_upper, int n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return simulate_censored(model, tf, censor_upper, n, rng);
      },
      py::arg("model"), py::arg("transform"), py::arg("censor_upper"),
      py::arg("n"), py::arg("seed"));

  // --- data -------------------------------------------------------------------
  py::class_<SurvivalDataset>(m, "SurvivalDataset")
      .def(py::init(&make_dataset), py::arg("time"), py::arg("event"),
           py::arg("covariates") = std::nullopt)
      .def_readonly("time", &SurvivalDataset::time)
      .def_readonly("event", &SurvivalDataset::event)
      .def_readonly("covariates", &SurvivalDataset::covariates)
      .def_property_readonly("n", &SurvivalDataset::n);

  m.def("read_dataset", &read_dataset, py::arg("path"),
        py::arg("time_col") = "time", py::arg("status_col") = "status",
        py::arg("covariate_cols") = std::vector<std::string>{});

  // --- estimation ---------------------------------------------------------------
  py::class_<FitConfig>(m, "FitConfig")
      .def(py::init<>())
      .def_readwrite("max_steps", &FitConfig::max_steps)
      .def_readwrite("tol", &FitConfig::tol)
      .def_readwrite("update_transform", &FitConfig::update_transform);

  py::class_<MoeCureModel>(m, "MoeCureModel")
      .def(py::init<Eigen::MatrixXd, Eigen::MatrixXd,
                    PhaseTypeCureModel::Mask, TransformFamily>(),
           py::arg("beta"), py::arg("sub_intensity"), py::arg("mask"),
           py::arg("transform"))
      .def_readonly("beta", &MoeCureModel::beta)
      .def_readonly("sub_intensity", &MoeCureModel::sub_intensity)
      .def_readonly("mask", &MoeCureModel::mask)
      .def_readonly("transform", &MoeCureModel::transform)
      .def("pi_for", &MoeCureModel::pi_for, py::arg("x"));

  py::class_<FitReport>(m, "FitReport")
      .def_readonly("model", &FitReport::model)
      .def_readonly("transform", &FitReport::transform)
      .def_readonly("beta", &FitReport::beta)
      .def_readonly("loglik_trace", &FitReport::loglik_trace)
      .def_readonly("iterations", &FitReport::iterations)
      .def_readonly("converged", &FitReport::converged)
      .def_readonly("cure_rate", &FitReport::cure_rate)
      .def_readonly("susceptible_fraction_per_subject",
                    &FitReport::susceptible_fraction_per_subject)
      .def_property_readonly("loglikelihood", &FitReport::loglikelihood);

  m.def("loglikelihood",
        py::overload_cast<const PhaseTypeCureModel&, const TransformFamily&,
                          const SurvivalDataset&>(&loglikelihood),
        py::arg("model"), py::arg("transform"), py::arg("data"));
  m.def("loglikelihood",
        py::overload_cast<const MoeCureModel&, const SurvivalDataset&>(
            &loglikelihood),
        py::arg("model"), py::arg("data"));
  m.def("softmax_pi", &softmax_pi, py::arg("beta"), py::arg("x"));
  m.def("em_fit", &em_fit, py::arg("init"), py::arg("transform"),
        py::arg("data"), py::arg("config") = FitConfig{});
  m.def("moe_em_fit", &moe_em_fit, py::arg("init"), py::arg("data"),
        py::arg("config") = FitConfig{});

  // --- nonparametric ---------------------------------------------------------------
  py::class_<StepFunctionCurve>(m, "StepFunctionCurve")
      .def_readonly("times", &StepFunctionCurve::times)
      .def_readonly("values", &StepFunctionCurve::values)
      .def_readonly("lower", &StepFunctionCurve::lower)
      .def_readonly("upper", &StepFunctionCurve::upper)
      .def_readonly("baseline", &StepFunctionCurve::baseline)
      .def("value_at", &StepFunctionCurve::value_at, py::arg("t"))
      .def("plateau", &StepFunctionCurve::plateau);

  m.def("kaplan_meier", &kaplan_meier, py::arg("data"),
        py::arg("level") = 0.95);
  m.def(
      "nelson_aalen",
      [](const Eigen::VectorXd& times, const Eigen::VectorXi& events,
         const std::optional<Eigen::VectorXd>& weights) {
        return nelson_aalen(times, events, weights);
      },
      py::arg("times"), py::arg("events"), py::arg("weights") = std::nullopt);

  // --- selection ---------------------------------------------------------------
  py::class_<SelectionRow>(m, "SelectionRow")
      .def_readonly("r", &SelectionRow::r)
      .def_readonly("loglik", &SelectionRow::loglik)
      .def_readonly("exception_rate", &SelectionRow::exception_rate)
      .def_readonly("err1", &SelectionRow::err1)
      .def_readonly("err2", &SelectionRow::err2)
      .def_readonly("chosen", &SelectionRow::chosen);

  py::class_<SelectionReport>(m, "SelectionReport")
      .def_readonly("chosen_r", &SelectionReport::chosen_r)
      .def_readonly("fit", &SelectionReport::fit)
      .def_readonly("trace", &SelectionReport::trace)
      .def_readonly("early_stopped", &SelectionReport::early_stopped);

  m.def(
      "make_structure",
      [](const std::string& kind, int r, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return make_structure({structure_kind_from_name(kind), r}, rng);
      },
      py::arg("kind"), py::arg("r"), py::arg("seed"));
  m.def("precalibrate", &precalibrate, py::arg("model"), py::arg("s_inf"),
        py::arg("mean_xi"));
  m.def(
      "auto_select",
      [](const SurvivalDataset& data, int r_min, int r_max,
         const std::string& kind, int restarts, double level,
         const FitConfig& fit, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return auto_select(data, r_min, r_max,
                           structure_kind_from_name(kind),
                           SelectionConfig{restarts, level, fit}, rng);
      },
      py::arg("data"), py::arg("r_min"), py::arg("r_max"),
      py::arg("kind") = "gcoxian", py::arg("restarts") = 3,
      py::arg("level") = 0.95, py::arg("fit") = FitConfig{},
      py::arg("seed") = 12345);

  // --- diagnostics ---------------------------------------------------------------
  py::class_<ResidualSet>(m, "ResidualSet")
      .def_readonly("residuals", &ResidualSet::residuals)
      .def_readonly("event", &ResidualSet::event)
      .def_readonly("weights", &ResidualSet::weights);

  m.def("cs_residuals",
        py::overload_cast<const PhaseTypeCureModel&, const TransformFamily&,
                          const SurvivalDataset&>(&cs_residuals),
        py::arg("model"), py::arg("transform"), py::arg("data"));
  m.def("cs_residuals",
        py::overload_cast<const MoeCureModel&, const SurvivalDataset&>(
            &cs_residuals),
        py::arg("model"), py::arg("data"));
  m.def("modified_cs_residuals",
        py::overload_cast<const PhaseTypeCureModel&, const TransformFamily&,
                          const SurvivalDataset&>(&modified_cs_residuals),
        py::arg("model"), py::arg("transform"), py::arg("data"));
  m.def("modified_cs_residuals",
        py::overload_cast<const MoeCureModel&, const SurvivalDataset&>(
            &modified_cs_residuals),
        py::arg("model"), py::arg("data"));
  m.def("cumulative_hazard_plot_data", &cumulative_hazard_plot_data,
        py::arg("residuals"));
  m.def("cvm_criterion", &cvm_criterion, py::arg("residuals"));
  m.def("cvm_criterion_scaled", &cvm_criterion_scaled, py::arg("residuals"));

  // --- persistence ---------------------------------------------------------------
  m.def(
      "save_model",
      [](const PhaseTypeCureModel& model, const TransformFamily& tf,
         const std::optional<Eigen::MatrixXd>& beta, const std::string& path) {
        save_model(ModelDocument{model, tf, beta}, path);
      },
      py::arg("model"), py::arg("transform"), py::arg("beta"),
      py::arg("path"));
  m.def(
      "load_model",
      [](const std::string& path) {
        ModelDocument doc = load_model(path);
        return py::make_tuple(doc.model, doc.transform, doc.beta);
      },
      py::arg("path"), "Returns (model, transform, beta-or-None)");
}
