// Python bindings for the estimator library: dense least squares, system
// generation and sampling, the recursive/distilled estimator fits, metrics,
// CSV ingestion and the experiment runner. Matrices cross the boundary as
// numpy arrays via pybind11's Eigen support.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "lupts/dataio.hpp"
#include "lupts/estimators.hpp"
#include "lupts/harness.hpp"
#include "lupts/metrics.hpp"
#include "lupts/regression.hpp"
#include "lupts/rng.hpp"
#include "lupts/synth.hpp"

namespace py = pybind11;
using namespace lupts;

namespace {

TrajectoryDataset make_dataset(std::vector<Matrix> states, Vector outcomes) {
  TrajectoryDataset data;
  data.states = std::move(states);
  data.outcomes = std::move(outcomes);
  if (data.states.empty()) {
    throw Error("invalid_argument", "dataset needs at least one state matrix");
  }
  const Index m = data.states.front().rows();
  const Index d = data.states.front().cols();
  for (const Matrix& s : data.states) {
    if (s.rows() != m || s.cols() != d) {
      throw Error("dimension_mismatch", "state matrices disagree on shape");
    }
  }
  if (data.outcomes.size() != m) {
    throw Error("dimension_mismatch", "outcome length does not match state rows");
  }
  return data;
}

std::string json_dump(const nlohmann::json& j) { return j.dump(); }

nlohmann::json json_parse(const std::string& text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Privileged time-series estimators: recursive least-squares chains, "
            "distillation variants, a seeded linear-system simulator and the "
            "experiment harness.";

  py::register_exception<Error>(m, "LuptsError", PyExc_RuntimeError);

  // regression core
  py::class_<LeastSquaresFit>(m, "LeastSquaresFit")
      .def_readonly("coefficients", &LeastSquaresFit::coefficients)
      .def_readonly("residuals", &LeastSquaresFit::residuals)
      .def_readonly("rank", &LeastSquaresFit::rank);
  m.def("solve_least_squares", &solve_least_squares, py::arg("design"), py::arg("targets"));
  m.def("matrix_chain_product", &matrix_chain_product, py::arg("factors"));
  m.def("matrix_power", &matrix_power, py::arg("base"), py::arg("exponent"));
  m.def("spectral_radius", &spectral_radius, py::arg("square"));

  // rng
  py::class_<RngStream>(m, "RngStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("master_seed"),
           py::arg("stream_index"))
      .def_property_readonly("master_seed", &RngStream::master_seed)
      .def_property_readonly("stream_index", &RngStream::stream_index)
      .def("next_u64", &RngStream::next_u64)
      .def("next_uniform", &RngStream::next_uniform)
      .def("next_normal", &RngStream::next_normal)
      .def("normal_matrix", &RngStream::normal_matrix, py::arg("rows"), py::arg("cols"));

  // synth
  py::class_<InitialState>(m, "InitialState")
      .def(py::init<>())
      .def(py::init<double, double>(), py::arg("mean"), py::arg("std"))
      .def_readwrite("mean", &InitialState::mean)
      .def_readwrite("std", &InitialState::std);

  py::class_<SystemConfig>(m, "SystemConfig")
      .def(py::init<>())
      .def_readwrite("dim", &SystemConfig::dim)
      .def_readwrite("horizon", &SystemConfig::horizon)
      .def_readwrite("kappa", &SystemConfig::kappa)
      .def_readwrite("entry_std", &SystemConfig::entry_std)
      .def_readwrite("noise_scales", &SystemConfig::noise_scales)
      .def_readwrite("outcome_noise", &SystemConfig::outcome_noise)
      .def_readwrite("initial_state", &SystemConfig::initial_state)
      .def_readwrite("stationary", &SystemConfig::stationary);

  py::class_<SystemSpec>(m, "SystemSpec")
      .def_readonly("dim", &SystemSpec::dim)
      .def_readonly("horizon", &SystemSpec::horizon)
      .def_readonly("transitions", &SystemSpec::transitions)
      .def_readonly("outcome_weights", &SystemSpec::outcome_weights)
      .def_readonly("noise_scales", &SystemSpec::noise_scales)
      .def_readonly("outcome_noise", &SystemSpec::outcome_noise)
      .def_readonly("initial_state", &SystemSpec::initial_state)
      .def_property_readonly("markov_violation",
                             [](const SystemSpec& s) -> py::object {
                               if (!s.markov_violation) return py::none();
                               return py::cast(*s.markov_violation);
                             })
      .def_readonly("stationary", &SystemSpec::stationary)
      .def("to_json", [](const SystemSpec& s) { return json_dump(system_to_json(s)); })
      .def_static("from_json",
                  [](const std::string& text) { return system_from_json(json_parse(text)); });

  py::class_<TrajectoryDataset>(m, "TrajectoryDataset")
      .def(py::init(&make_dataset), py::arg("states"), py::arg("outcomes"))
      .def_readonly("states", &TrajectoryDataset::states)
      .def_readonly("outcomes", &TrajectoryDataset::outcomes)
      .def_property_readonly("rows", &TrajectoryDataset::rows)
      .def_property_readonly("dim", &TrajectoryDataset::dim)
      .def_property_readonly("horizon", &TrajectoryDataset::horizon);

  m.def("generate_system", &generate_system, py::arg("config"), py::arg("rng"));
  m.def("sample_trajectories", &sample_trajectories, py::arg("spec"), py::arg("m"),
        py::arg("rng"));
  m.def("true_theta", &true_theta, py::arg("spec"));
  m.def("irreducible_risk", &irreducible_risk, py::arg("spec"));
  m.def("scale_markov_violation", &scale_markov_violation, py::arg("spec"), py::arg("ratio"));

  // estimators
  py::class_<LinearPredictor>(m, "LinearPredictor")
      .def(py::init([](Vector theta, double intercept) {
             return LinearPredictor{std::move(theta), intercept};
           }),
           py::arg("theta"), py::arg("intercept") = 0.0)
      .def_readonly("theta", &LinearPredictor::theta)
      .def_readonly("intercept", &LinearPredictor::intercept)
      .def("to_json", [](const LinearPredictor& p) { return json_dump(predictor_to_json(p)); })
      .def_static("from_json", [](const std::string& text) {
        return linear_predictor_from_json(json_parse(text));
      });

  py::class_<ChainFit>(m, "ChainFit")
      .def_readonly("step_coefficients", &ChainFit::step_coefficients)
      .def_readonly("outcome_coefficients", &ChainFit::outcome_coefficients)
      .def_readonly("composed", &ChainFit::composed)
      .def("to_json",
           [](const ChainFit& f) { return json_dump(predictor_to_json(f, "chain")); })
      .def_static("from_json",
                  [](const std::string& text) { return chain_fit_from_json(json_parse(text)); });

  py::class_<RegressorSpec>(m, "RegressorSpec")
      .def_static("least_squares", &RegressorSpec::least_squares)
      .def_static("ridge", &RegressorSpec::ridge, py::arg("lambda_reg"));

  py::class_<AffineMap>(m, "AffineMap")
      .def_readonly("weights", &AffineMap::weights)
      .def_readonly("offset", &AffineMap::offset);

  py::class_<ComposedPredictor>(m, "ComposedPredictor")
      .def_readonly("step_models", &ComposedPredictor::step_models)
      .def_readonly("outcome_model", &ComposedPredictor::outcome_model);

  py::class_<FitOptions>(m, "FitOptions")
      .def(py::init<>())
      .def_readwrite("fit_intercept", &FitOptions::fit_intercept);

  m.def("fit_baseline", &fit_baseline, py::arg("data"), py::arg("options") = FitOptions{});
  m.def("fit_lupts", &fit_lupts, py::arg("data"), py::arg("options") = FitOptions{});
  m.def("fit_stat_lupts", &fit_stat_lupts, py::arg("data"), py::arg("options") = FitOptions{});
  m.def("fit_distill_seq", &fit_distill_seq, py::arg("data"), py::arg("lambda_"),
        py::arg("options") = FitOptions{});
  m.def(
      "fit_distill_concat",
      [](const TrajectoryDataset& data, double lambda, bool include_baseline_block) {
        DistillConcatOptions options;
        options.include_baseline_block = include_baseline_block;
        return fit_distill_concat(data, lambda, options);
      },
      py::arg("data"), py::arg("lambda_"), py::arg("include_baseline_block") = true);
  m.def("fit_composed", &fit_composed, py::arg("data"),
        py::arg("step_spec") = RegressorSpec::least_squares(),
        py::arg("outcome_spec") = RegressorSpec::least_squares(),
        py::arg("options") = FitOptions{});
  m.def("predict",
        py::overload_cast<const LinearPredictor&, const Matrix&>(&predict),
        py::arg("predictor"), py::arg("baseline"));
  m.def("predict",
        py::overload_cast<const ComposedPredictor&, const Matrix&>(&predict),
        py::arg("predictor"), py::arg("baseline"));
  m.def("simulate_final_state", &simulate_final_state, py::arg("predictor"), py::arg("baseline"));
  m.def("apply_outcome_model", &apply_outcome_model, py::arg("predictor"), py::arg("final_state"));
  m.def("collapse_composed", &collapse_composed, py::arg("predictor"));

  // metrics
  m.def("relative_parameter_mse",
        py::overload_cast<const Vector&, const Vector&>(&relative_parameter_mse),
        py::arg("estimate"), py::arg("truth"));
  m.def("r_squared", &r_squared, py::arg("predictions"), py::arg("actuals"));
  m.def("empirical_risk",
        py::overload_cast<const LinearPredictor&, const TrajectoryDataset&>(&empirical_risk),
        py::arg("predictor"), py::arg("test"));
  m.def("empirical_risk",
        py::overload_cast<const ComposedPredictor&, const TrajectoryDataset&>(&empirical_risk),
        py::arg("predictor"), py::arg("test"));
  m.def("mse_gap", &mse_gap, py::arg("theta_a"), py::arg("theta_b"));

  py::class_<RiskExpansionTerms>(m, "RiskExpansionTerms")
      .def_readonly("total", &RiskExpansionTerms::total)
      .def_readonly("dynamics", &RiskExpansionTerms::dynamics)
      .def_readonly("outcome", &RiskExpansionTerms::outcome);
  m.def("risk_expansion_terms", &risk_expansion_terms, py::arg("composed"), py::arg("test"));

  // dataio
  py::class_<CsvSchema>(m, "CsvSchema")
      .def(py::init<>())
      .def_readwrite("horizon", &CsvSchema::horizon)
      .def_readwrite("dim", &CsvSchema::dim)
      .def_readwrite("outcome_column", &CsvSchema::outcome_column)
      .def_readwrite("missing_marker", &CsvSchema::missing_marker);

  py::class_<TrajectoryTable>(m, "TrajectoryTable")
      .def_readonly("column_names", &TrajectoryTable::column_names)
      .def_readonly("horizon", &TrajectoryTable::horizon)
      .def_readonly("dim", &TrajectoryTable::dim)
      .def_property_readonly("rows", &TrajectoryTable::rows);

  py::class_<PreprocessStats>(m, "PreprocessStats")
      .def_readonly("mean", &PreprocessStats::mean)
      .def_readonly("std", &PreprocessStats::std)
      .def_readonly("imputed", &PreprocessStats::imputed)
      .def_readonly("dropped_features", &PreprocessStats::dropped_features);

  m.def("load_trajectory_csv", &load_trajectory_csv, py::arg("path"), py::arg("schema"));
  m.def("fit_preprocess", &fit_preprocess, py::arg("train"));
  m.def("apply_preprocess", &apply_preprocess, py::arg("table"), py::arg("stats"));
  m.def(
      "split_rows",
      [](const TrajectoryTable& table, double train, double test, RngStream& rng) {
        return split_rows(table, SplitFractions{train, test}, rng);
      },
      py::arg("table"), py::arg("train_fraction"), py::arg("test_fraction"), py::arg("rng"));
  m.def("sample_without_replacement", &sample_without_replacement, py::arg("population"),
        py::arg("k"), py::arg("rng"));
  m.def("table_from_dataset", &table_from_dataset, py::arg("data"));
  m.def("dataset_from_table", &dataset_from_table, py::arg("table"));

  // harness
  py::enum_<SweepAxis>(m, "SweepAxis")
      .value("n", SweepAxis::n)
      .value("T", SweepAxis::T)
      .value("sigma", SweepAxis::sigma)
      .value("delta_ratio", SweepAxis::delta_ratio)
      .value("lambda_", SweepAxis::lambda);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("system", &ExperimentConfig::system)
      .def_readwrite("axis", &ExperimentConfig::axis)
      .def_readwrite("sweep_values", &ExperimentConfig::sweep_values)
      .def_readwrite("train_size", &ExperimentConfig::train_size)
      .def_readwrite("test_size", &ExperimentConfig::test_size)
      .def_readwrite("replicates", &ExperimentConfig::replicates)
      .def_readwrite("estimators", &ExperimentConfig::estimators)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("output_path", &ExperimentConfig::output_path)
      .def_readwrite("fix_system", &ExperimentConfig::fix_system)
      .def_readwrite("delta_ratio", &ExperimentConfig::delta_ratio)
      .def_readwrite("lambda_", &ExperimentConfig::lambda)
      .def_readwrite("select_lambda", &ExperimentConfig::select_lambda)
      .def_readwrite("ridge_lambda", &ExperimentConfig::ridge_lambda)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def("to_json", [](const ExperimentConfig& c) { return json_dump(config_to_json(c)); })
      .def_static("from_json", [](const std::string& text) {
        return config_from_json(json_parse(text));
      });

  py::class_<MetricRecord>(m, "MetricRecord")
      .def_readonly("estimator", &MetricRecord::estimator)
      .def_readonly("seed", &MetricRecord::seed)
      .def_readonly("n", &MetricRecord::n)
      .def_readonly("horizon", &MetricRecord::horizon)
      .def_readonly("dim", &MetricRecord::dim)
      .def_readonly("relative_mse", &MetricRecord::relative_mse)
      .def_readonly("r_squared", &MetricRecord::r_squared)
      .def_readonly("empirical_risk", &MetricRecord::empirical_risk)
      .def_readonly("extra", &MetricRecord::extra)
      .def_readonly("error", &MetricRecord::error);

  py::class_<AggregateCell>(m, "AggregateCell")
      .def_readonly("axis_value", &AggregateCell::axis_value)
      .def_readonly("estimator", &AggregateCell::estimator)
      .def_readonly("metric", &AggregateCell::metric)
      .def_readonly("mean", &AggregateCell::mean)
      .def_readonly("stddev", &AggregateCell::stddev)
      .def_readonly("stderror", &AggregateCell::stderror)
      .def_readonly("count", &AggregateCell::count)
      .def_readonly("failures", &AggregateCell::failures);

  py::class_<ResultTable>(m, "ResultTable")
      .def_readonly("axis", &ResultTable::axis)
      .def_readonly("rows", &ResultTable::rows)
      .def_readonly("row_axis_values", &ResultTable::row_axis_values)
      .def_readonly("aggregates", &ResultTable::aggregates)
      .def_property_readonly("config",
                             [](const ResultTable& t) { return json_dump(t.config); });

  m.def("run_experiment", &run_experiment, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("preset", &preset, py::arg("name"));
  m.def("preset_names", &preset_names);
  m.def("write_results", &write_results, py::arg("table"), py::arg("path"));
  m.def("known_estimators", []() { return known_estimators(); });

  py::class_<IngestConfig>(m, "IngestConfig")
      .def(py::init<>())
      .def_readwrite("csv_path", &IngestConfig::csv_path)
      .def_readwrite("schema", &IngestConfig::schema)
      .def_readwrite("train_sizes", &IngestConfig::train_sizes)
      .def_readwrite("estimators", &IngestConfig::estimators)
      .def_readwrite("replicates", &IngestConfig::replicates)
      .def_readwrite("master_seed", &IngestConfig::master_seed)
      .def_readwrite("test_fraction", &IngestConfig::test_fraction)
      .def_readwrite("output_path", &IngestConfig::output_path)
      .def_readwrite("lambda_", &IngestConfig::lambda)
      .def_readwrite("select_lambda", &IngestConfig::select_lambda);
  m.def("run_ingest", &run_ingest, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.attr("__version__") = "0.1.0";
}
