#include "lupts/estimators.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

namespace lupts {

namespace {

void validate_dataset(const TrajectoryDataset& data, int min_horizon) {
  if (data.states.empty()) {
    throw Error("invalid_argument", "dataset has no state matrices");
  }
  if (data.horizon() < min_horizon) {
    throw Error("invalid_argument", "dataset horizon " + std::to_string(data.horizon()) +
                                        " is below the required " + std::to_string(min_horizon));
  }
  const Index m = data.states.front().rows();
  const Index d = data.states.front().cols();
  if (m < 1) {
    throw Error("invalid_argument", "dataset has no rows");
  }
  for (const Matrix& s : data.states) {
    if (s.rows() != m || s.cols() != d) {
      throw Error("dimension_mismatch", "state matrices disagree on shape");
    }
  }
  if (data.outcomes.size() != m) {
    throw Error("dimension_mismatch", "outcome vector length does not match state rows");
  }
}

void validate_lambda(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0 || lambda > 1.0) {
    throw Error("invalid_argument",
                "distillation weight must lie in [0, 1], got " + std::to_string(lambda));
  }
}

AffineMap fit_affine(const Matrix& design, const Matrix& targets, bool intercept) {
  AffineMap map;
  if (!intercept) {
    map.weights = solve_least_squares(design, targets).coefficients;
    map.offset = Eigen::RowVectorXd::Zero(targets.cols());
    return map;
  }
  const Eigen::RowVectorXd design_mean = design.colwise().mean();
  const Eigen::RowVectorXd target_mean = targets.colwise().mean();
  map.weights =
      solve_least_squares(design.rowwise() - design_mean, targets.rowwise() - target_mean)
          .coefficients;
  map.offset = target_mean - design_mean * map.weights;
  return map;
}

AffineMap fit_ridge(const Matrix& design, const Matrix& targets, double lambda, bool intercept) {
  if (!std::isfinite(lambda) || lambda < 0.0) {
    throw Error("invalid_argument", "ridge regularization must be finite and >= 0");
  }
  if (lambda == 0.0) {
    return fit_affine(design, targets, intercept);
  }
  if (design.rows() != targets.rows()) {
    throw Error("dimension_mismatch", "ridge design and targets disagree on rows");
  }
  require_finite(design, "ridge design");
  require_finite(targets, "ridge targets");

  AffineMap map;
  Eigen::RowVectorXd design_mean = Eigen::RowVectorXd::Zero(design.cols());
  Eigen::RowVectorXd target_mean = Eigen::RowVectorXd::Zero(targets.cols());
  if (intercept) {
    design_mean = design.colwise().mean();
    target_mean = targets.colwise().mean();
  }
  const Matrix x = design.rowwise() - design_mean;
  const Matrix y = targets.rowwise() - target_mean;
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  map.weights = gram.ldlt().solve(x.transpose() * y);
  map.offset = target_mean - design_mean * map.weights;
  return map;
}

AffineMap fit_by_spec(const Matrix& design, const Matrix& targets, const RegressorSpec& spec,
                      bool intercept) {
  switch (spec.kind) {
    case RegressorSpec::Kind::least_squares:
      return fit_affine(design, targets, intercept);
    case RegressorSpec::Kind::ridge:
      return fit_ridge(design, targets, spec.lambda_reg, intercept);
  }
  throw Error("invalid_argument", "unknown regressor kind");
}

// x -> second(first(x)) for row-vector inputs.
AffineMap compose(const AffineMap& first, const AffineMap& second) {
  AffineMap out;
  out.weights = first.weights * second.weights;
  out.offset = first.offset * second.weights + second.offset;
  return out;
}

ChainFit assemble_chain(std::vector<AffineMap> steps, const AffineMap& outcome) {
  ChainFit fit;
  AffineMap total{Matrix::Identity(steps.front().weights.rows(), steps.front().weights.rows()),
                  Eigen::RowVectorXd::Zero(steps.front().weights.rows())};
  fit.step_coefficients.reserve(steps.size());
  for (const AffineMap& step : steps) {
    fit.step_coefficients.push_back(step.weights);
    total = compose(total, step);
  }
  total = compose(total, outcome);
  fit.outcome_coefficients = outcome.weights.col(0);
  fit.composed.theta = total.weights.col(0);
  fit.composed.intercept = total.offset(0);
  return fit;
}

std::vector<std::vector<double>> matrix_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    rows[static_cast<std::size_t>(r)].assign(m.row(r).begin(), m.row(r).end());
  }
  return rows;
}

}  // namespace

LinearPredictor fit_baseline(const TrajectoryDataset& data, const FitOptions& options) {
  validate_dataset(data, 1);
  const AffineMap map = fit_affine(data.states.front(), data.outcomes, options.fit_intercept);
  return {map.weights.col(0), map.offset(0)};
}

ChainFit fit_lupts(const TrajectoryDataset& data, const FitOptions& options) {
  validate_dataset(data, 2);
  std::vector<AffineMap> steps;
  steps.reserve(static_cast<std::size_t>(data.horizon() - 1));
  for (int t = 0; t + 1 < data.horizon(); ++t) {
    steps.push_back(fit_affine(data.states[static_cast<std::size_t>(t)],
                               data.states[static_cast<std::size_t>(t + 1)],
                               options.fit_intercept));
  }
  const AffineMap outcome =
      fit_affine(data.states.back(), data.outcomes, options.fit_intercept);
  return assemble_chain(std::move(steps), outcome);
}

ChainFit fit_stat_lupts(const TrajectoryDataset& data, const FitOptions& options) {
  validate_dataset(data, 2);
  const Index m = data.rows();
  const Index d = data.dim();
  const int steps = data.horizon() - 1;

  Matrix pooled_design(m * steps, d);
  Matrix pooled_targets(m * steps, d);
  for (int t = 0; t < steps; ++t) {
    pooled_design.middleRows(m * t, m) = data.states[static_cast<std::size_t>(t)];
    pooled_targets.middleRows(m * t, m) = data.states[static_cast<std::size_t>(t + 1)];
  }
  const AffineMap shared = fit_affine(pooled_design, pooled_targets, options.fit_intercept);
  const AffineMap outcome =
      fit_affine(data.states.back(), data.outcomes, options.fit_intercept);
  return assemble_chain(std::vector<AffineMap>(static_cast<std::size_t>(steps), shared), outcome);
}

LinearPredictor fit_distill_seq(const TrajectoryDataset& data, double lambda,
                                const FitOptions& options) {
  validate_lambda(lambda);
  const LinearPredictor direct = fit_baseline(data, options);
  const ChainFit recursive = fit_lupts(data, options);
  return {lambda * direct.theta + (1.0 - lambda) * recursive.composed.theta,
          lambda * direct.intercept + (1.0 - lambda) * recursive.composed.intercept};
}

LinearPredictor fit_distill_concat(const TrajectoryDataset& data, double lambda,
                                   const DistillConcatOptions& options) {
  validate_lambda(lambda);
  validate_dataset(data, 2);
  const Index m = data.rows();
  const Index d = data.dim();
  const int first_block = options.include_baseline_block ? 0 : 1;
  const int blocks = data.horizon() - first_block;

  Matrix concat(m, d * blocks);
  for (int b = 0; b < blocks; ++b) {
    concat.middleCols(d * b, d) = data.states[static_cast<std::size_t>(first_block + b)];
  }
  const AffineMap teacher = fit_affine(concat, data.outcomes, options.fit.fit_intercept);
  const Vector soft = concat * teacher.weights.col(0) + Vector::Constant(m, teacher.offset(0));
  const Vector blended = lambda * data.outcomes + (1.0 - lambda) * soft;
  const AffineMap student = fit_affine(data.states.front(), blended, options.fit.fit_intercept);
  return {student.weights.col(0), student.offset(0)};
}

ComposedPredictor fit_composed(const TrajectoryDataset& data, const RegressorSpec& step_spec,
                               const RegressorSpec& outcome_spec, const FitOptions& options) {
  validate_dataset(data, 2);
  ComposedPredictor predictor;
  predictor.step_models.reserve(static_cast<std::size_t>(data.horizon() - 1));
  for (int t = 0; t + 1 < data.horizon(); ++t) {
    predictor.step_models.push_back(fit_by_spec(data.states[static_cast<std::size_t>(t)],
                                                data.states[static_cast<std::size_t>(t + 1)],
                                                step_spec, options.fit_intercept));
  }
  predictor.outcome_model =
      fit_by_spec(data.states.back(), data.outcomes, outcome_spec, options.fit_intercept);
  return predictor;
}

Vector predict(const LinearPredictor& predictor, const Matrix& baseline) {
  if (baseline.cols() != predictor.theta.size()) {
    throw Error("dimension_mismatch",
                "predictor has dimension " + std::to_string(predictor.theta.size()) +
                    " but baseline has " + std::to_string(baseline.cols()) + " columns");
  }
  return ((baseline * predictor.theta).array() + predictor.intercept).matrix();
}

Matrix simulate_final_state(const ComposedPredictor& predictor, const Matrix& baseline) {
  if (predictor.step_models.empty() ||
      baseline.cols() != predictor.step_models.front().weights.rows()) {
    throw Error("dimension_mismatch", "baseline width does not match the composed step maps");
  }
  Matrix state = baseline;
  for (const AffineMap& step : predictor.step_models) {
    state = (state * step.weights).rowwise() + step.offset;
  }
  return state;
}

Vector apply_outcome_model(const ComposedPredictor& predictor, const Matrix& final_state) {
  if (final_state.cols() != predictor.outcome_model.weights.rows()) {
    throw Error("dimension_mismatch", "state width does not match the outcome map");
  }
  return ((final_state * predictor.outcome_model.weights.col(0)).array() +
          predictor.outcome_model.offset(0))
      .matrix();
}

Vector predict(const ComposedPredictor& predictor, const Matrix& baseline) {
  return apply_outcome_model(predictor, simulate_final_state(predictor, baseline));
}

LinearPredictor collapse_composed(const ComposedPredictor& predictor) {
  if (predictor.step_models.empty()) {
    throw Error("invalid_argument", "composed predictor has no step maps");
  }
  const Index d = predictor.step_models.front().weights.rows();
  AffineMap total{Matrix::Identity(d, d), Eigen::RowVectorXd::Zero(d)};
  for (const AffineMap& step : predictor.step_models) {
    total = compose(total, step);
  }
  total = compose(total, predictor.outcome_model);
  return {total.weights.col(0), total.offset(0)};
}

nlohmann::json predictor_to_json(const LinearPredictor& p) {
  return {{"kind", "linear"},
          {"theta", std::vector<double>(p.theta.begin(), p.theta.end())},
          {"intercept", p.intercept}};
}

nlohmann::json predictor_to_json(const ChainFit& fit, const std::string& estimator) {
  nlohmann::json j;
  j["kind"] = "chain";
  j["estimator"] = estimator;
  j["step_coefficients"] = nlohmann::json::array();
  for (const Matrix& step : fit.step_coefficients) {
    j["step_coefficients"].push_back(matrix_rows(step));
  }
  j["outcome_coefficients"] =
      std::vector<double>(fit.outcome_coefficients.begin(), fit.outcome_coefficients.end());
  j["theta"] = std::vector<double>(fit.composed.theta.begin(), fit.composed.theta.end());
  j["intercept"] = fit.composed.intercept;
  return j;
}

LinearPredictor linear_predictor_from_json(const nlohmann::json& j) {
  try {
    const auto theta = j.at("theta").get<std::vector<double>>();
    LinearPredictor p;
    p.theta = Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size()));
    p.intercept = j.value("intercept", 0.0);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("invalid predictor JSON: ") + e.what());
  }
}

ChainFit chain_fit_from_json(const nlohmann::json& j) {
  try {
    ChainFit fit;
    for (const auto& step : j.at("step_coefficients")) {
      const std::size_t rows = step.size();
      const std::size_t cols = step.front().size();
      Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          m(static_cast<Index>(r), static_cast<Index>(c)) = step[r][c].get<double>();
        }
      }
      fit.step_coefficients.push_back(std::move(m));
    }
    const auto beta = j.at("outcome_coefficients").get<std::vector<double>>();
    fit.outcome_coefficients =
        Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
    const auto theta = j.at("theta").get<std::vector<double>>();
    fit.composed.theta = Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size()));
    fit.composed.intercept = j.value("intercept", 0.0);
    return fit;
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("invalid chain fit JSON: ") + e.what());
  }
}

}  // namespace lupts
