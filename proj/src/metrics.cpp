#include "lupts/metrics.hpp"

#include <cmath>
#include <string>

namespace lupts {

double relative_parameter_mse(const Vector& estimate, const Vector& truth) {
  if (estimate.size() != truth.size()) {
    throw Error("dimension_mismatch", "estimate and truth disagree on dimension");
  }
  require_finite(estimate, "estimate");
  require_finite(truth, "truth");
  const double denom = truth.squaredNorm();
  if (denom == 0.0) {
    throw Error("degenerate", "relative MSE is undefined for a zero-norm truth");
  }
  return (estimate - truth).squaredNorm() / denom;
}

double relative_parameter_mse(const LinearPredictor& estimate, const LinearPredictor& truth) {
  return relative_parameter_mse(estimate.theta, truth.theta);
}

double r_squared(const Vector& predictions, const Vector& actuals) {
  if (predictions.size() != actuals.size()) {
    throw Error("dimension_mismatch", "predictions and actuals disagree on length");
  }
  if (actuals.size() < 2) {
    throw Error("invalid_argument", "coefficient of determination needs at least two rows");
  }
  require_finite(predictions, "predictions");
  require_finite(actuals, "actuals");
  const double mean = actuals.mean();
  const double total = (actuals.array() - mean).matrix().squaredNorm();
  if (total == 0.0) {
    throw Error("degenerate", "coefficient of determination is undefined for constant actuals");
  }
  const double residual = (actuals - predictions).squaredNorm();
  return 1.0 - residual / total;
}

namespace {

double mean_squared_error(const Vector& predictions, const Vector& actuals) {
  return (predictions - actuals).squaredNorm() / static_cast<double>(actuals.size());
}

}  // namespace

double empirical_risk(const LinearPredictor& predictor, const TrajectoryDataset& test) {
  if (test.rows() < 1) {
    throw Error("invalid_argument", "empty test set");
  }
  return mean_squared_error(predict(predictor, test.states.front()), test.outcomes);
}

double empirical_risk(const ComposedPredictor& predictor, const TrajectoryDataset& test) {
  if (test.rows() < 1) {
    throw Error("invalid_argument", "empty test set");
  }
  return mean_squared_error(predict(predictor, test.states.front()), test.outcomes);
}

double mse_gap(const LinearPredictor& theta_a, const LinearPredictor& theta_b) {
  if (theta_a.theta.size() != theta_b.theta.size()) {
    throw Error("dimension_mismatch", "estimates disagree on dimension");
  }
  return (theta_a.theta - theta_b.theta).squaredNorm();
}

RiskExpansionTerms risk_expansion_terms(const ComposedPredictor& composed,
                                        const TrajectoryDataset& test) {
  if (test.horizon() < 2) {
    throw Error("invalid_argument", "risk expansion needs the intermediate states");
  }
  const Matrix simulated = simulate_final_state(composed, test.states.front());
  const Vector through_simulated = apply_outcome_model(composed, simulated);
  const Vector through_actual = apply_outcome_model(composed, test.states.back());

  RiskExpansionTerms terms;
  terms.total = mean_squared_error(through_simulated, test.outcomes);
  terms.dynamics = mean_squared_error(through_simulated, through_actual);
  terms.outcome = mean_squared_error(through_actual, test.outcomes);
  return terms;
}

}  // namespace lupts
