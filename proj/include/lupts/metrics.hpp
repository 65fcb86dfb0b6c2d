#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "lupts/estimators.hpp"
#include "lupts/synth.hpp"
#include "lupts/types.hpp"

namespace lupts {

/// One replicate's evaluation of one estimator.
struct MetricRecord {
  std::string estimator;
  std::uint64_t seed = 0;  // stream index the replicate ran on
  Index n = 0;
  int horizon = 0;
  int dim = 0;
  double relative_mse = std::numeric_limits<double>::quiet_NaN();
  double r_squared = std::numeric_limits<double>::quiet_NaN();
  double empirical_risk = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> extra;  // gap, risk-expansion terms, chosen lambda
  std::string error;                    // error code when the fit failed
};

/// ||estimate - truth||^2 / ||truth||^2.
double relative_parameter_mse(const LinearPredictor& estimate, const LinearPredictor& truth);
double relative_parameter_mse(const Vector& estimate, const Vector& truth);

/// 1 - RSS/TSS with TSS about the mean of actuals. Requires at least two
/// rows and non-constant actuals.
double r_squared(const Vector& predictions, const Vector& actuals);

/// Mean squared prediction error on a held-out set, predicting from the
/// baseline states only.
double empirical_risk(const LinearPredictor& predictor, const TrajectoryDataset& test);
double empirical_risk(const ComposedPredictor& predictor, const TrajectoryDataset& test);

/// Per-dataset squared distance between two estimates; replicate means of
/// this quantity estimate the MSE gap between the direct and recursive
/// estimators.
double mse_gap(const LinearPredictor& theta_a, const LinearPredictor& theta_b);

/// The three terms of the risk-expansion decomposition, evaluated on a
/// held-out set that carries all intermediate states:
///   total    = mean (Y - g(f(X_1)))^2
///   dynamics = mean (g(f(X_1)) - g(X_T))^2
///   outcome  = mean (Y - g(X_T))^2
struct RiskExpansionTerms {
  double total = 0.0;
  double dynamics = 0.0;
  double outcome = 0.0;
};

RiskExpansionTerms risk_expansion_terms(const ComposedPredictor& composed,
                                        const TrajectoryDataset& test);

}  // namespace lupts
