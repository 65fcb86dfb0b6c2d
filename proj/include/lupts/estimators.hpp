#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lupts/regression.hpp"
#include "lupts/synth.hpp"
#include "lupts/types.hpp"

namespace lupts {

/// A linear predictor of the outcome from baseline features only. The
/// intercept is 0 for all fits on centered/standardized data; fits with
/// fit_intercept=true absorb uncentered data through column means.
struct LinearPredictor {
  Vector theta;
  double intercept = 0.0;
};

/// A recursive fit: per-step transition estimates, the outcome regression,
/// and their composition collapsed into a baseline-only linear predictor.
/// The stationary variant stores T-1 copies of the shared transition so the
/// composition invariant (composed.theta = chain(steps) * outcome) holds
/// uniformly.
struct ChainFit {
  std::vector<Matrix> step_coefficients;  // T-1 of dim x dim
  Vector outcome_coefficients;            // beta-hat
  LinearPredictor composed;
};

/// Plug-in regression family for the generalized composed estimator.
struct RegressorSpec {
  enum class Kind { least_squares, ridge };
  Kind kind = Kind::least_squares;
  double lambda_reg = 0.0;

  static RegressorSpec least_squares() { return {Kind::least_squares, 0.0}; }
  static RegressorSpec ridge(double lambda) { return {Kind::ridge, lambda}; }
};

/// One fitted affine map x -> x * weights + offset (offset zero unless the
/// fit used an intercept).
struct AffineMap {
  Matrix weights;               // in x out
  Eigen::RowVectorXd offset;    // 1 x out
};

/// Generalized recursive predictor: T-1 step maps followed by an outcome
/// map, applied in sequence at prediction time.
struct ComposedPredictor {
  std::vector<AffineMap> step_models;  // each dim -> dim
  AffineMap outcome_model;             // dim -> 1
};

struct FitOptions {
  bool fit_intercept = false;
};

/// Direct least squares of the outcomes on the baseline states, ignoring
/// all intermediate time points.
LinearPredictor fit_baseline(const TrajectoryDataset& data, const FitOptions& options = {});

/// Recursive estimator: regress each X_{t+1} on X_t, the outcome on X_T,
/// and compose. Separate transition estimates per step.
ChainFit fit_lupts(const TrajectoryDataset& data, const FitOptions& options = {});

/// Stationary recursive estimator: one transition fit on all adjacent state
/// pairs pooled vertically (m*(T-1) rows), composed as its (T-1)-th power.
ChainFit fit_stat_lupts(const TrajectoryDataset& data, const FitOptions& options = {});

/// Distillation with the recursive estimator as teacher. The blended
/// objective lambda*||Y - X1 theta||^2 + (1-lambda)*||Y_soft - X1 theta||^2
/// is minimized exactly by the convex combination
/// lambda * theta_baseline + (1-lambda) * theta_lupts, which is what this
/// returns; no iterative optimization.
LinearPredictor fit_distill_seq(const TrajectoryDataset& data, double lambda,
                                const FitOptions& options = {});

struct DistillConcatOptions {
  bool include_baseline_block = true;  // teacher sees X_1 alongside X_2..X_T
  FitOptions fit;
};

/// Distillation with a wide teacher: the teacher regresses the outcome on
/// the column-concatenation of the time points, and the student solves the
/// blended objective against the teacher's training-row predictions, i.e.
/// least squares of lambda*Y + (1-lambda)*Y_soft on X_1.
LinearPredictor fit_distill_concat(const TrajectoryDataset& data, double lambda,
                                   const DistillConcatOptions& options = {});

/// Generalized composed estimator: fit each step map on (X_t, X_{t+1}) with
/// step_spec and the outcome map on (X_T, Y) with outcome_spec.
ComposedPredictor fit_composed(const TrajectoryDataset& data, const RegressorSpec& step_spec,
                               const RegressorSpec& outcome_spec,
                               const FitOptions& options = {});

/// Predictions from baseline features (m x dim -> m).
Vector predict(const LinearPredictor& predictor, const Matrix& baseline);
Vector predict(const ComposedPredictor& predictor, const Matrix& baseline);

/// Runs only the step maps, returning the simulated final state.
Matrix simulate_final_state(const ComposedPredictor& predictor, const Matrix& baseline);

/// Applies only the outcome map to (true or simulated) final states.
Vector apply_outcome_model(const ComposedPredictor& predictor, const Matrix& final_state);

/// Collapses a composed predictor with affine maps into the equivalent
/// baseline-only linear predictor.
LinearPredictor collapse_composed(const ComposedPredictor& predictor);

nlohmann::json predictor_to_json(const LinearPredictor& p);
nlohmann::json predictor_to_json(const ChainFit& fit, const std::string& estimator);
LinearPredictor linear_predictor_from_json(const nlohmann::json& j);
ChainFit chain_fit_from_json(const nlohmann::json& j);

}  // namespace lupts
