#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lupts/rng.hpp"
#include "lupts/types.hpp"

namespace lupts {

/// Per-coordinate i.i.d. Normal(mean, std^2) baseline-state distribution.
struct InitialState {
  double mean = 0.0;
  double std = 1.0;
};

/// Ground-truth Gaussian-linear dynamical system over a fixed horizon.
///
/// States evolve as X_t = X_{t-1} * A_{t-1} + eps_t (rows are series,
/// eps_t isotropic with scale noise_scales[t-2]) and the outcome is
/// Y = X_T * beta + eps_Y, plus X_1 * delta when a Markov violation is
/// active. raw_violation is a frozen draw used only as the direction for
/// scale_markov_violation, so a sweep over violation strengths varies a
/// single scalar.
struct SystemSpec {
  int dim = 1;
  int horizon = 2;                       // T
  std::vector<Matrix> transitions;       // T-1 matrices, dim x dim
  Vector outcome_weights;                // beta, dim
  std::vector<double> noise_scales;      // sigma_2 .. sigma_T
  double outcome_noise = 0.0;            // sigma_Y
  InitialState initial_state;
  std::optional<Vector> markov_violation;  // active delta, dim
  Vector raw_violation;                    // frozen raw delta draw, dim
  bool stationary = false;
};

/// Knobs for generate_system. Defaults give the standard benchmark system:
/// unit diagonal plus N(0, 0.2^2) off-diagonal transitions rescaled to
/// spectral radius 1.5, unit noise, baseline states N(0, 5).
struct SystemConfig {
  int dim = 25;
  int horizon = 10;
  double kappa = 1.5;
  double entry_std = 0.2;
  std::vector<double> noise_scales{1.0};  // broadcast when size 1
  double outcome_noise = 1.0;
  InitialState initial_state{0.0, 2.23606797749978969};  // sqrt(5)
  bool stationary = false;
};

/// Sampled dataset: T state matrices of shape m x dim plus m outcomes.
struct TrajectoryDataset {
  std::vector<Matrix> states;
  Vector outcomes;

  Index rows() const { return states.empty() ? 0 : states.front().rows(); }
  Index dim() const { return states.empty() ? 0 : states.front().cols(); }
  int horizon() const { return static_cast<int>(states.size()); }
};

/// Draws a system: each transition gets i.i.d. Normal(0, entry_std^2)
/// entries, diagonal overwritten with 1, then the whole matrix scaled by
/// kappa / rho(A) so the spectral radius is exactly kappa. (Scaling the
/// eigenvalue matrix of the spectral decomposition by kappa / rho(A) and
/// reassembling is the same linear map, without the complex arithmetic.)
/// beta and the frozen raw violation direction are i.i.d.
/// Normal(0, entry_std^2). A stationary system draws one transition and
/// shares it across all steps.
SystemSpec generate_system(const SystemConfig& config, RngStream& rng);

/// Rolls out m independent series. Consumes exactly m*dim*T + m normal
/// draws (row-major per matrix) regardless of parameter values, so streams
/// stay aligned across parameter sweeps.
TrajectoryDataset sample_trajectories(const SystemSpec& spec, Index m, RngStream& rng);

/// theta = A_1 * A_2 * ... * A_{T-1} * beta: the coefficient of the exact
/// linear map from baseline state to expected outcome.
Vector true_theta(const SystemSpec& spec);

/// Variance of the effective outcome noise given the baseline state:
///   sum_{t=2}^{T-1} sigma_t^2 ||A_t...A_{T-1} beta||^2
///   + sigma_T^2 ||beta||^2 + sigma_Y^2.
/// Only defined for the well-specified case (no active Markov violation).
double irreducible_risk(const SystemSpec& spec);

/// Returns a copy whose active violation delta is the frozen raw draw
/// rescaled so that ||delta|| = ratio * ||beta||; ratio 0 gives the zero
/// vector (still active).
SystemSpec scale_markov_violation(const SystemSpec& spec, double ratio);

/// JSON archive of the ground truth (matrices as nested row-major arrays).
nlohmann::json system_to_json(const SystemSpec& spec);
SystemSpec system_from_json(const nlohmann::json& j);

}  // namespace lupts
