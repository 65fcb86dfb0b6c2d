#include "lupts/synth.hpp"

#include <cmath>
#include <string>

#include "lupts/regression.hpp"

namespace lupts {

namespace {

std::vector<double> resolve_noise_scales(const SystemConfig& config) {
  const std::size_t steps = static_cast<std::size_t>(config.horizon - 1);
  std::vector<double> scales = config.noise_scales;
  if (scales.size() == 1) {
    scales.assign(steps, scales.front());
  }
  if (scales.size() != steps) {
    throw Error("invalid_argument",
                "expected 1 or " + std::to_string(steps) + " noise scales, got " +
                    std::to_string(scales.size()));
  }
  for (double s : scales) {
    if (!std::isfinite(s) || s < 0.0) {
      throw Error("invalid_argument", "noise scales must be finite and >= 0");
    }
  }
  return scales;
}

Matrix draw_transition(int dim, double kappa, double entry_std, RngStream& rng) {
  Matrix a = entry_std * rng.normal_matrix(dim, dim);
  a.diagonal().setOnes();
  const double rho = spectral_radius(a);
  if (rho <= 0.0) {
    throw Error("degenerate", "drawn transition has zero spectral radius, cannot rescale");
  }
  return (kappa / rho) * a;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) {
    rows[static_cast<std::size_t>(r)].assign(m.row(r).begin(), m.row(r).end());
  }
  return rows;
}

Matrix matrix_from_rows(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw Error("parse_error", what + " must be a non-empty nested array");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) {
      throw Error("parse_error", what + " has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) {
    throw Error("parse_error", what + " must be an array");
  }
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace

SystemSpec generate_system(const SystemConfig& config, RngStream& rng) {
  if (config.dim < 1) {
    throw Error("invalid_argument", "system dimension must be >= 1");
  }
  if (config.horizon < 2) {
    throw Error("invalid_argument", "horizon must be >= 2");
  }
  if (!(config.kappa > 0.0) || !std::isfinite(config.kappa)) {
    throw Error("invalid_argument", "kappa must be a positive real");
  }
  if (!std::isfinite(config.entry_std) || config.entry_std < 0.0) {
    throw Error("invalid_argument", "entry_std must be finite and >= 0");
  }
  if (!std::isfinite(config.outcome_noise) || config.outcome_noise < 0.0) {
    throw Error("invalid_argument", "outcome noise must be finite and >= 0");
  }
  if (!std::isfinite(config.initial_state.std) || config.initial_state.std < 0.0 ||
      !std::isfinite(config.initial_state.mean)) {
    throw Error("invalid_argument", "initial state parameters must be finite, std >= 0");
  }

  SystemSpec spec;
  spec.dim = config.dim;
  spec.horizon = config.horizon;
  spec.noise_scales = resolve_noise_scales(config);
  spec.outcome_noise = config.outcome_noise;
  spec.initial_state = config.initial_state;
  spec.stationary = config.stationary;

  const int steps = config.horizon - 1;
  if (config.stationary) {
    const Matrix shared = draw_transition(config.dim, config.kappa, config.entry_std, rng);
    spec.transitions.assign(static_cast<std::size_t>(steps), shared);
  } else {
    spec.transitions.reserve(static_cast<std::size_t>(steps));
    for (int t = 0; t < steps; ++t) {
      spec.transitions.push_back(draw_transition(config.dim, config.kappa, config.entry_std, rng));
    }
  }
  spec.outcome_weights = config.entry_std * rng.normal_vector(config.dim);
  spec.raw_violation = config.entry_std * rng.normal_vector(config.dim);
  return spec;
}

TrajectoryDataset sample_trajectories(const SystemSpec& spec, Index m, RngStream& rng) {
  if (m < 1) {
    throw Error("invalid_argument", "need at least one trajectory");
  }
  TrajectoryDataset data;
  data.states.reserve(static_cast<std::size_t>(spec.horizon));

  Matrix state = spec.initial_state.std * rng.normal_matrix(m, spec.dim);
  state.array() += spec.initial_state.mean;
  data.states.push_back(state);
  for (int t = 1; t < spec.horizon; ++t) {
    // The noise matrix is drawn even at scale 0 so the stream advances by a
    // fixed amount per trajectory regardless of parameters.
    const Matrix noise = rng.normal_matrix(m, spec.dim);
    state = state * spec.transitions[static_cast<std::size_t>(t - 1)] +
            spec.noise_scales[static_cast<std::size_t>(t - 1)] * noise;
    data.states.push_back(state);
  }

  data.outcomes = data.states.back() * spec.outcome_weights +
                  spec.outcome_noise * rng.normal_vector(m);
  if (spec.markov_violation) {
    data.outcomes += data.states.front() * (*spec.markov_violation);
  }

  for (const Matrix& s : data.states) {
    require_finite(s, "sampled states");
  }
  require_finite(data.outcomes, "sampled outcomes");
  return data;
}

Vector true_theta(const SystemSpec& spec) {
  return matrix_chain_product(spec.transitions) * spec.outcome_weights;
}

double irreducible_risk(const SystemSpec& spec) {
  if (spec.markov_violation) {
    throw Error("invalid_argument",
                "irreducible risk is defined for the well-specified case only "
                "(active Markov violation present)");
  }
  double risk = spec.outcome_noise * spec.outcome_noise;
  Vector w = spec.outcome_weights;
  for (int t = spec.horizon; t >= 2; --t) {
    const double sigma = spec.noise_scales[static_cast<std::size_t>(t - 2)];
    risk += sigma * sigma * w.squaredNorm();
    if (t > 2) {
      w = spec.transitions[static_cast<std::size_t>(t - 2)] * w;
    }
  }
  return risk;
}

SystemSpec scale_markov_violation(const SystemSpec& spec, double ratio) {
  if (!std::isfinite(ratio) || ratio < 0.0) {
    throw Error("invalid_argument", "violation ratio must be finite and >= 0");
  }
  SystemSpec scaled = spec;
  if (ratio == 0.0) {
    scaled.markov_violation = Vector::Zero(spec.dim);
    return scaled;
  }
  const double raw_norm = spec.raw_violation.norm();
  if (raw_norm == 0.0) {
    throw Error("degenerate", "raw violation draw is the zero vector, cannot scale to a ratio > 0");
  }
  const double target = ratio * spec.outcome_weights.norm();
  scaled.markov_violation = (target / raw_norm) * spec.raw_violation;
  return scaled;
}

nlohmann::json system_to_json(const SystemSpec& spec) {
  nlohmann::json j;
  j["dim"] = spec.dim;
  j["horizon"] = spec.horizon;
  j["transitions"] = nlohmann::json::array();
  for (const Matrix& a : spec.transitions) {
    j["transitions"].push_back(matrix_to_rows(a));
  }
  j["outcome_weights"] = std::vector<double>(spec.outcome_weights.begin(),
                                             spec.outcome_weights.end());
  j["noise_scales"] = spec.noise_scales;
  j["outcome_noise"] = spec.outcome_noise;
  j["initial_state"] = {{"mean", spec.initial_state.mean}, {"std", spec.initial_state.std}};
  if (spec.markov_violation) {
    j["markov_violation"] =
        std::vector<double>(spec.markov_violation->begin(), spec.markov_violation->end());
  } else {
    j["markov_violation"] = nullptr;
  }
  j["raw_violation"] =
      std::vector<double>(spec.raw_violation.begin(), spec.raw_violation.end());
  j["stationary"] = spec.stationary;
  return j;
}

SystemSpec system_from_json(const nlohmann::json& j) {
  SystemSpec spec;
  try {
    spec.dim = j.at("dim").get<int>();
    spec.horizon = j.at("horizon").get<int>();
    for (const auto& a : j.at("transitions")) {
      spec.transitions.push_back(matrix_from_rows(a, "transition"));
    }
    spec.outcome_weights = vector_from_json(j.at("outcome_weights"), "outcome_weights");
    spec.noise_scales = j.at("noise_scales").get<std::vector<double>>();
    spec.outcome_noise = j.at("outcome_noise").get<double>();
    spec.initial_state.mean = j.at("initial_state").at("mean").get<double>();
    spec.initial_state.std = j.at("initial_state").at("std").get<double>();
    if (j.contains("markov_violation") && !j.at("markov_violation").is_null()) {
      spec.markov_violation = vector_from_json(j.at("markov_violation"), "markov_violation");
    }
    if (j.contains("raw_violation")) {
      spec.raw_violation = vector_from_json(j.at("raw_violation"), "raw_violation");
    } else {
      spec.raw_violation = Vector::Zero(spec.dim);
    }
    spec.stationary = j.at("stationary").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("invalid system JSON: ") + e.what());
  }
  if (spec.transitions.size() != static_cast<std::size_t>(spec.horizon - 1)) {
    throw Error("parse_error", "system JSON transition count does not match horizon");
  }
  return spec;
}

}  // namespace lupts
