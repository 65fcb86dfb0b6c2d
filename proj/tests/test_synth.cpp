#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lupts/regression.hpp"
#include "lupts/synth.hpp"
#include "test_helpers.hpp"

using namespace lupts;
using namespace lupts::testing;

namespace {

SystemConfig small_config(int dim, int horizon) {
  SystemConfig config;
  config.dim = dim;
  config.horizon = horizon;
  config.kappa = 1.3;
  config.initial_state = {0.0, 1.0};
  return config;
}

bool specs_identical(const SystemSpec& a, const SystemSpec& b) {
  if (a.dim != b.dim || a.horizon != b.horizon || a.stationary != b.stationary) return false;
  for (std::size_t i = 0; i < a.transitions.size(); ++i) {
    if (a.transitions[i] != b.transitions[i]) return false;
  }
  return a.outcome_weights == b.outcome_weights && a.raw_violation == b.raw_violation &&
         a.noise_scales == b.noise_scales;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("1-d transition rescales to kappa exactly") {
  RngStream rng(3, 0);
  SystemConfig config = small_config(1, 2);
  config.kappa = 0.7;
  const SystemSpec spec = generate_system(config, rng);
  CHECK(spec.transitions[0](0, 0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(spectral_radius(spec.transitions[0]) == doctest::Approx(0.7));
}

TEST_CASE("benchmark defaults: every transition has spectral radius kappa") {
  RngStream rng(1, 0);
  const SystemConfig config;  // d=25, T=10, kappa=1.5, entry_std=0.2, sigma=1, N(0, 5)
  const SystemSpec spec = generate_system(config, rng);
  REQUIRE(spec.transitions.size() == 9);
  CHECK(spec.dim == 25);
  CHECK(spec.noise_scales == std::vector<double>(9, 1.0));
  CHECK(spec.outcome_noise == 1.0);
  CHECK(spec.initial_state.std == doctest::Approx(std::sqrt(5.0)));
  for (const Matrix& a : spec.transitions) {
    CHECK(std::abs(spectral_radius(a) - 1.5) <= tol::eig * 1.5);
  }
}

TEST_CASE("generation is deterministic per (seed, stream)") {
  RngStream a(123, 5);
  RngStream b(123, 5);
  const SystemConfig config = small_config(6, 4);
  CHECK(specs_identical(generate_system(config, a), generate_system(config, b)));
}

TEST_CASE("stationary systems share one transition") {
  RngStream rng(9, 0);
  SystemConfig config = small_config(4, 5);
  config.stationary = true;
  const SystemSpec spec = generate_system(config, rng);
  REQUIRE(spec.transitions.size() == 4);
  for (const Matrix& a : spec.transitions) {
    CHECK(a == spec.transitions.front());
  }
}

TEST_CASE("generation rejects bad parameters") {
  RngStream rng(4, 0);
  SystemConfig config = small_config(3, 3);
  config.kappa = 0.0;
  CHECK_THROWS_AS(generate_system(config, rng), Error);
  config = small_config(3, 1);
  CHECK_THROWS_AS(generate_system(config, rng), Error);
  config = small_config(3, 3);
  config.noise_scales = {1.0, -1.0};
  CHECK_THROWS_AS(generate_system(config, rng), Error);
}

TEST_CASE("noiseless 1-d rollout") {
  SystemSpec spec;
  spec.dim = 1;
  spec.horizon = 2;
  spec.transitions = {mat({{2}})};
  spec.outcome_weights = vec({3});
  spec.noise_scales = {0.0};
  spec.outcome_noise = 0.0;
  spec.initial_state = {1.0, 0.0};  // every X1 row is exactly 1
  spec.raw_violation = vec({0});

  RngStream rng(0, 0);
  const TrajectoryDataset data = sample_trajectories(spec, 3, rng);
  CHECK(data.states[0](0, 0) == doctest::Approx(1.0));
  CHECK(data.states[1](0, 0) == doctest::Approx(2.0));
  CHECK(data.outcomes(0) == doctest::Approx(6.0));
}

TEST_CASE("zero violation vector leaves outcomes untouched") {
  RngStream gen(8, 0);
  const SystemSpec spec = generate_system(small_config(3, 3), gen);
  const SystemSpec zeroed = scale_markov_violation(spec, 0.0);
  REQUIRE(zeroed.markov_violation.has_value());
  RngStream a(2, 2);
  RngStream b(2, 2);
  const TrajectoryDataset plain = sample_trajectories(spec, 20, a);
  const TrajectoryDataset with_zero = sample_trajectories(zeroed, 20, b);
  CHECK(plain.outcomes == with_zero.outcomes);
  CHECK(plain.states[1] == with_zero.states[1]);
}

TEST_CASE("sampling is deterministic and consumes a fixed draw count") {
  RngStream gen(8, 1);
  const SystemSpec spec = generate_system(small_config(3, 4), gen);
  RngStream a(5, 5);
  RngStream b(5, 5);
  const TrajectoryDataset first = sample_trajectories(spec, 10, a);
  const TrajectoryDataset second = sample_trajectories(spec, 10, b);
  CHECK(first.outcomes == second.outcomes);
  // After consuming a dataset the streams still agree, so the draw count is
  // path-independent.
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("conditional mean of each step matches the transition map") {
  RngStream gen(31, 0);
  const SystemSpec spec = generate_system(small_config(3, 3), gen);
  RngStream rng(31, 1);
  const Index m = 100000;
  const TrajectoryDataset data = sample_trajectories(spec, m, rng);
  const double bound = 3.0 / std::sqrt(static_cast<double>(m));  // sigma_t = 1
  for (int t = 1; t < spec.horizon; ++t) {
    const Matrix residual = data.states[static_cast<std::size_t>(t)] -
                            data.states[static_cast<std::size_t>(t - 1)] *
                                spec.transitions[static_cast<std::size_t>(t - 1)];
    for (Index j = 0; j < spec.dim; ++j) {
      CHECK(std::abs(residual.col(j).mean()) < bound);
    }
  }
}

TEST_CASE("states are Markov: no partial correlation with the grandparent") {
  SystemConfig config = small_config(1, 3);
  RngStream gen(77, 0);
  const SystemSpec spec = generate_system(config, gen);
  RngStream rng(77, 1);
  const Index m = 100000;
  const TrajectoryDataset data = sample_trajectories(spec, m, rng);

  // Residualize X3 and X1 on X2 (with intercept), then correlate.
  auto residualize = [&](const Matrix& target) {
    Matrix design(m, 2);
    design.col(0).setOnes();
    design.col(1) = data.states[1].col(0);
    return solve_least_squares(design, target).residuals;
  };
  const Matrix r3 = residualize(data.states[2]);
  const Matrix r1 = residualize(data.states[0]);
  const double corr =
      (r3.col(0).dot(r1.col(0))) / std::sqrt(r3.col(0).squaredNorm() * r1.col(0).squaredNorm());
  CHECK(std::abs(corr) < 4.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("true theta composes the transitions") {
  SystemSpec spec;
  spec.dim = 2;
  spec.horizon = 3;
  spec.transitions = {Matrix::Identity(2, 2), Matrix::Identity(2, 2)};
  spec.outcome_weights = vec({1.5, -2.0});
  spec.noise_scales = {1.0, 1.0};
  spec.raw_violation = vec({0, 0});
  CHECK((true_theta(spec) - spec.outcome_weights).cwiseAbs().maxCoeff() == 0.0);

  spec.horizon = 2;
  spec.transitions = {mat({{2, 0}, {0, 3}})};
  spec.noise_scales = {1.0};
  spec.outcome_weights = vec({1, 1});
  const Vector theta = true_theta(spec);
  CHECK(theta(0) == doctest::Approx(2.0));
  CHECK(theta(1) == doctest::Approx(3.0));
}

TEST_CASE("stationary theta equals the matrix power route") {
  RngStream gen(5, 3);
  SystemConfig config = small_config(4, 4);
  config.stationary = true;
  const SystemSpec spec = generate_system(config, gen);
  const Vector via_chain = true_theta(spec);
  const Vector via_power = matrix_power(spec.transitions[0], 3) * spec.outcome_weights;
  CHECK((via_chain - via_power).cwiseAbs().maxCoeff() <= tol::fit);
}

TEST_CASE("irreducible risk closed form") {
  SystemSpec spec;
  spec.dim = 2;
  spec.horizon = 2;
  spec.transitions = {mat({{1, 0}, {0, 1}})};
  spec.outcome_weights = vec({3, 4});  // norm^2 = 25
  spec.noise_scales = {0.5};
  spec.outcome_noise = 2.0;
  spec.raw_violation = vec({0, 0});
  // T=2: sigma_2^2 |beta|^2 + sigma_Y^2 = 0.25*25 + 4
  CHECK(irreducible_risk(spec) == doctest::Approx(10.25));

  spec.noise_scales = {0.0};
  spec.outcome_noise = 0.0;
  CHECK(irreducible_risk(spec) == 0.0);

  spec.markov_violation = vec({0, 0});
  CHECK_THROWS_AS(irreducible_risk(spec), Error);
}

TEST_CASE("irreducible risk matches a Monte Carlo variance estimate") {
  for (std::uint64_t trial = 0; trial < 2; ++trial) {
    RngStream gen(101 + trial, 0);
    SystemConfig config = small_config(3, 4);
    config.noise_scales = {0.8};
    config.outcome_noise = 0.7;
    const SystemSpec spec = generate_system(config, gen);
    const Vector theta = true_theta(spec);
    const double closed_form = irreducible_risk(spec);

    RngStream rng(101 + trial, 1);
    double sum = 0.0;
    double sumsq = 0.0;
    const Index chunk = 50000;
    const int chunks = 4;
    for (int c = 0; c < chunks; ++c) {
      const TrajectoryDataset data = sample_trajectories(spec, chunk, rng);
      const Vector eps = data.outcomes - data.states.front() * theta;
      sum += eps.sum();
      sumsq += eps.squaredNorm();
    }
    const double n = static_cast<double>(chunk * chunks);
    const double mc = sumsq / n - (sum / n) * (sum / n);
    CHECK(std::abs(mc - closed_form) <= 0.03 * closed_form);
  }
}

TEST_CASE("conditional outcome mean is linear in the baseline state") {
  // d = 1: bin X1 into deciles and compare binned means of Y to theta * x.
  RngStream gen(55, 0);
  SystemConfig config = small_config(1, 3);
  config.initial_state = {0.0, std::sqrt(5.0)};
  const SystemSpec spec = generate_system(config, gen);
  const double theta = true_theta(spec)(0);

  RngStream rng(55, 1);
  const Index m = 100000;
  const TrajectoryDataset data = sample_trajectories(spec, m, rng);
  std::vector<double> x(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    x[static_cast<std::size_t>(i)] = data.states[0](i, 0);
  }
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return x[static_cast<std::size_t>(a)] < x[static_cast<std::size_t>(b)];
  });
  const Index per_bin = m / 10;
  for (int bin = 0; bin < 10; ++bin) {
    double x_mean = 0.0;
    double y_mean = 0.0;
    double y_sq = 0.0;
    for (Index k = bin * per_bin; k < (bin + 1) * per_bin; ++k) {
      const Index i = order[static_cast<std::size_t>(k)];
      x_mean += data.states[0](i, 0);
      y_mean += data.outcomes(i);
      y_sq += data.outcomes(i) * data.outcomes(i);
    }
    x_mean /= static_cast<double>(per_bin);
    y_mean /= static_cast<double>(per_bin);
    const double y_var = y_sq / static_cast<double>(per_bin) - y_mean * y_mean;
    const double se = std::sqrt(y_var / static_cast<double>(per_bin));
    CHECK(std::abs(y_mean - theta * x_mean) <= 3.0 * se);
  }
}

TEST_CASE("violation scaling") {
  SystemSpec spec;
  spec.dim = 2;
  spec.horizon = 2;
  spec.transitions = {Matrix::Identity(2, 2)};
  spec.outcome_weights = vec({6, 8});  // norm 10
  spec.noise_scales = {1.0};
  spec.raw_violation = vec({3, 4});  // norm 5

  const SystemSpec zero = scale_markov_violation(spec, 0.0);
  CHECK(zero.markov_violation->norm() == 0.0);

  const SystemSpec unit = scale_markov_violation(spec, 1.0);
  CHECK(unit.markov_violation->norm() ==
        doctest::Approx(spec.outcome_weights.norm()).epsilon(1e-12));

  const SystemSpec half = scale_markov_violation(spec, 0.5);
  CHECK((*half.markov_violation - vec({3, 4})).cwiseAbs().maxCoeff() < 1e-12);

  spec.raw_violation = vec({0, 0});
  CHECK_THROWS_AS(scale_markov_violation(spec, 0.5), Error);
  CHECK_THROWS_AS(scale_markov_violation(spec, -1.0), Error);
}

TEST_CASE("system JSON round trip is exact") {
  RngStream gen(202, 0);
  SystemConfig config = small_config(3, 4);
  config.stationary = true;
  SystemSpec spec = generate_system(config, gen);
  spec = scale_markov_violation(spec, 0.25);

  const SystemSpec back = system_from_json(system_to_json(spec));
  CHECK(specs_identical(spec, back));
  REQUIRE(back.markov_violation.has_value());
  CHECK(*back.markov_violation == *spec.markov_violation);
  CHECK(back.outcome_noise == spec.outcome_noise);
  CHECK(back.initial_state.std == spec.initial_state.std);
}

}  // TEST_SUITE
