#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lupts/harness.hpp"
#include "test_helpers.hpp"

using namespace lupts;
using namespace lupts::testing;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.system.dim = 4;
  config.system.horizon = 3;
  config.system.initial_state = {0.0, 2.0};
  config.axis = SweepAxis::n;
  config.sweep_values = {30, 60};
  config.test_size = 50;
  config.replicates = 3;
  config.estimators = {"baseline", "lupts"};
  config.master_seed = 7;
  return config;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_prefix(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("counting contract") {
  ExperimentConfig config = tiny_config();
  config.sweep_values = {25};
  config.replicates = 1;
  config.estimators = {"baseline"};
  const ResultTable table = run_experiment(config);
  CHECK(table.rows.size() == 1);
  CHECK(table.rows[0].estimator == "baseline");
  CHECK(table.rows[0].n == 25);
  CHECK(table.rows[0].error.empty());
}

TEST_CASE("identical configs produce bit-identical output files") {
  const ExperimentConfig config = tiny_config();
  const ResultTable a = run_experiment(config);
  const ResultTable b = run_experiment(config);
  const auto pa = temp_prefix("lupts_det_a");
  const auto pb = temp_prefix("lupts_det_b");
  write_results(a, pa.string());
  write_results(b, pb.string());
  CHECK(slurp(pa.string() + ".rows.csv") == slurp(pb.string() + ".rows.csv"));
  CHECK(slurp(pa.string() + ".agg.csv") == slurp(pb.string() + ".agg.csv"));
}

TEST_CASE("threaded execution merges in canonical order") {
  ExperimentConfig serial = tiny_config();
  serial.threads = 1;
  ExperimentConfig threaded = tiny_config();
  threaded.threads = 3;
  const ResultTable a = run_experiment(serial);
  const ResultTable b = run_experiment(threaded);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].estimator == b.rows[i].estimator);
    CHECK(a.rows[i].seed == b.rows[i].seed);
    CHECK(a.rows[i].relative_mse == b.rows[i].relative_mse);
    CHECK(a.rows[i].r_squared == b.rows[i].r_squared);
  }
}

TEST_CASE("streams never collide across cells") {
  const ResultTable table = run_experiment(tiny_config());
  std::set<std::pair<std::uint64_t, std::string>> seen;
  for (const MetricRecord& rec : table.rows) {
    CHECK(seen.insert({rec.seed, rec.estimator}).second);
  }
}

TEST_CASE("empty table writes a header-only rows file") {
  ResultTable table;
  table.axis = "n";
  table.config = nlohmann::json::object();
  const auto prefix = temp_prefix("lupts_empty");
  write_results(table, prefix.string());
  const std::string contents = slurp(prefix.string() + ".rows.csv");
  CHECK(contents ==
        "estimator,seed,axis_name,axis_value,n,T,d,relative_mse,r_squared,empirical_risk,gap,"
        "error\n");
}

TEST_CASE("single-row aggregates echo the row with zero spread") {
  ExperimentConfig config = tiny_config();
  config.sweep_values = {20};
  config.replicates = 1;
  config.estimators = {"baseline"};
  const ResultTable table = run_experiment(config);
  for (const AggregateCell& agg : table.aggregates) {
    if (agg.metric == "relative_mse") {
      CHECK(agg.mean == table.rows[0].relative_mse);
      CHECK(agg.stddev == 0.0);
      CHECK(agg.stderror == 0.0);
      CHECK(agg.count == 1);
      CHECK(agg.failures == 0);
    }
  }
}

TEST_CASE("rows file re-aggregates to the published aggregates") {
  ExperimentConfig config = tiny_config();
  config.estimators = {"baseline", "lupts", "distill_seq"};
  const ResultTable table = run_experiment(config);
  const auto prefix = temp_prefix("lupts_roundtrip");
  write_results(table, prefix.string());

  const auto [rows, axis_values] = read_rows_csv(prefix.string() + ".rows.csv");
  REQUIRE(rows.size() == table.rows.size());
  const std::vector<AggregateCell> recomputed = aggregate_rows(rows, axis_values);
  REQUIRE(recomputed.size() == table.aggregates.size());
  for (std::size_t i = 0; i < recomputed.size(); ++i) {
    const AggregateCell& p = table.aggregates[i];
    const AggregateCell& q = recomputed[i];
    CHECK(p.estimator == q.estimator);
    CHECK(p.metric == q.metric);
    CHECK(p.count == q.count);
    CHECK(p.failures == q.failures);
    if (p.count > 0) {
      CHECK(std::abs(p.mean - q.mean) <= 1e-12 * std::max(1.0, std::abs(p.mean)));
      CHECK(std::abs(p.stddev - q.stddev) <= 1e-12 * std::max(1.0, std::abs(p.stddev)));
      CHECK(std::abs(p.stderror - q.stderror) <= 1e-12 * std::max(1.0, std::abs(p.stderror)));
    }
  }
}

TEST_CASE("unknown preset error lists the catalogue") {
  try {
    preset("fig9_unobtainium");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == "unknown_preset");
    CHECK(std::string(e.what()).find("fig2a_samples") != std::string::npos);
  }
  for (const std::string& name : preset_names()) {
    CHECK(preset(name).replicates >= 1);
  }
}

TEST_CASE("noise-free sweep value collapses the gap") {
  ExperimentConfig config = preset("fig2c_noise");
  config.system.dim = 5;
  config.system.horizon = 4;
  config.sweep_values = {0.0};
  config.replicates = 4;
  config.train_size = 80;
  config.test_size = 40;
  config.master_seed = 3;
  const ResultTable table = run_experiment(config);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].estimator == "lupts") {
      CHECK(table.rows[i].extra.at("gap") <= 1e-6);
    }
  }
}

TEST_CASE("distillation endpoints coincide with the teachers") {
  ExperimentConfig config = tiny_config();
  config.axis = SweepAxis::lambda;
  config.sweep_values = {0.0, 1.0};
  config.replicates = 2;
  config.estimators = {"baseline", "lupts", "distill_seq"};
  const ResultTable table = run_experiment(config);

  // Per replicate: distill at lambda 0 matches lupts, at lambda 1 matches baseline.
  for (std::size_t i = 0; i < table.rows.size(); i += 3) {
    const MetricRecord& base = table.rows[i];
    const MetricRecord& lupts_row = table.rows[i + 1];
    const MetricRecord& distill = table.rows[i + 2];
    REQUIRE(base.estimator == "baseline");
    REQUIRE(lupts_row.estimator == "lupts");
    REQUIRE(distill.estimator == "distill_seq");
    const double lambda = table.row_axis_values[i];
    const MetricRecord& target = lambda == 0.0 ? lupts_row : base;
    CHECK(distill.relative_mse == doctest::Approx(target.relative_mse).epsilon(1e-9));
    CHECK(distill.empirical_risk == doctest::Approx(target.empirical_risk).epsilon(1e-9));
  }
}

TEST_CASE("config validation aborts before any work") {
  ExperimentConfig config = tiny_config();
  config.estimators = {"baseline", "gradient_boosting"};
  CHECK_THROWS_AS(run_experiment(config), Error);

  config = tiny_config();
  config.sweep_values.clear();
  CHECK_THROWS_AS(run_experiment(config), Error);

  config = tiny_config();
  config.axis = SweepAxis::lambda;
  config.sweep_values = {0.5, 1.5};
  CHECK_THROWS_AS(run_experiment(config), Error);

  config = tiny_config();
  config.replicates = 0;
  CHECK_THROWS_AS(run_experiment(config), Error);
}

TEST_CASE("fixed systems persist across replicates") {
  ExperimentConfig config = tiny_config();
  config.fix_system = true;
  config.sweep_values = {40};
  config.replicates = 3;
  const ResultTable fixed = run_experiment(config);
  config.fix_system = false;
  const ResultTable fresh = run_experiment(config);
  // Same seeds, different generation paths: the records must differ.
  bool any_difference = false;
  for (std::size_t i = 0; i < fixed.rows.size(); ++i) {
    any_difference |= fixed.rows[i].relative_mse != fresh.rows[i].relative_mse;
  }
  CHECK(any_difference);
  // And the fixed run itself is reproducible.
  config.fix_system = true;
  const ResultTable again = run_experiment(config);
  for (std::size_t i = 0; i < fixed.rows.size(); ++i) {
    CHECK(fixed.rows[i].relative_mse == again.rows[i].relative_mse);
  }
}

TEST_CASE("config JSON round trip") {
  ExperimentConfig config = tiny_config();
  config.axis = SweepAxis::delta_ratio;
  config.sweep_values = {0, 0.1, 0.2};
  config.system.stationary = true;
  config.ridge_lambda = 0.5;
  const ExperimentConfig back = config_from_json(config_to_json(config));
  CHECK(axis_name(back.axis) == "delta_ratio");
  CHECK(back.sweep_values == config.sweep_values);
  CHECK(back.system.stationary);
  CHECK(back.system.dim == config.system.dim);
  CHECK(back.ridge_lambda == 0.5);
  CHECK(back.master_seed == config.master_seed);
}

TEST_CASE("ingest protocol end to end") {
  // Synthesize a strongly linear dataset, write it as a CSV fixture and run
  // the file-backed protocol on it.
  RngStream gen(400, 0);
  SystemConfig sys;
  sys.dim = 2;
  sys.horizon = 3;
  sys.kappa = 1.2;
  sys.noise_scales = {0.3};
  sys.outcome_noise = 0.3;
  sys.initial_state = {1.0, 2.0};
  const SystemSpec spec = generate_system(sys, gen);
  RngStream sampler(400, 1);
  const TrajectoryDataset data = sample_trajectories(spec, 240, sampler);

  const auto csv_path = temp_prefix("lupts_ingest_fixture.csv");
  {
    std::ofstream out(csv_path);
    out << "x1_1,x1_2,x2_1,x2_2,x3_1,x3_2,y\n";
    for (Index r = 0; r < data.rows(); ++r) {
      for (int t = 0; t < 3; ++t) {
        out << data.states[static_cast<std::size_t>(t)](r, 0) << ','
            << data.states[static_cast<std::size_t>(t)](r, 1) << ',';
      }
      out << data.outcomes(r) << '\n';
    }
  }

  IngestConfig config;
  config.csv_path = csv_path.string();
  config.schema.horizon = 3;
  config.schema.dim = 2;
  config.train_sizes = {40, 120};
  config.estimators = {"baseline", "lupts", "distill_seq"};
  config.replicates = 4;
  config.master_seed = 5;

  const ResultTable table = run_ingest(config);
  CHECK(table.rows.size() == 2 * 4 * 3);
  for (const MetricRecord& rec : table.rows) {
    CHECK(rec.error.empty());
    CHECK(std::isnan(rec.relative_mse));  // no ground truth for file data
    CHECK(rec.r_squared > 0.3);           // strongly linear fixture
  }

  const ResultTable table2 = run_ingest(config);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    CHECK(table.rows[i].r_squared == table2.rows[i].r_squared);
  }

  std::filesystem::remove(csv_path);
}

TEST_CASE("estimator failures are tagged and excluded from aggregates") {
  // Horizon 2 with a delta violation and relative_mse fine; instead force a
  // failure via constant outcomes in r_squared: use a noiseless system with
  // zero outcome weights so Y is identically zero on the test set.
  ExperimentConfig config = tiny_config();
  config.system.entry_std = 0.0;  // beta = 0 => Y = 0, r_squared degenerate
  config.system.noise_scales = {0.0};
  config.system.outcome_noise = 0.0;
  config.sweep_values = {30};
  config.replicates = 2;
  config.estimators = {"baseline"};
  const ResultTable table = run_experiment(config);
  REQUIRE(table.rows.size() == 2);
  for (const MetricRecord& rec : table.rows) {
    CHECK(rec.error == "degenerate");
  }
  for (const AggregateCell& agg : table.aggregates) {
    CHECK(agg.count == 0);
    CHECK(agg.failures == 2);
  }
}

}  // TEST_SUITE
