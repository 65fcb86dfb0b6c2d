#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lupts/dataio.hpp"
#include "lupts/metrics.hpp"
#include "lupts/synth.hpp"

namespace lupts {

enum class SweepAxis { n, T, sigma, delta_ratio, lambda };

std::string axis_name(SweepAxis axis);
SweepAxis axis_from_name(const std::string& name);

/// Config for one synthetic experiment: a system family, one sweep axis
/// with its value list, and the replication/evaluation setup. Everything
/// downstream is a pure function of this struct (master_seed included).
struct ExperimentConfig {
  SystemConfig system;
  SweepAxis axis = SweepAxis::n;
  std::vector<double> sweep_values{1000};
  Index train_size = 1000;  // n when the axis is not n
  Index test_size = 1000;
  int replicates = 200;  // N
  std::vector<std::string> estimators{"baseline", "lupts"};
  std::uint64_t master_seed = 0;
  std::string output_path;
  bool fix_system = false;      // one system per sweep value instead of per replicate
  double delta_ratio = 0.0;     // fixed violation strength when the axis is not delta_ratio
  double lambda = 0.5;          // fixed distillation weight when not swept/selected
  bool select_lambda = true;    // validation-split selection over {0.25, 0.5, 0.75}
  double ridge_lambda = 0.0;    // regularization for the "composed" estimator's maps
  int threads = 1;
};

/// Mean/std/standard-error aggregate for one (axis value, estimator,
/// metric) cell, over the replicates whose value was finite.
struct AggregateCell {
  double axis_value = 0.0;
  std::string estimator;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  double stderror = 0.0;
  int count = 0;
  int failures = 0;  // replicates excluded (fit error or non-finite metric)
};

struct ResultTable {
  std::string axis;                     // axis column name in the CSV outputs
  std::vector<MetricRecord> rows;       // canonical (axis value, replicate, estimator) order
  std::vector<double> row_axis_values;  // axis value per row
  std::vector<AggregateCell> aggregates;
  nlohmann::json config;  // full resolved config echo
};

/// Known estimator labels: baseline, lupts, stat_lupts, distill_seq,
/// distill_concat, composed.
const std::vector<std::string>& known_estimators();

/// Runs the experiment: for every (sweep value s, replicate r) a dedicated
/// stream (s << 32 | r) generates the system, training and test data; every
/// listed estimator is fitted and scored. Per-replicate estimator failures
/// are recorded with an error tag and excluded from aggregates. Results are
/// merged in canonical order, so serial and threaded runs are identical.
ResultTable run_experiment(const ExperimentConfig& config);

/// Canonical configs for the synthetic benchmark suite. Names:
/// fig2a_samples, fig2b_length, fig2c_noise, fig2d_markov, fig6_stationary,
/// distill_sandwich, riskbound_check.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// Writes <path>.rows.csv, <path>.agg.csv and <path>.config.json.
void write_results(const ResultTable& table, const std::string& path);

/// Recomputes aggregates from rows (the rows -> agg recomputability
/// contract; also used after parsing a rows file back in).
std::vector<AggregateCell> aggregate_rows(const std::vector<MetricRecord>& rows,
                                          const std::vector<double>& row_axis_values);

/// Parses a rows CSV written by write_results back into records (first) and
/// per-row axis values (second).
std::pair<std::vector<MetricRecord>, std::vector<double>> read_rows_csv(const std::string& path);

nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const nlohmann::json& j);

/// File-backed evaluation protocol for external datasets: one train/test
/// split, then per (training size, replicate) subsample -> standardize with
/// training statistics -> fit -> score on the shared held-out set.
struct IngestConfig {
  std::string csv_path;
  CsvSchema schema;
  std::vector<Index> train_sizes;
  std::vector<std::string> estimators{"baseline", "lupts"};
  int replicates = 20;
  std::uint64_t master_seed = 0;
  double test_fraction = 0.2;
  std::string output_path = "ingest";
  double lambda = 0.5;
  bool select_lambda = true;
};

ResultTable run_ingest(const IngestConfig& config);

}  // namespace lupts
