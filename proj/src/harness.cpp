#include "lupts/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "lupts/estimators.hpp"

namespace lupts {

namespace {

constexpr std::uint64_t kFixedSystemReplicate = 0xFFFFFFFFULL;

std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string joined(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += items[i];
    if (i + 1 < items.size()) {
      out += ", ";
    }
  }
  return out;
}

TrajectoryDataset take_dataset_rows(const TrajectoryDataset& data,
                                    const std::vector<Index>& indices) {
  TrajectoryDataset out;
  out.states.reserve(data.states.size());
  for (const Matrix& s : data.states) {
    Matrix sub(static_cast<Index>(indices.size()), s.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      sub.row(static_cast<Index>(i)) = s.row(indices[i]);
    }
    out.states.push_back(std::move(sub));
  }
  out.outcomes.resize(static_cast<Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.outcomes(static_cast<Index>(i)) = data.outcomes(indices[i]);
  }
  return out;
}

struct FittedEstimator {
  std::optional<LinearPredictor> linear;
  std::optional<ComposedPredictor> composed;
  std::optional<double> lambda;

  LinearPredictor equivalent_linear() const {
    return linear ? *linear : collapse_composed(*composed);
  }
  Vector predictions(const Matrix& baseline) const {
    return linear ? predict(*linear, baseline) : predict(*composed, baseline);
  }
};

struct EstimatorContext {
  double lambda = 0.5;
  bool lambda_is_fixed = false;  // swept or explicitly pinned; skip selection
  bool select_lambda = true;
  double ridge_lambda = 0.0;
};

const std::vector<double>& lambda_grid() {
  static const std::vector<double> grid{0.25, 0.5, 0.75};
  return grid;
}

// Validation-split selection over the lambda grid: fit each candidate on
// 80% of the training rows, score on the rest, refit the winner on all rows.
double select_distill_lambda(const std::string& label, const TrajectoryDataset& train,
                             RngStream& rng) {
  const Index m = train.rows();
  if (m < 5) {
    return 0.5;
  }
  const std::vector<Index> order = rng.shuffled_indices(m);
  const Index fit_count = std::max<Index>(1, (m * 4) / 5);
  const std::vector<Index> fit_idx(order.begin(), order.begin() + fit_count);
  const std::vector<Index> val_idx(order.begin() + fit_count, order.end());
  const TrajectoryDataset fit_part = take_dataset_rows(train, fit_idx);
  const TrajectoryDataset val_part = take_dataset_rows(train, val_idx);

  double best_lambda = lambda_grid().front();
  double best_risk = std::numeric_limits<double>::infinity();
  for (double candidate : lambda_grid()) {
    const LinearPredictor p = label == "distill_concat"
                                  ? fit_distill_concat(fit_part, candidate)
                                  : fit_distill_seq(fit_part, candidate);
    const double risk = empirical_risk(p, val_part);
    if (risk < best_risk) {
      best_risk = risk;
      best_lambda = candidate;
    }
  }
  return best_lambda;
}

FittedEstimator fit_estimator(const std::string& label, const TrajectoryDataset& train,
                              const EstimatorContext& ctx, RngStream& rng) {
  FittedEstimator fitted;
  if (label == "baseline") {
    fitted.linear = fit_baseline(train);
  } else if (label == "lupts") {
    fitted.linear = fit_lupts(train).composed;
  } else if (label == "stat_lupts") {
    fitted.linear = fit_stat_lupts(train).composed;
  } else if (label == "distill_seq" || label == "distill_concat") {
    double lambda = ctx.lambda;
    if (!ctx.lambda_is_fixed && ctx.select_lambda) {
      lambda = select_distill_lambda(label, train, rng);
    }
    fitted.lambda = lambda;
    fitted.linear = label == "distill_seq" ? fit_distill_seq(train, lambda)
                                           : fit_distill_concat(train, lambda);
  } else if (label == "composed") {
    const RegressorSpec spec = ctx.ridge_lambda > 0.0 ? RegressorSpec::ridge(ctx.ridge_lambda)
                                                      : RegressorSpec::least_squares();
    fitted.composed = fit_composed(train, spec, spec);
  } else {
    throw Error("unknown_estimator",
                "unknown estimator '" + label + "'; known: " + joined(known_estimators()));
  }
  return fitted;
}

void score_estimator(const std::string& label, const FittedEstimator& fitted,
                     const LinearPredictor& baseline_fit, const Vector* theta_truth,
                     const TrajectoryDataset& test, MetricRecord& rec) {
  const LinearPredictor equivalent = fitted.equivalent_linear();
  if (theta_truth != nullptr) {
    rec.relative_mse = relative_parameter_mse(equivalent.theta, *theta_truth);
  }
  const Vector predictions = fitted.predictions(test.states.front());
  rec.r_squared = r_squared(predictions, test.outcomes);
  rec.empirical_risk =
      (predictions - test.outcomes).squaredNorm() / static_cast<double>(test.rows());
  rec.extra["gap"] = mse_gap(baseline_fit, equivalent);
  if (fitted.lambda) {
    rec.extra["lambda"] = *fitted.lambda;
  }
  if (label == "composed") {
    const RiskExpansionTerms terms = risk_expansion_terms(*fitted.composed, test);
    rec.extra["r_total"] = terms.total;
    rec.extra["r_dynamics"] = terms.dynamics;
    rec.extra["r_outcome"] = terms.outcome;
  }
}

void validate_config(const ExperimentConfig& config) {
  if (config.sweep_values.empty()) {
    throw Error("invalid_argument", "sweep value list is empty");
  }
  if (config.replicates < 1 || static_cast<std::uint64_t>(config.replicates) >= kFixedSystemReplicate) {
    throw Error("invalid_argument", "replicates must be in [1, 2^32 - 2]");
  }
  if (config.test_size < 1) {
    throw Error("invalid_argument", "test size must be >= 1");
  }
  if (config.train_size < 1) {
    throw Error("invalid_argument", "training size must be >= 1");
  }
  if (config.estimators.empty()) {
    throw Error("invalid_argument", "estimator list is empty");
  }
  for (const std::string& label : config.estimators) {
    if (std::find(known_estimators().begin(), known_estimators().end(), label) ==
        known_estimators().end()) {
      throw Error("unknown_estimator",
                  "unknown estimator '" + label + "'; known: " + joined(known_estimators()));
    }
  }
  for (double v : config.sweep_values) {
    if (!std::isfinite(v)) {
      throw Error("invalid_argument", "sweep values must be finite");
    }
    switch (config.axis) {
      case SweepAxis::n:
        if (v < 1) throw Error("invalid_argument", "swept training sizes must be >= 1");
        break;
      case SweepAxis::T:
        if (v < 2) throw Error("invalid_argument", "swept horizons must be >= 2");
        break;
      case SweepAxis::sigma:
        if (v < 0) throw Error("invalid_argument", "swept noise scales must be >= 0");
        break;
      case SweepAxis::delta_ratio:
        if (v < 0) throw Error("invalid_argument", "swept violation ratios must be >= 0");
        break;
      case SweepAxis::lambda:
        if (v < 0 || v > 1) throw Error("invalid_argument", "swept lambdas must lie in [0, 1]");
        break;
    }
  }
  if (config.threads < 0) {
    throw Error("invalid_argument", "threads must be >= 0");
  }
}

struct CellSetup {
  SystemConfig system;
  Index train_size;
  double delta_ratio;
  bool violated;
  EstimatorContext context;
};

CellSetup resolve_cell(const ExperimentConfig& config, double value) {
  CellSetup cell;
  cell.system = config.system;
  cell.train_size = config.train_size;
  cell.delta_ratio = config.delta_ratio;
  cell.context.lambda = config.lambda;
  cell.context.select_lambda = config.select_lambda;
  cell.context.ridge_lambda = config.ridge_lambda;
  switch (config.axis) {
    case SweepAxis::n:
      cell.train_size = static_cast<Index>(std::llround(value));
      break;
    case SweepAxis::T:
      cell.system.horizon = static_cast<int>(std::llround(value));
      break;
    case SweepAxis::sigma:
      cell.system.noise_scales = {value};
      break;
    case SweepAxis::delta_ratio:
      cell.delta_ratio = value;
      break;
    case SweepAxis::lambda:
      cell.context.lambda = value;
      cell.context.lambda_is_fixed = true;
      break;
  }
  cell.violated = config.axis == SweepAxis::delta_ratio || config.delta_ratio != 0.0;
  return cell;
}

std::vector<MetricRecord> run_cell(const ExperimentConfig& config, int sweep_index, int replicate,
                                   const SystemSpec* fixed_system) {
  const double value = config.sweep_values[static_cast<std::size_t>(sweep_index)];
  const CellSetup cell = resolve_cell(config, value);
  const std::uint64_t stream =
      (static_cast<std::uint64_t>(sweep_index) << 32) | static_cast<std::uint64_t>(replicate);
  RngStream rng(config.master_seed, stream);

  std::vector<MetricRecord> records;
  records.reserve(config.estimators.size());
  auto blank_record = [&](const std::string& label) {
    MetricRecord rec;
    rec.estimator = label;
    rec.seed = stream;
    rec.n = cell.train_size;
    rec.horizon = cell.system.horizon;
    rec.dim = cell.system.dim;
    return rec;
  };

  try {
    SystemSpec spec = fixed_system ? *fixed_system : generate_system(cell.system, rng);
    if (cell.violated) {
      spec = scale_markov_violation(spec, cell.delta_ratio);
    }
    const TrajectoryDataset train = sample_trajectories(spec, cell.train_size, rng);
    const TrajectoryDataset test = sample_trajectories(spec, config.test_size, rng);
    const Vector theta_truth = true_theta(spec);
    const LinearPredictor baseline_fit = fit_baseline(train);

    for (const std::string& label : config.estimators) {
      MetricRecord rec = blank_record(label);
      try {
        const FittedEstimator fitted = fit_estimator(label, train, cell.context, rng);
        score_estimator(label, fitted, baseline_fit, &theta_truth, test, rec);
      } catch (const Error& e) {
        rec.error = e.code();
      }
      records.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    // System generation or sampling failed: tag every estimator's record.
    for (const std::string& label : config.estimators) {
      MetricRecord rec = blank_record(label);
      rec.error = e.code();
      records.push_back(std::move(rec));
    }
  }
  return records;
}

void run_cells(const ExperimentConfig& config, const std::vector<SystemSpec>& fixed_systems,
               std::vector<std::vector<MetricRecord>>& cells) {
  const int sweeps = static_cast<int>(config.sweep_values.size());
  const int total = sweeps * config.replicates;
  auto run_index = [&](int index) {
    const int sweep_index = index / config.replicates;
    const int replicate = index % config.replicates;
    const SystemSpec* fixed =
        config.fix_system ? &fixed_systems[static_cast<std::size_t>(sweep_index)] : nullptr;
    cells[static_cast<std::size_t>(index)] = run_cell(config, sweep_index, replicate, fixed);
  };

  int threads = config.threads == 0
                    ? static_cast<int>(std::thread::hardware_concurrency())
                    : config.threads;
  threads = std::clamp(threads, 1, total);
  if (threads == 1) {
    for (int index = 0; index < total; ++index) {
      run_index(index);
    }
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (int index = next.fetch_add(1); index < total; index = next.fetch_add(1)) {
        run_index(index);
      }
    });
  }
  for (std::thread& t : pool) {
    t.join();
  }
}

const std::vector<std::string>& base_metrics() {
  static const std::vector<std::string> metrics{"relative_mse", "r_squared", "empirical_risk",
                                                "gap"};
  return metrics;
}

double metric_value(const MetricRecord& rec, const std::string& metric) {
  if (!rec.error.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (metric == "relative_mse") return rec.relative_mse;
  if (metric == "r_squared") return rec.r_squared;
  if (metric == "empirical_risk") return rec.empirical_risk;
  const auto it = rec.extra.find(metric);
  return it == rec.extra.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

}  // namespace

std::string axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::n: return "n";
    case SweepAxis::T: return "T";
    case SweepAxis::sigma: return "sigma";
    case SweepAxis::delta_ratio: return "delta_ratio";
    case SweepAxis::lambda: return "lambda";
  }
  throw Error("invalid_argument", "unknown sweep axis");
}

SweepAxis axis_from_name(const std::string& name) {
  if (name == "n") return SweepAxis::n;
  if (name == "T") return SweepAxis::T;
  if (name == "sigma") return SweepAxis::sigma;
  if (name == "delta_ratio") return SweepAxis::delta_ratio;
  if (name == "lambda") return SweepAxis::lambda;
  throw Error("invalid_argument",
              "unknown sweep axis '" + name + "'; expected one of n, T, sigma, delta_ratio, lambda");
}

const std::vector<std::string>& known_estimators() {
  static const std::vector<std::string> labels{"baseline",    "lupts",          "stat_lupts",
                                               "distill_seq", "distill_concat", "composed"};
  return labels;
}

ResultTable run_experiment(const ExperimentConfig& config) {
  validate_config(config);

  std::vector<SystemSpec> fixed_systems;
  if (config.fix_system) {
    fixed_systems.reserve(config.sweep_values.size());
    for (std::size_t s = 0; s < config.sweep_values.size(); ++s) {
      const CellSetup cell = resolve_cell(config, config.sweep_values[s]);
      RngStream rng(config.master_seed,
                    (static_cast<std::uint64_t>(s) << 32) | kFixedSystemReplicate);
      fixed_systems.push_back(generate_system(cell.system, rng));
    }
  }

  const int sweeps = static_cast<int>(config.sweep_values.size());
  std::vector<std::vector<MetricRecord>> cells(
      static_cast<std::size_t>(sweeps * config.replicates));
  run_cells(config, fixed_systems, cells);

  ResultTable table;
  table.axis = axis_name(config.axis);
  table.config = config_to_json(config);
  for (int s = 0; s < sweeps; ++s) {
    for (int r = 0; r < config.replicates; ++r) {
      auto& cell = cells[static_cast<std::size_t>(s * config.replicates + r)];
      for (MetricRecord& rec : cell) {
        table.rows.push_back(std::move(rec));
        table.row_axis_values.push_back(config.sweep_values[static_cast<std::size_t>(s)]);
      }
    }
  }
  table.aggregates = aggregate_rows(table.rows, table.row_axis_values);
  return table;
}

std::vector<AggregateCell> aggregate_rows(const std::vector<MetricRecord>& rows,
                                          const std::vector<double>& row_axis_values) {
  if (rows.size() != row_axis_values.size()) {
    throw Error("invalid_argument", "rows and axis values disagree on length");
  }
  std::set<std::string> extra_keys;
  for (const MetricRecord& rec : rows) {
    for (const auto& [key, value] : rec.extra) {
      if (key != "gap") {
        extra_keys.insert(key);
      }
    }
  }
  std::vector<std::string> metrics = base_metrics();
  metrics.insert(metrics.end(), extra_keys.begin(), extra_keys.end());

  // Cells keyed by (axis value, estimator) in first-appearance order.
  std::vector<std::pair<double, std::string>> cell_keys;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::pair<double, std::string> key{row_axis_values[i], rows[i].estimator};
    if (std::find(cell_keys.begin(), cell_keys.end(), key) == cell_keys.end()) {
      cell_keys.push_back(key);
    }
  }

  std::vector<AggregateCell> aggregates;
  for (const auto& [axis_value, estimator] : cell_keys) {
    for (const std::string& metric : metrics) {
      AggregateCell agg;
      agg.axis_value = axis_value;
      agg.estimator = estimator;
      agg.metric = metric;
      double sum = 0.0;
      std::vector<double> values;
      int group_size = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (row_axis_values[i] != axis_value || rows[i].estimator != estimator) {
          continue;
        }
        ++group_size;
        const double v = metric_value(rows[i], metric);
        if (std::isfinite(v)) {
          values.push_back(v);
          sum += v;
        }
      }
      agg.count = static_cast<int>(values.size());
      agg.failures = group_size - agg.count;
      if (agg.count > 0) {
        agg.mean = sum / agg.count;
        double ssq = 0.0;
        for (double v : values) {
          ssq += (v - agg.mean) * (v - agg.mean);
        }
        agg.stddev = agg.count > 1 ? std::sqrt(ssq / (agg.count - 1)) : 0.0;
        agg.stderror = agg.stddev / std::sqrt(static_cast<double>(agg.count));
      } else {
        agg.mean = std::numeric_limits<double>::quiet_NaN();
        agg.stddev = std::numeric_limits<double>::quiet_NaN();
        agg.stderror = std::numeric_limits<double>::quiet_NaN();
      }
      aggregates.push_back(std::move(agg));
    }
  }
  return aggregates;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig config;
  config.output_path = "results/" + name;
  if (name == "fig2a_samples") {
    config.axis = SweepAxis::n;
    config.sweep_values = {100, 200, 500, 1000, 2000};
  } else if (name == "fig2b_length") {
    config.axis = SweepAxis::T;
    config.sweep_values = {2, 4, 6, 8, 10};
  } else if (name == "fig2c_noise") {
    config.axis = SweepAxis::sigma;
    config.sweep_values = {0, 0.5, 1, 1.5, 2};
  } else if (name == "fig2d_markov") {
    config.axis = SweepAxis::delta_ratio;
    config.sweep_values = {0, 0.05, 0.1, 0.2, 0.4};
  } else if (name == "fig6_stationary") {
    config.axis = SweepAxis::n;
    config.sweep_values = {100, 200, 500, 1000, 2000};
    config.system.stationary = true;
    config.estimators = {"baseline", "lupts", "stat_lupts"};
  } else if (name == "distill_sandwich") {
    config.axis = SweepAxis::lambda;
    config.sweep_values = {0, 0.25, 0.5, 0.75, 1};
    config.estimators = {"baseline", "lupts", "distill_seq", "distill_concat"};
  } else if (name == "riskbound_check") {
    config.axis = SweepAxis::n;
    config.sweep_values = {200, 500, 1000};
    config.estimators = {"composed"};
    config.test_size = 100000;
    config.replicates = 20;
  } else {
    throw Error("unknown_preset",
                "unknown preset '" + name + "'; available: " + joined(preset_names()));
  }
  return config;
}

std::vector<std::string> preset_names() {
  return {"fig2a_samples", "fig2b_length",     "fig2c_noise",    "fig2d_markov",
          "fig6_stationary", "distill_sandwich", "riskbound_check"};
}

namespace {

std::vector<std::string> collect_extra_columns(const std::vector<MetricRecord>& rows) {
  std::set<std::string> keys;
  for (const MetricRecord& rec : rows) {
    for (const auto& [key, value] : rec.extra) {
      if (key != "gap") {
        keys.insert(key);
      }
    }
  }
  return {keys.begin(), keys.end()};
}

}  // namespace

void write_results(const ResultTable& table, const std::string& path) {
  const std::filesystem::path base(path);
  if (base.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(base.parent_path(), ec);
    if (ec) {
      throw Error("io_error", "cannot create directory '" + base.parent_path().string() + "'");
    }
  }

  const std::vector<std::string> extras = collect_extra_columns(table.rows);

  std::ofstream rows_out(path + ".rows.csv");
  if (!rows_out) {
    throw Error("io_error", "cannot open '" + path + ".rows.csv' for writing");
  }
  rows_out << "estimator,seed,axis_name,axis_value,n,T,d,relative_mse,r_squared,empirical_risk,gap";
  for (const std::string& key : extras) {
    rows_out << ',' << key;
  }
  rows_out << ",error\n";
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const MetricRecord& rec = table.rows[i];
    rows_out << rec.estimator << ',' << rec.seed << ',' << table.axis << ','
             << format_double(table.row_axis_values[i]) << ',' << rec.n << ',' << rec.horizon
             << ',' << rec.dim << ',' << format_double(rec.relative_mse) << ','
             << format_double(rec.r_squared) << ',' << format_double(rec.empirical_risk) << ',';
    const auto gap = rec.extra.find("gap");
    if (gap != rec.extra.end()) {
      rows_out << format_double(gap->second);
    }
    for (const std::string& key : extras) {
      rows_out << ',';
      const auto it = rec.extra.find(key);
      if (it != rec.extra.end()) {
        rows_out << format_double(it->second);
      }
    }
    rows_out << ',' << rec.error << '\n';
  }
  rows_out.close();
  if (!rows_out) {
    throw Error("io_error", "failed writing '" + path + ".rows.csv'");
  }

  std::ofstream agg_out(path + ".agg.csv");
  if (!agg_out) {
    throw Error("io_error", "cannot open '" + path + ".agg.csv' for writing");
  }
  agg_out << "axis_name,axis_value,estimator,metric,mean,std,stderr,count,failures\n";
  for (const AggregateCell& agg : table.aggregates) {
    agg_out << table.axis << ',' << format_double(agg.axis_value) << ',' << agg.estimator << ','
            << agg.metric << ',' << format_double(agg.mean) << ',' << format_double(agg.stddev)
            << ',' << format_double(agg.stderror) << ',' << agg.count << ',' << agg.failures
            << '\n';
  }
  agg_out.close();
  if (!agg_out) {
    throw Error("io_error", "failed writing '" + path + ".agg.csv'");
  }

  std::ofstream config_out(path + ".config.json");
  if (!config_out) {
    throw Error("io_error", "cannot open '" + path + ".config.json' for writing");
  }
  config_out << table.config.dump(2) << '\n';
}

std::pair<std::vector<MetricRecord>, std::vector<double>> read_rows_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("io_error", "cannot open '" + path + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error("parse_error", "'" + path + "' is empty");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      header.push_back(field);
    }
  }
  const std::vector<std::string> leading{"estimator", "seed",        "axis_name",
                                         "axis_value", "n",          "T",
                                         "d",          "relative_mse", "r_squared",
                                         "empirical_risk", "gap"};
  if (header.size() < leading.size() + 1 ||
      !std::equal(leading.begin(), leading.end(), header.begin()) || header.back() != "error") {
    throw Error("parse_error", "'" + path + "' does not look like a rows CSV");
  }
  const std::vector<std::string> extras(header.begin() + static_cast<long>(leading.size()),
                                        header.end() - 1);

  std::vector<MetricRecord> rows;
  std::vector<double> axis_values;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    {
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) {
        fields.push_back(field);
      }
      if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
      }
    }
    if (fields.size() != header.size()) {
      throw Error("parse_error", "row with " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(header.size()));
    }
    MetricRecord rec;
    rec.estimator = fields[0];
    rec.seed = std::stoull(fields[1]);
    axis_values.push_back(std::stod(fields[3]));
    rec.n = static_cast<Index>(std::stoll(fields[4]));
    rec.horizon = std::stoi(fields[5]);
    rec.dim = std::stoi(fields[6]);
    rec.relative_mse = std::stod(fields[7]);
    rec.r_squared = std::stod(fields[8]);
    rec.empirical_risk = std::stod(fields[9]);
    if (!fields[10].empty()) {
      rec.extra["gap"] = std::stod(fields[10]);
    }
    for (std::size_t e = 0; e < extras.size(); ++e) {
      const std::string& raw = fields[11 + e];
      if (!raw.empty()) {
        rec.extra[extras[e]] = std::stod(raw);
      }
    }
    rec.error = fields.back();
    rows.push_back(std::move(rec));
  }
  return {std::move(rows), std::move(axis_values)};
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["system"] = {{"dim", config.system.dim},
                 {"horizon", config.system.horizon},
                 {"kappa", config.system.kappa},
                 {"entry_std", config.system.entry_std},
                 {"noise_scales", config.system.noise_scales},
                 {"outcome_noise", config.system.outcome_noise},
                 {"initial_state",
                  {{"mean", config.system.initial_state.mean},
                   {"std", config.system.initial_state.std}}},
                 {"stationary", config.system.stationary}};
  j["axis"] = axis_name(config.axis);
  j["sweep_values"] = config.sweep_values;
  j["train_size"] = config.train_size;
  j["test_size"] = config.test_size;
  j["replicates"] = config.replicates;
  j["estimators"] = config.estimators;
  j["master_seed"] = config.master_seed;
  j["output_path"] = config.output_path;
  j["fix_system"] = config.fix_system;
  j["delta_ratio"] = config.delta_ratio;
  j["lambda"] = config.lambda;
  j["select_lambda"] = config.select_lambda;
  j["ridge_lambda"] = config.ridge_lambda;
  j["threads"] = config.threads;
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  try {
    if (j.contains("system")) {
      const auto& sys = j.at("system");
      config.system.dim = sys.value("dim", config.system.dim);
      config.system.horizon = sys.value("horizon", config.system.horizon);
      config.system.kappa = sys.value("kappa", config.system.kappa);
      config.system.entry_std = sys.value("entry_std", config.system.entry_std);
      if (sys.contains("noise_scales")) {
        config.system.noise_scales = sys.at("noise_scales").get<std::vector<double>>();
      }
      config.system.outcome_noise = sys.value("outcome_noise", config.system.outcome_noise);
      if (sys.contains("initial_state")) {
        config.system.initial_state.mean =
            sys.at("initial_state").value("mean", config.system.initial_state.mean);
        config.system.initial_state.std =
            sys.at("initial_state").value("std", config.system.initial_state.std);
      }
      config.system.stationary = sys.value("stationary", config.system.stationary);
    }
    config.axis = axis_from_name(j.value("axis", std::string("n")));
    if (j.contains("sweep_values")) {
      config.sweep_values = j.at("sweep_values").get<std::vector<double>>();
    }
    config.train_size = j.value("train_size", config.train_size);
    config.test_size = j.value("test_size", config.test_size);
    config.replicates = j.value("replicates", config.replicates);
    if (j.contains("estimators")) {
      config.estimators = j.at("estimators").get<std::vector<std::string>>();
    }
    config.master_seed = j.value("master_seed", config.master_seed);
    config.output_path = j.value("output_path", config.output_path);
    config.fix_system = j.value("fix_system", config.fix_system);
    config.delta_ratio = j.value("delta_ratio", config.delta_ratio);
    config.lambda = j.value("lambda", config.lambda);
    config.select_lambda = j.value("select_lambda", config.select_lambda);
    config.ridge_lambda = j.value("ridge_lambda", config.ridge_lambda);
    config.threads = j.value("threads", config.threads);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse_error", std::string("invalid experiment config: ") + e.what());
  }
  return config;
}

ResultTable run_ingest(const IngestConfig& config) {
  if (config.train_sizes.empty()) {
    throw Error("invalid_argument", "no training sizes given");
  }
  if (config.replicates < 1 ||
      static_cast<std::uint64_t>(config.replicates) >= kFixedSystemReplicate) {
    throw Error("invalid_argument", "replicates must be in [1, 2^32 - 2]");
  }
  if (!(config.test_fraction > 0.0) || !(config.test_fraction < 1.0)) {
    throw Error("invalid_argument", "test fraction must lie in (0, 1)");
  }
  for (const std::string& label : config.estimators) {
    if (std::find(known_estimators().begin(), known_estimators().end(), label) ==
        known_estimators().end()) {
      throw Error("unknown_estimator",
                  "unknown estimator '" + label + "'; known: " + joined(known_estimators()));
    }
  }

  const TrajectoryTable table = load_trajectory_csv(config.csv_path, config.schema);
  RngStream split_stream(config.master_seed, std::numeric_limits<std::uint64_t>::max());
  const auto [train_pool, test_table] =
      split_rows(table, {1.0 - config.test_fraction, config.test_fraction}, split_stream);

  EstimatorContext context;
  context.lambda = config.lambda;
  context.select_lambda = config.select_lambda;

  ResultTable result;
  result.axis = "n";
  nlohmann::json echo;
  echo["csv_path"] = config.csv_path;
  echo["schema"] = schema_to_json(config.schema);
  echo["train_sizes"] = config.train_sizes;
  echo["estimators"] = config.estimators;
  echo["replicates"] = config.replicates;
  echo["master_seed"] = config.master_seed;
  echo["test_fraction"] = config.test_fraction;
  echo["output_path"] = config.output_path;
  echo["lambda"] = config.lambda;
  echo["select_lambda"] = config.select_lambda;
  result.config = echo;

  for (std::size_t s = 0; s < config.train_sizes.size(); ++s) {
    const Index size = config.train_sizes[s];
    if (size < 2) {
      throw Error("invalid_argument", "training sizes must be >= 2");
    }
    if (size > train_pool.rows()) {
      throw Error("invalid_argument",
                  "training size " + std::to_string(size) + " exceeds the training pool (" +
                      std::to_string(train_pool.rows()) + " rows)");
    }
    for (int r = 0; r < config.replicates; ++r) {
      const std::uint64_t stream =
          (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint64_t>(r);
      RngStream rng(config.master_seed, stream);
      const std::vector<Index> subset = sample_without_replacement(train_pool.rows(), size, rng);
      const TrajectoryTable sub_table = take_rows(train_pool, subset);

      TrajectoryDataset train;
      TrajectoryDataset test;
      LinearPredictor baseline_fit;
      std::string replicate_error;
      try {
        const PreprocessStats stats = fit_preprocess(sub_table);
        train = apply_preprocess(sub_table, stats);
        test = apply_preprocess(test_table, stats);
        baseline_fit = fit_baseline(train);
      } catch (const Error& e) {
        replicate_error = e.code();
      }

      for (const std::string& label : config.estimators) {
        MetricRecord rec;
        rec.estimator = label;
        rec.seed = stream;
        rec.n = size;
        rec.horizon = config.schema.horizon;
        rec.dim = replicate_error.empty() ? static_cast<int>(train.dim()) : config.schema.dim;
        if (!replicate_error.empty()) {
          rec.error = replicate_error;
        } else {
          try {
            const FittedEstimator fitted = fit_estimator(label, train, context, rng);
            score_estimator(label, fitted, baseline_fit, nullptr, test, rec);
          } catch (const Error& e) {
            rec.error = e.code();
          }
        }
        result.rows.push_back(std::move(rec));
        result.row_axis_values.push_back(static_cast<double>(size));
      }
    }
  }
  result.aggregates = aggregate_rows(result.rows, result.row_axis_values);
  return result;
}

}  // namespace lupts
