// Command-line harness: run synthetic experiment sweeps (from a preset or a
// JSON config), evaluate estimators on external trajectory CSVs, and list
// the available presets. Results land in <out>.rows.csv / <out>.agg.csv /
// <out>.config.json. On failure a machine-readable JSON error is printed to
// stderr and the exit code is nonzero.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lupts/harness.hpp"

namespace {

void print_error(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << std::endl;
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw lupts::Error("io_error", "cannot open '" + path + "'");
  }
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw lupts::Error("parse_error", "invalid JSON in '" + path + "': " + e.what());
  }
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> items;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) {
      items.push_back(item);
    }
  }
  return items;
}

int command_run(const std::string& config_path, const std::string& preset_name,
                std::optional<std::uint64_t> seed, std::optional<int> replicates,
                std::optional<int> threads, std::string out) {
  lupts::ExperimentConfig config;
  if (!preset_name.empty()) {
    config = lupts::preset(preset_name);
  } else {
    config = lupts::config_from_json(load_json_file(config_path));
  }
  if (seed) {
    config.master_seed = *seed;
  }
  if (replicates) {
    config.replicates = *replicates;
  }
  if (threads) {
    config.threads = *threads;
  }
  if (!out.empty()) {
    config.output_path = out;
  }
  if (config.output_path.empty()) {
    config.output_path = "results/run";
  }

  const lupts::ResultTable table = lupts::run_experiment(config);
  lupts::write_results(table, config.output_path);
  std::cout << "wrote " << table.rows.size() << " rows to " << config.output_path
            << ".rows.csv" << std::endl;
  return 0;
}

int command_ingest(const std::string& csv, const std::string& schema_path,
                   const std::string& estimators, const std::string& train_sizes,
                   std::uint64_t seed, int replicates, double test_fraction,
                   const std::string& out) {
  lupts::IngestConfig config;
  config.csv_path = csv;
  config.schema = lupts::schema_from_json(load_json_file(schema_path));
  config.estimators = split_list(estimators);
  for (const std::string& raw : split_list(train_sizes)) {
    try {
      config.train_sizes.push_back(static_cast<lupts::Index>(std::stoll(raw)));
    } catch (const std::exception&) {
      throw lupts::Error("invalid_argument", "cannot parse training size '" + raw + "'");
    }
  }
  config.master_seed = seed;
  config.replicates = replicates;
  config.test_fraction = test_fraction;
  config.output_path = out;

  const lupts::ResultTable table = lupts::run_ingest(config);
  lupts::write_results(table, config.output_path);
  std::ofstream schema_out(config.output_path + ".schema.json");
  if (!schema_out) {
    throw lupts::Error("io_error",
                       "cannot open '" + config.output_path + ".schema.json' for writing");
  }
  schema_out << lupts::schema_to_json(config.schema).dump(2) << '\n';
  std::cout << "wrote " << table.rows.size() << " rows to " << config.output_path
            << ".rows.csv" << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privileged time-series estimator benchmark harness"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run a synthetic experiment sweep");
  std::string config_path;
  std::string preset_name;
  std::string run_out;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<int> threads;
  auto* config_opt = run->add_option("--config", config_path, "Experiment config JSON file");
  auto* preset_opt = run->add_option("--preset", preset_name, "Named preset configuration");
  config_opt->excludes(preset_opt);
  run->add_option("--seed", seed, "Master seed override");
  run->add_option("--replicates", replicates, "Replicate count override");
  run->add_option("--threads", threads, "Worker thread count (0 = hardware)");
  run->add_option("--out", run_out, "Output path prefix");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Evaluate estimators on a trajectory CSV");
  std::string csv_path;
  std::string schema_path;
  std::string estimators = "baseline,lupts";
  std::string train_sizes;
  std::uint64_t ingest_seed = 0;
  int ingest_replicates = 20;
  double test_fraction = 0.2;
  std::string ingest_out = "results/ingest";
  ingest->add_option("--csv", csv_path, "Wide-format trajectory CSV")->required();
  ingest->add_option("--schema", schema_path, "Schema JSON ({T, d, outcome_column, missing_marker})")
      ->required();
  ingest->add_option("--estimators", estimators, "Comma-separated estimator labels");
  ingest->add_option("--train-sizes", train_sizes, "Comma-separated training sizes")->required();
  ingest->add_option("--seed", ingest_seed, "Master seed");
  ingest->add_option("--replicates", ingest_replicates, "Replicates per training size");
  ingest->add_option("--test-fraction", test_fraction, "Held-out fraction of rows");
  ingest->add_option("--out", ingest_out, "Output path prefix");

  auto* list = app.add_subcommand("list-presets", "List the available presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help and friends
    }
    print_error("cli_parse", e.what());
    return 2;
  }

  try {
    if (run->parsed()) {
      if (config_path.empty() && preset_name.empty()) {
        throw lupts::Error("invalid_argument", "run needs either --config or --preset");
      }
      return command_run(config_path, preset_name, seed, replicates, threads, run_out);
    }
    if (ingest->parsed()) {
      return command_ingest(csv_path, schema_path, estimators, train_sizes, ingest_seed,
                            ingest_replicates, test_fraction, ingest_out);
    }
    if (list->parsed()) {
      for (const std::string& name : lupts::preset_names()) {
        std::cout << name << '\n';
      }
      return 0;
    }
  } catch (const lupts::Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
